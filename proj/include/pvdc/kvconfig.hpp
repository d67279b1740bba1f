#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <string>

#include "pvdc/model.hpp"

namespace pvdc {

// Plain-text configuration: one "key = value" per line, '#' comments, later
// assignments win. Grammar for stage triplet lists: "(c,b,r),(c,b,r),...";
// integer lists: "a,b,c".
class KvConfig {
public:
    KvConfig() = default;

    static KvConfig parse_file(const std::string& path);
    static KvConfig parse_string(const std::string& text, const std::string& origin = "<string>");

    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    bool contains(const std::string& key) const { return values_.count(key) != 0; }

    std::optional<std::string> get(const std::string& key) const;
    std::string get_or(const std::string& key, const std::string& fallback) const;
    long get_int(const std::string& key, long fallback) const;
    double get_double(const std::string& key, double fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;

    // overlay: other's values win
    void merge_from(const KvConfig& other);

    void dump(std::ostream& os) const; // sorted key = value lines
    std::string dump_string() const;

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

std::vector<StageSpec> parse_stage_list(const std::string& text);
std::vector<int> parse_int_list(const std::string& text);
std::string format_stage_list(const std::vector<StageSpec>& stages);
std::string format_int_list(const std::vector<int>& xs);

// "model.*" keys over the cc3d default (or a named preset via model.preset)
ModelConfig model_config_from_kv(const KvConfig& kv);
KvConfig model_config_to_kv(const ModelConfig& cfg);

enum class Precision { F32, F64 };

struct TrainConfig {
    int epochs = 50;
    int batch_size = 80;
    std::size_t n_points = 10000;
    double learning_rate = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    int eval_every = 100; // steps; validation also runs at each epoch end
    std::uint64_t seed = 42;
    Precision precision = Precision::F32;
    long max_steps = -1; // optional hard stop
    int checkpoint_keep = 3;

    void validate() const {
        if (epochs < 1) throw ConfigError("train config: epochs must be >= 1");
        if (batch_size < 1) throw ConfigError("train config: batch_size must be >= 1");
        if (n_points == 0) throw ConfigError("train config: n_points must be > 0");
        if (eval_every < 1) throw ConfigError("train config: eval_every must be >= 1");
    }
};

TrainConfig train_config_from_kv(const KvConfig& kv);
KvConfig train_config_to_kv(const TrainConfig& cfg);

} // namespace pvdc
