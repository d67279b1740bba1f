#include "pvdc/kvconfig.hpp"

#include <fstream>
#include <sstream>

namespace pvdc {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

} // namespace

KvConfig KvConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str(), path);
}

KvConfig KvConfig::parse_string(const std::string& text, const std::string& origin) {
    KvConfig kv;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ParseError(origin + ":" + std::to_string(lineno) + ": empty key");
        kv.values_[key] = value;
    }
    return kv;
}

std::optional<std::string> KvConfig::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

std::string KvConfig::get_or(const std::string& key, const std::string& fallback) const {
    auto v = get(key);
    return v ? *v : fallback;
}

long KvConfig::get_int(const std::string& key, long fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    try {
        return std::stol(*v);
    } catch (...) {
        throw ConfigError("config key " + key + ": expected integer, got '" + *v + "'");
    }
}

double KvConfig::get_double(const std::string& key, double fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    try {
        return std::stod(*v);
    } catch (...) {
        throw ConfigError("config key " + key + ": expected number, got '" + *v + "'");
    }
}

std::uint64_t KvConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    try {
        return std::stoull(*v);
    } catch (...) {
        throw ConfigError("config key " + key + ": expected unsigned integer, got '" + *v + "'");
    }
}

void KvConfig::merge_from(const KvConfig& other) {
    for (const auto& [k, v] : other.values_) values_[k] = v;
}

void KvConfig::dump(std::ostream& os) const {
    for (const auto& [k, v] : values_) os << k << " = " << v << "\n";
}

std::string KvConfig::dump_string() const {
    std::ostringstream os;
    dump(os);
    return os.str();
}

std::vector<StageSpec> parse_stage_list(const std::string& text) {
    std::vector<StageSpec> stages;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto open = text.find('(', pos);
        if (open == std::string::npos) break;
        const auto close = text.find(')', open);
        if (close == std::string::npos)
            throw ConfigError("stage list: unbalanced parentheses in '" + text + "'");
        std::istringstream body(text.substr(open + 1, close - open - 1));
        StageSpec s;
        char c1, c2;
        if (!(body >> s.channels >> c1 >> s.num_blocks >> c2 >> s.resolution) || c1 != ',' ||
            c2 != ',')
            throw ConfigError("stage list: expected (channels,blocks,resolution) in '" + text + "'");
        stages.push_back(s);
        pos = close + 1;
    }
    if (stages.empty()) throw ConfigError("stage list: no triplets in '" + text + "'");
    return stages;
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        try {
            out.push_back(std::stoi(item));
        } catch (...) {
            throw ConfigError("integer list: bad element '" + item + "'");
        }
    }
    return out;
}

std::string format_stage_list(const std::vector<StageSpec>& stages) {
    std::ostringstream os;
    for (std::size_t i = 0; i < stages.size(); ++i) {
        if (i) os << ",";
        os << "(" << stages[i].channels << "," << stages[i].num_blocks << ","
           << stages[i].resolution << ")";
    }
    return os.str();
}

std::string format_int_list(const std::vector<int>& xs) {
    std::ostringstream os;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) os << ",";
        os << xs[i];
    }
    return os.str();
}

ModelConfig model_config_from_kv(const KvConfig& kv) {
    ModelConfig cfg;
    const std::string preset = kv.get_or("model.preset", "cc3d");
    if (preset == "cc3d") cfg = ModelConfig::cc3d_default();
    else if (preset == "toy") cfg = ModelConfig::toy();
    else if (preset == "micro") cfg = ModelConfig::micro();
    else throw ConfigError("model.preset must be cc3d, toy or micro, got '" + preset + "'");

    if (auto v = kv.get("model.encoder.coarse")) cfg.encoder_coarse = parse_stage_list(*v);
    cfg.encoder_width = int(kv.get_int("model.encoder.width", cfg.encoder_width));
    if (auto v = kv.get("model.encoder.cloud_mlp")) cfg.encoder_cloud_mlp = parse_int_list(*v);
    if (auto v = kv.get("model.decoder.coarse")) cfg.decoder_coarse = parse_stage_list(*v);
    cfg.decoder_width = int(kv.get_int("model.decoder.width", cfg.decoder_width));
    if (auto v = kv.get("model.decoder.fine_mlp")) cfg.decoder_fine_mlp = parse_int_list(*v);
    cfg.n_points = std::size_t(kv.get_int("model.n_points", long(cfg.n_points)));
    cfg.kernel_size = int(kv.get_int("model.kernel_size", cfg.kernel_size));
    cfg.dropout_rate = kv.get_double("model.dropout", cfg.dropout_rate);
    cfg.validate();
    return cfg;
}

KvConfig model_config_to_kv(const ModelConfig& cfg) {
    KvConfig kv;
    kv.set("model.encoder.coarse", format_stage_list(cfg.encoder_coarse));
    kv.set("model.encoder.width", std::to_string(cfg.encoder_width));
    kv.set("model.encoder.cloud_mlp", format_int_list(cfg.encoder_cloud_mlp));
    kv.set("model.decoder.coarse", format_stage_list(cfg.decoder_coarse));
    kv.set("model.decoder.width", std::to_string(cfg.decoder_width));
    kv.set("model.decoder.fine_mlp", format_int_list(cfg.decoder_fine_mlp));
    kv.set("model.n_points", std::to_string(cfg.n_points));
    kv.set("model.kernel_size", std::to_string(cfg.kernel_size));
    kv.set("model.dropout", std::to_string(cfg.dropout_rate));
    return kv;
}

TrainConfig train_config_from_kv(const KvConfig& kv) {
    TrainConfig cfg;
    cfg.epochs = int(kv.get_int("train.epochs", cfg.epochs));
    cfg.batch_size = int(kv.get_int("train.batch_size", cfg.batch_size));
    cfg.n_points = std::size_t(kv.get_int("train.n_points", long(cfg.n_points)));
    cfg.learning_rate = kv.get_double("train.lr", cfg.learning_rate);
    cfg.adam_beta1 = kv.get_double("train.adam.beta1", cfg.adam_beta1);
    cfg.adam_beta2 = kv.get_double("train.adam.beta2", cfg.adam_beta2);
    cfg.adam_eps = kv.get_double("train.adam.eps", cfg.adam_eps);
    cfg.eval_every = int(kv.get_int("train.eval_every", cfg.eval_every));
    cfg.seed = kv.get_u64("train.seed", cfg.seed);
    cfg.max_steps = kv.get_int("train.max_steps", cfg.max_steps);
    cfg.checkpoint_keep = int(kv.get_int("train.checkpoint_keep", cfg.checkpoint_keep));
    const std::string prec = kv.get_or("train.precision", "f32");
    if (prec == "f32") cfg.precision = Precision::F32;
    else if (prec == "f64") cfg.precision = Precision::F64;
    else throw ConfigError("train.precision must be f32 or f64, got '" + prec + "'");
    cfg.validate();
    return cfg;
}

KvConfig train_config_to_kv(const TrainConfig& cfg) {
    KvConfig kv;
    kv.set("train.epochs", std::to_string(cfg.epochs));
    kv.set("train.batch_size", std::to_string(cfg.batch_size));
    kv.set("train.n_points", std::to_string(cfg.n_points));
    std::ostringstream lr;
    lr << cfg.learning_rate;
    kv.set("train.lr", lr.str());
    std::ostringstream b1, b2, eps;
    b1 << cfg.adam_beta1;
    b2 << cfg.adam_beta2;
    eps << cfg.adam_eps;
    kv.set("train.adam.beta1", b1.str());
    kv.set("train.adam.beta2", b2.str());
    kv.set("train.adam.eps", eps.str());
    kv.set("train.eval_every", std::to_string(cfg.eval_every));
    kv.set("train.seed", std::to_string(cfg.seed));
    kv.set("train.max_steps", std::to_string(cfg.max_steps));
    kv.set("train.checkpoint_keep", std::to_string(cfg.checkpoint_keep));
    kv.set("train.precision", cfg.precision == Precision::F32 ? "f32" : "f64");
    return kv;
}

} // namespace pvdc
