#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>

#include "pvdc/adam.hpp"
#include "pvdc/checkpoint.hpp"
#include "pvdc/dataset.hpp"
#include "pvdc/kvconfig.hpp"
#include "pvdc/model.hpp"

namespace pvdc {

// Raised when a NaN/Inf loss appears; carries the offending batch ids so the
// CLI can dump them.
class TrainAbort : public Error {
public:
    TrainAbort(const std::string& msg, std::vector<std::string> ids)
        : Error(msg), batch_ids(std::move(ids)) {}
    std::vector<std::string> batch_ids;
};

struct TrainResult {
    std::uint64_t steps = 0;
    double initial_train_loss = 0.0;
    double final_train_loss = 0.0;
    double best_val = 0.0;
    bool has_best = false;
    std::string best_checkpoint;
    bool interrupted = false;
};

struct EvalRow {
    std::string id;
    double chamfer_raw = 0.0;
    double chamfer_norm = 0.0;
};

struct EvalSummary {
    std::vector<EvalRow> rows;
    std::vector<std::string> missing;
    double mean_raw = 0.0, std_raw = 0.0;   // population std
    double mean_norm = 0.0, std_norm = 0.0;

    void finalize() {
        double sr = 0, sn = 0;
        for (const auto& r : rows) {
            sr += r.chamfer_raw;
            sn += r.chamfer_norm;
        }
        const double n = double(rows.size());
        mean_raw = rows.empty() ? 0 : sr / n;
        mean_norm = rows.empty() ? 0 : sn / n;
        double vr = 0, vn = 0;
        for (const auto& r : rows) {
            vr += (r.chamfer_raw - mean_raw) * (r.chamfer_raw - mean_raw);
            vn += (r.chamfer_norm - mean_norm) * (r.chamfer_norm - mean_norm);
        }
        std_raw = rows.empty() ? 0 : std::sqrt(vr / n);
        std_norm = rows.empty() ? 0 : std::sqrt(vn / n);
    }
};

// Per-model Chamfer of an arbitrary reconstruction function over a fold.
// Entries whose sources fail to load are listed in `missing` and skipped.
inline EvalSummary evaluate_fold(
    const std::vector<const ManifestEntry*>& fold, std::size_t n_points,
    const std::function<PointCloud<double>(const PairSample&)>& reconstruct) {
    EvalSummary summary;
    DatasetCache cache(n_points);
    for (const ManifestEntry* entry : fold) {
        PairSample pair;
        try {
            pair = make_pair_sample(*entry, n_points);
        } catch (const Error& e) {
            summary.missing.push_back(entry->id + ": " + e.what());
            continue;
        }
        const auto recon = reconstruct(pair);
        const auto res =
            chamfer_kdtree(std::span<const double>(recon.coords.data(), recon.coords.size()),
                           std::span<const double>(pair.target.coords.data(),
                                                   pair.target.coords.size()));
        summary.rows.push_back({entry->id, res.value, res.normalized()});
    }
    summary.finalize();
    return summary;
}

inline void write_eval_csv(const std::string& path, const EvalSummary& summary) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << "id,chamfer_raw,chamfer_norm\n";
    out << std::setprecision(17);
    for (const auto& r : summary.rows)
        out << r.id << "," << r.chamfer_raw << "," << r.chamfer_norm << "\n";
    if (!out) throw Error("write failed: " + path);
}

// ------------------------------------------------------------------ trainer

template <class T>
constexpr DType dtype_of();
template <>
constexpr DType dtype_of<float>() {
    return DType::F32;
}
template <>
constexpr DType dtype_of<double>() {
    return DType::F64;
}

template <class T>
void params_to_checkpoint(const ParamStore<T>& params, Checkpoint& ckpt,
                          const std::string& prefix = "param.") {
    for (const auto& [name, tensor] : params) {
        std::vector<std::uint32_t> dims;
        for (auto d : tensor.shape()) dims.push_back(std::uint32_t(d));
        if constexpr (std::is_same_v<T, float>)
            ckpt.add_f32(prefix + name, dims, tensor.data().data());
        else
            ckpt.add_f64(prefix + name, dims, tensor.data().data());
    }
}

template <class T>
void params_from_checkpoint(ParamStore<T>& params, const Checkpoint& ckpt,
                            const std::string& prefix = "param.") {
    for (auto& [name, tensor] : params) {
        const auto vals = ckpt.as_real(prefix + name);
        if (vals.size() != tensor.numel())
            throw Error("checkpoint: size mismatch for " + name);
        auto data = tensor.data();
        for (std::size_t i = 0; i < vals.size(); ++i) data[i] = T(vals[i]);
    }
}

// Mini-batch Chamfer-loss optimization with checkpointing and
// best-on-validation tracking. One training step forwards every batch member
// sequentially (bit-reproducible accumulation; the kernels underneath are
// OpenMP-parallel), backpropagates the member losses scaled by 1/batch, and
// applies one Adam update.
template <class T>
class Trainer {
public:
    Trainer(DatasetManifest manifest, ModelConfig model_cfg, TrainConfig train_cfg,
            std::string out_dir)
        : manifest_(std::move(manifest)), model_cfg_(std::move(model_cfg)),
          train_cfg_(train_cfg), out_dir_(std::move(out_dir)), cache_(train_cfg.n_points),
          params_(init_params<T>(model_cfg_, train_cfg.seed)),
          adam_(params_, train_cfg.learning_rate, train_cfg.adam_beta1, train_cfg.adam_beta2,
                train_cfg.adam_eps) {
        train_cfg_.validate();
        model_cfg_.validate();
        if (model_cfg_.n_points != train_cfg_.n_points)
            throw ConfigError("trainer: model.n_points != train.n_points");
        train_fold_ = manifest_.fold("train");
        val_fold_ = manifest_.fold("val");
        if (train_fold_.empty()) throw ContractError("trainer: manifest has no train entries");
        if (val_fold_.empty()) throw ContractError("trainer: manifest has no val entries");
        std::filesystem::create_directories(out_dir_);
    }

    ParamStore<T>& params() { return params_; }
    const ModelConfig& model_config() const { return model_cfg_; }
    std::uint64_t step() const { return step_; }

    void save_checkpoint(const std::string& path) const {
        Checkpoint ckpt;
        ckpt.add_bytes("config.model", model_config_to_kv(model_cfg_).dump_string());
        ckpt.add_bytes("config.train", train_config_to_kv(train_cfg_).dump_string());
        params_to_checkpoint(params_, ckpt);
        for (std::size_t i = 0; i < adam_.names().size(); ++i) {
            std::vector<std::uint32_t> dims{std::uint32_t(adam_.moment1(i).size())};
            if constexpr (std::is_same_v<T, float>) {
                ckpt.add_f32("adam.m." + adam_.names()[i], dims, adam_.moment1(i).data());
                ckpt.add_f32("adam.v." + adam_.names()[i], dims, adam_.moment2(i).data());
            } else {
                ckpt.add_f64("adam.m." + adam_.names()[i], dims, adam_.moment1(i).data());
                ckpt.add_f64("adam.v." + adam_.names()[i], dims, adam_.moment2(i).data());
            }
        }
        ckpt.add_u64("adam.t", adam_.step_count());
        ckpt.add_u64("trainer.step", step_);
        ckpt.add_u64("trainer.has_best", has_best_ ? 1 : 0);
        const double bv = best_val_;
        ckpt.add_f64("trainer.best_val", {1}, &bv);
        ckpt.save(path);
    }

    void resume(const std::string& path) {
        const auto ckpt = Checkpoint::load(path);
        params_from_checkpoint(params_, ckpt);
        for (std::size_t i = 0; i < adam_.names().size(); ++i) {
            const auto m = ckpt.as_real("adam.m." + adam_.names()[i]);
            const auto v = ckpt.as_real("adam.v." + adam_.names()[i]);
            auto& dst_m = adam_.moment1(i);
            auto& dst_v = adam_.moment2(i);
            if (m.size() != dst_m.size() || v.size() != dst_v.size())
                throw Error("checkpoint: adam state size mismatch for " + adam_.names()[i]);
            for (std::size_t j = 0; j < m.size(); ++j) {
                dst_m[j] = T(m[j]);
                dst_v[j] = T(v[j]);
            }
        }
        adam_.set_step_count(ckpt.as_u64("adam.t"));
        step_ = ckpt.as_u64("trainer.step");
        has_best_ = ckpt.as_u64("trainer.has_best") != 0;
        best_val_ = ckpt.as_f64("trainer.best_val")[0];
        resumed_ = true;
    }

    // mean per-sample normalized Chamfer over the validation fold, eval mode
    double validate() {
        double total = 0.0;
        for (const ManifestEntry* entry : val_fold_) {
            const auto& pair = cached(*entry);
            auto pred = autoencode(pair.input, model_cfg_, params_, Mode::Eval, 0);
            auto loss = chamfer_loss(
                pred, std::span<const T>(pair.target_coords.data(), pair.target_coords.size()),
                true, &pair.target_tree);
            total += double(loss.item());
        }
        return total / double(val_fold_.size());
    }

    TrainResult run(const std::function<bool()>& interrupted = {}) {
        const std::size_t n_train = train_fold_.size();
        const std::size_t batch = std::size_t(train_cfg_.batch_size);
        const std::size_t steps_per_epoch = (n_train + batch - 1) / batch;
        const std::uint64_t total_steps =
            train_cfg_.max_steps >= 0
                ? std::uint64_t(train_cfg_.max_steps)
                : std::uint64_t(train_cfg_.epochs) * steps_per_epoch;

        std::ofstream log(log_path(), resumed_ ? std::ios::app : std::ios::out);
        if (!log) throw Error("cannot write " + log_path());
        if (!resumed_) log << "step,epoch,train_loss,val_loss,wall_seconds\n";
        log << std::setprecision(17);

        TrainResult result;
        result.best_val = best_val_;
        result.has_best = has_best_;
        const auto t0 = std::chrono::steady_clock::now();
        bool first_logged_step = true;

        while (step_ < total_steps) {
            const std::uint64_t epoch = step_ / steps_per_epoch;
            const std::uint64_t offset = step_ % steps_per_epoch;
            if (std::uint64_t(train_cfg_.epochs) <= epoch && train_cfg_.max_steps < 0) break;

            // deterministic per-epoch order
            std::vector<std::size_t> order(n_train);
            for (std::size_t i = 0; i < n_train; ++i) order[i] = i;
            Rng shuffle_rng(derive_seed(train_cfg_.seed, 0xeb0c, epoch));
            shuffle_rng.shuffle(order.begin(), order.end());

            const std::size_t begin = offset * batch;
            const std::size_t end = std::min(begin + batch, n_train);
            std::vector<const ManifestEntry*> members;
            for (std::size_t i = begin; i < end; ++i) members.push_back(train_fold_[order[i]]);

            const double loss = train_step(members);
            ++step_;

            if (first_logged_step && result.initial_train_loss == 0.0)
                result.initial_train_loss = loss;
            first_logged_step = false;
            result.final_train_loss = loss;

            std::string val_field;
            const bool epoch_end = (offset + 1 == steps_per_epoch);
            if (step_ % std::uint64_t(train_cfg_.eval_every) == 0 || epoch_end ||
                step_ == total_steps) {
                const double val = validate();
                val_field = format_double(val);
                if (!has_best_ || val < best_val_) {
                    has_best_ = true;
                    best_val_ = val;
                    save_checkpoint(best_path());
                }
            }
            const double wall =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            log << step_ << "," << epoch << "," << format_double(loss) << "," << val_field << ","
                << wall << "\n";
            log.flush();

            if (epoch_end) {
                save_checkpoint(epoch_path(epoch));
                prune_checkpoints(epoch);
            }
            if (interrupted && interrupted()) {
                save_checkpoint(last_path());
                result.interrupted = true;
                break;
            }
        }
        save_checkpoint(last_path());
        result.steps = step_;
        result.best_val = best_val_;
        result.has_best = has_best_;
        result.best_checkpoint = has_best_ ? best_path() : "";
        return result;
    }

    std::string log_path() const { return out_dir_ + "/train_log.csv"; }
    std::string best_path() const { return out_dir_ + "/best.ckpt"; }
    std::string last_path() const { return out_dir_ + "/last.ckpt"; }
    std::string epoch_path(std::uint64_t epoch) const {
        std::ostringstream os;
        os << out_dir_ << "/epoch_" << std::setw(6) << std::setfill('0') << epoch << ".ckpt";
        return os.str();
    }

private:
    struct CachedPair {
        PointCloud<T> input;
        std::vector<T> target_coords;
        KdTree<T> target_tree;
    };

    const CachedPair& cached(const ManifestEntry& entry) {
        auto it = typed_cache_.find(entry.id);
        if (it != typed_cache_.end()) return it->second;
        const PairSample& pair = cache_.get(entry);
        CachedPair cp;
        cp.input = convert_cloud<T>(pair.input);
        cp.target_coords.assign(pair.target.coords.begin(), pair.target.coords.end());
        cp.target_tree.build(std::span<const T>(cp.target_coords.data(), cp.target_coords.size()));
        auto [pos, ok] = typed_cache_.emplace(entry.id, std::move(cp));
        return pos->second;
    }

    double train_step(const std::vector<const ManifestEntry*>& members) {
        params_.zero_grads();
        double total = 0.0;
        const T inv_batch = T(1.0 / double(members.size()));
        for (std::size_t mi = 0; mi < members.size(); ++mi) {
            const auto& pair = cached(*members[mi]);
            const std::uint64_t seed = derive_seed(train_cfg_.seed, 0xd20, step_, mi);
            auto pred = autoencode(pair.input, model_cfg_, params_, Mode::Train, seed);
            auto loss = chamfer_loss(
                pred, std::span<const T>(pair.target_coords.data(), pair.target_coords.size()),
                true, &pair.target_tree);
            const double value = double(loss.item());
            if (!std::isfinite(value)) {
                std::vector<std::string> ids;
                for (auto* m : members) ids.push_back(m->id);
                std::string msg = "training aborted: non-finite loss at step " +
                                  std::to_string(step_ + 1) + "; batch ids:";
                for (const auto& id : ids) msg += " " + id;
                throw TrainAbort(msg, ids);
            }
            total += value;
            backward(ops::scale(loss, inv_batch));
        }
        adam_.step();
        return total / double(members.size());
    }

    void prune_checkpoints(std::uint64_t current_epoch) {
        if (train_cfg_.checkpoint_keep < 0) return;
        const std::uint64_t keep = std::uint64_t(train_cfg_.checkpoint_keep);
        if (current_epoch + 1 <= keep) return;
        for (std::uint64_t e = 0; e + keep <= current_epoch; ++e) {
            std::error_code ec;
            std::filesystem::remove(epoch_path(e), ec);
        }
    }

    static std::string format_double(double v) {
        std::ostringstream os;
        os << std::setprecision(17) << v;
        return os.str();
    }

    DatasetManifest manifest_;
    ModelConfig model_cfg_;
    TrainConfig train_cfg_;
    std::string out_dir_;
    DatasetCache cache_;
    std::unordered_map<std::string, CachedPair> typed_cache_;
    ParamStore<T> params_;
    Adam<T> adam_;
    std::vector<const ManifestEntry*> train_fold_;
    std::vector<const ManifestEntry*> val_fold_;
    std::uint64_t step_ = 0;
    double best_val_ = 0.0;
    bool has_best_ = false;
    bool resumed_ = false;
};

} // namespace pvdc
