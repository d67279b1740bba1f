#pragma once

#include <memory>
#include <unordered_map>

#include "pvdc/manifest.hpp"
#include "pvdc/pointcloud_io.hpp"

namespace pvdc {

// Aligned (corrupted input, ground truth) cloud pair; the training unit.
struct PairSample {
    std::string id;
    PointCloud<double> input;
    PointCloud<double> target;
};

// Builds the pair for one manifest entry. Mesh sources run the scan
// emulation pipeline: normalize, sample the clean surface for the ground
// truth, then smooth -> sample -> noise -> holes for the input. Cloud
// sources (.pvpc) take the stored cloud as ground truth and corrupt a copy.
// Deterministic: every random stage derives its seed from entry.seed.
inline PairSample make_pair_sample(const ManifestEntry& entry, std::size_t n_points) {
    entry.corruption.validate();
    PairSample pair;
    pair.id = entry.id;

    const bool is_cloud = entry.path.size() > 5 &&
                          entry.path.compare(entry.path.size() - 5, 5, ".pvpc") == 0;
    if (is_cloud) {
        pair.target = load_pvpc(entry.path);
        if (pair.target.size() != n_points)
            throw ContractError("dataset: cloud " + entry.path + " has " +
                                std::to_string(pair.target.size()) + " points, expected " +
                                std::to_string(n_points));
        pair.input = corrupt_cloud(pair.target, entry.corruption, derive_seed(entry.seed, 23));
        return pair;
    }

    const auto [mesh, transform] = normalize(load_mesh(entry.path));
    (void)transform;
    pair.target = sample_uniform(mesh, n_points, derive_seed(entry.seed, 21));

    const bool smoothed =
        entry.corruption.smoothing_lambda > 0 && entry.corruption.smoothing_iterations > 0;
    const TriangleMesh scan_mesh =
        smoothed ? smooth_mesh(mesh, entry.corruption.smoothing_lambda,
                               entry.corruption.smoothing_iterations)
                 : mesh;
    auto input = sample_uniform(scan_mesh, n_points, derive_seed(entry.seed, 22));
    pair.input = corrupt_cloud(input, entry.corruption, derive_seed(entry.seed, 23));
    return pair;
}

// In-memory cache keyed by entry id; pairs are static given the manifest, so
// each is built once.
class DatasetCache {
public:
    explicit DatasetCache(std::size_t n_points) : n_points_(n_points) {}

    const PairSample& get(const ManifestEntry& entry) {
        auto it = cache_.find(entry.id);
        if (it != cache_.end()) return *it->second;
        auto pair = std::make_shared<PairSample>(make_pair_sample(entry, n_points_));
        auto [pos, inserted] = cache_.emplace(entry.id, std::move(pair));
        return *pos->second;
    }

private:
    std::size_t n_points_;
    std::unordered_map<std::string, std::shared_ptr<PairSample>> cache_;
};

} // namespace pvdc
