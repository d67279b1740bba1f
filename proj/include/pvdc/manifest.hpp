#pragma once

#include <array>

#include "pvdc/corruption.hpp"

namespace pvdc {

struct ManifestEntry {
    std::string id;
    std::string path;        // mesh (.obj/.ply/.stl) or point cloud (.pvpc)
    std::string split;       // train | val | test | "" (unassigned)
    std::uint64_t seed = 0;  // per-sample randomness root
    CorruptionSpec corruption;
};

// Line-delimited dataset description. Versioned header, then one
// tab-separated record per entry:
//   id  path  split  seed  sigma  holes  hole_radius  smooth_lambda  smooth_iters
struct DatasetManifest {
    static constexpr int kVersion = 1;
    std::vector<ManifestEntry> entries;

    std::vector<const ManifestEntry*> fold(const std::string& split) const {
        std::vector<const ManifestEntry*> out;
        for (const auto& e : entries)
            if (e.split == split) out.push_back(&e);
        return out;
    }

    void save(const std::string& path) const;
    static DatasetManifest load(const std::string& path);
};

// Deterministic shuffle by seed, then contiguous assignment into
// (train, val, test) folds; the folds partition the entries by construction.
DatasetManifest split_dataset(std::vector<ManifestEntry> entries,
                              const std::array<double, 3>& proportions, std::uint64_t seed);

} // namespace pvdc
