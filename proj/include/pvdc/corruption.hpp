#pragma once

#include "pvdc/mesh.hpp"

namespace pvdc {

// Virtual-scan corruption recipe; stands in for real scanner artifacts
// (noise, missing patches, smoothed-away edges). All fields are in
// normalized unit-cube units. The mesh-level smoothing runs before surface
// sampling; noise and holes apply to the sampled cloud.
struct CorruptionSpec {
    double gaussian_sigma = 0.03; // per-axis sigma as a fraction of unit scale
    int hole_count = 0;
    double hole_radius = 0.05;
    double smoothing_lambda = 0.0; // Laplacian step weight, mesh-level
    int smoothing_iterations = 0;

    void validate() const {
        if (gaussian_sigma < 0) throw ConfigError("corruption: sigma must be >= 0");
        if (hole_count < 0) throw ConfigError("corruption: hole_count must be >= 0");
        if (hole_radius < 0 || hole_radius >= 0.5)
            throw ConfigError("corruption: hole_radius must satisfy 0 <= r < 0.5");
        if (smoothing_lambda < 0 || smoothing_lambda > 1)
            throw ConfigError("corruption: smoothing_lambda must satisfy 0 <= l <= 1");
        if (smoothing_iterations < 0)
            throw ConfigError("corruption: smoothing_iterations must be >= 0");
    }

    bool is_identity() const {
        return gaussian_sigma == 0 && hole_count == 0 &&
               (smoothing_lambda == 0 || smoothing_iterations == 0);
    }
};

// Independent N(0, sigma^2) offset per coordinate. The result is not
// re-normalized: points may leave [0,1] slightly, which voxelize clamps.
PointCloud<double> add_gaussian_noise(const PointCloud<double>& cloud, double sigma,
                                      std::uint64_t seed);

// Removes every point within `radius` of the given hole centers, then
// refills to the original count by resampling survivors with jitter
// sigma = radius/10 (exact duplicates would create Chamfer ties).
PointCloud<double> punch_holes_at(const PointCloud<double>& cloud,
                                  const std::vector<std::size_t>& center_indices, double radius,
                                  std::uint64_t seed);

// `count` hole centers chosen uniformly from the cloud's own points.
PointCloud<double> punch_holes(const PointCloud<double>& cloud, int count, double radius,
                               std::uint64_t seed);

// Iterative Laplacian smoothing: each vertex moves toward the mean of its
// 1-ring neighbors by factor lambda, all vertices updated simultaneously.
// Connectivity is unchanged; isolated vertices stay put.
TriangleMesh smooth_mesh(const TriangleMesh& mesh, double lambda, int iterations);

// cloud-level part of the recipe: noise then holes
PointCloud<double> corrupt_cloud(const PointCloud<double>& cloud, const CorruptionSpec& spec,
                                 std::uint64_t seed);

} // namespace pvdc
