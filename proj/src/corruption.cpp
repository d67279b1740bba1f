#include "pvdc/corruption.hpp"

#include <set>

#include "pvdc/rng.hpp"

namespace pvdc {

PointCloud<double> add_gaussian_noise(const PointCloud<double>& cloud, double sigma,
                                      std::uint64_t seed) {
    if (sigma < 0) throw ConfigError("add_gaussian_noise: sigma must be >= 0");
    cloud.validate();
    PointCloud<double> out = cloud;
    if (sigma == 0) return out;
    Rng rng(seed);
    for (auto& c : out.coords) c += sigma * rng.normal();
    return out;
}

PointCloud<double> punch_holes_at(const PointCloud<double>& cloud,
                                  const std::vector<std::size_t>& center_indices, double radius,
                                  std::uint64_t seed) {
    cloud.validate();
    const std::size_t n = cloud.size();
    if (center_indices.empty()) return cloud;

    const double r2 = radius * radius;
    std::vector<bool> removed(n, false);
    for (std::size_t ci : center_indices) {
        if (ci >= n) throw ContractError("punch_holes: center index out of range");
        const double* c = cloud.point(ci);
        for (std::size_t i = 0; i < n; ++i) {
            const double dx = cloud.coords[i * 3] - c[0];
            const double dy = cloud.coords[i * 3 + 1] - c[1];
            const double dz = cloud.coords[i * 3 + 2] - c[2];
            if (dx * dx + dy * dy + dz * dz <= r2) removed[i] = true;
        }
    }

    std::vector<std::size_t> survivors;
    for (std::size_t i = 0; i < n; ++i)
        if (!removed[i]) survivors.push_back(i);
    if (survivors.empty())
        throw ContractError("punch_holes: all points removed (corruption spec too aggressive)");

    PointCloud<double> out;
    out.coords.reserve(n * 3);
    for (std::size_t i : survivors)
        for (int a = 0; a < 3; ++a) out.coords.push_back(cloud.coords[i * 3 + a]);

    // refill to n: duplicate random survivors with a little jitter
    Rng rng(seed);
    const double jitter = radius / 10.0;
    while (out.coords.size() < n * 3) {
        const std::size_t pick = survivors[std::size_t(rng.below(survivors.size()))];
        for (int a = 0; a < 3; ++a)
            out.coords.push_back(cloud.coords[pick * 3 + a] + jitter * rng.normal());
    }
    return out;
}

PointCloud<double> punch_holes(const PointCloud<double>& cloud, int count, double radius,
                               std::uint64_t seed) {
    if (count < 0) throw ConfigError("punch_holes: count must be >= 0");
    cloud.validate();
    if (count == 0) return cloud;
    Rng rng(derive_seed(seed, 1));
    std::vector<std::size_t> centers;
    for (int i = 0; i < count; ++i) centers.push_back(std::size_t(rng.below(cloud.size())));
    return punch_holes_at(cloud, centers, radius, derive_seed(seed, 2));
}

TriangleMesh smooth_mesh(const TriangleMesh& mesh, double lambda, int iterations) {
    if (!(lambda > 0) || lambda > 1)
        throw ConfigError("smooth_mesh: lambda must satisfy 0 < lambda <= 1");
    if (iterations < 0) throw ConfigError("smooth_mesh: iterations must be >= 0");

    TriangleMesh out = mesh;
    if (iterations == 0) return out;

    // 1-ring adjacency from unique edges
    std::vector<std::set<std::uint32_t>> ring(mesh.vertices.size());
    for (const auto& f : mesh.faces)
        for (int e = 0; e < 3; ++e) {
            const std::uint32_t a = f[std::size_t(e)], b = f[std::size_t((e + 1) % 3)];
            if (a == b) continue;
            ring[a].insert(b);
            ring[b].insert(a);
        }

    for (int it = 0; it < iterations; ++it) {
        std::vector<std::array<double, 3>> next = out.vertices;
        for (std::size_t v = 0; v < out.vertices.size(); ++v) {
            if (ring[v].empty()) continue;
            std::array<double, 3> mean{0, 0, 0};
            for (std::uint32_t nb : ring[v])
                for (int a = 0; a < 3; ++a) mean[a] += out.vertices[nb][a];
            for (int a = 0; a < 3; ++a) {
                mean[a] /= double(ring[v].size());
                next[v][a] = out.vertices[v][a] + lambda * (mean[a] - out.vertices[v][a]);
            }
        }
        out.vertices = std::move(next);
    }
    out.update_areas();
    return out;
}

PointCloud<double> corrupt_cloud(const PointCloud<double>& cloud, const CorruptionSpec& spec,
                                 std::uint64_t seed) {
    spec.validate();
    PointCloud<double> out = add_gaussian_noise(cloud, spec.gaussian_sigma, derive_seed(seed, 11));
    if (spec.hole_count > 0)
        out = punch_holes(out, spec.hole_count, spec.hole_radius, derive_seed(seed, 12));
    return out;
}

} // namespace pvdc
