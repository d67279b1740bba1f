#pragma once

#include <array>
#include <cstdint>

#include "pvdc/ops.hpp"

namespace pvdc {

// Ordered set of 3D points in the unit cube, with optional per-point feature
// channels carried as a differentiable [n, C] tensor.
template <class T>
struct PointCloud {
    std::vector<T> coords; // n*3 row-major
    Tensor<T> features;    // optional

    std::size_t size() const { return coords.size() / 3; }
    bool has_features() const { return features.defined(); }
    std::size_t feature_channels() const { return has_features() ? features.dim(1) : 0; }

    const T* point(std::size_t i) const { return coords.data() + i * 3; }

    void validate() const {
        if (size() == 0) throw ContractError("point cloud: empty (n must be > 0)");
        for (T v : coords)
            if (!std::isfinite(double(v))) throw ContractError("point cloud: non-finite coordinate");
        if (has_features() && features.dim(0) != size())
            throw ShapeError("point cloud: features axis 0 (=" + std::to_string(features.dim(0)) +
                             ") does not match point count " + std::to_string(size()));
    }
};

template <class T, class U>
PointCloud<T> convert_cloud(const PointCloud<U>& c) {
    PointCloud<T> out;
    out.coords.assign(c.coords.begin(), c.coords.end());
    if (c.has_features()) {
        std::vector<T> f(c.features.data().begin(), c.features.data().end());
        out.features = Tensor<T>::from_data(c.features.shape(), std::move(f));
    }
    return out;
}

// r x r x r feature grid over the unit cube. Cells that receive no points
// stay exactly zero in every channel; occupancy records per-cell point
// counts so the mean-aggregation mass identity stays testable.
template <class T>
struct VoxelGrid {
    int resolution = 0;
    std::size_t channels = 0;
    Tensor<T> values; // [C, r, r, r]
    std::vector<std::int32_t> occupancy;
};

namespace detail {

template <class T>
std::size_t voxel_cell(const T* p, int r) {
    std::size_t idx[3];
    for (int a = 0; a < 3; ++a) {
        std::ptrdiff_t i = std::ptrdiff_t(std::floor(double(p[a]) * r));
        i = std::min<std::ptrdiff_t>(std::max<std::ptrdiff_t>(i, 0), r - 1);
        idx[a] = std::size_t(i);
    }
    return (idx[2] * std::size_t(r) + idx[1]) * std::size_t(r) + idx[0];
}

} // namespace detail

// Mean-scatter of point features into the grid: each point lands in cell
// (floor(x*r) clamped, ...), each occupied cell holds the mean of its
// points' features. Differentiable w.r.t. the features.
template <class T>
VoxelGrid<T> voxelize(const PointCloud<T>& cloud, int r) {
    if (r < 2) throw ConfigError("voxelize: resolution must be >= 2, got " + std::to_string(r));
    cloud.validate();
    if (!cloud.has_features() || cloud.feature_channels() == 0)
        throw ContractError("voxelize: cloud has no feature channels");

    const std::size_t n = cloud.size();
    const std::size_t c = cloud.feature_channels();
    const std::size_t vol = std::size_t(r) * r * r;

    std::vector<std::size_t> cell(n);
    std::vector<std::int32_t> occupancy(vol, 0);
    for (std::size_t i = 0; i < n; ++i) {
        cell[i] = detail::voxel_cell(cloud.point(i), r);
        ++occupancy[cell[i]];
    }

    std::vector<T> values(c * vol, T(0));
    const T* f = cloud.features.data().data();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t ch = 0; ch < c; ++ch) values[ch * vol + cell[i]] += f[i * c + ch];
    for (std::size_t ch = 0; ch < c; ++ch)
        for (std::size_t v = 0; v < vol; ++v)
            if (occupancy[v] > 1) values[ch * vol + v] /= T(occupancy[v]);

    auto pf = cloud.features.node();
    VoxelGrid<T> grid;
    grid.resolution = r;
    grid.channels = c;
    grid.occupancy = occupancy;
    grid.values = pvdc::detail::make_op<T>(
        {c, std::size_t(r), std::size_t(r), std::size_t(r)}, std::move(values), {pf},
        [pf, cell = std::move(cell), occ = grid.occupancy, c, vol, n](TensorNode<T>& o) {
            if (!pf->requires_grad) return;
            pf->ensure_grad();
            const T* g = o.grad.data();
            for (std::size_t i = 0; i < n; ++i) {
                const T w = T(1) / T(occ[cell[i]]);
                for (std::size_t ch = 0; ch < c; ++ch)
                    pf->grad[i * c + ch] += g[ch * vol + cell[i]] * w;
            }
        });
    return grid;
}

// Trilinear interpolation of the 8 surrounding cell-center values at each
// query point (cell i centered at (i+0.5)/r, clamped at the boundary).
// Differentiable w.r.t. the grid values; query coordinates are fixed.
template <class T>
Tensor<T> devoxelize(const VoxelGrid<T>& grid, const std::vector<T>& coords) {
    if (coords.size() % 3 != 0) throw ShapeError("devoxelize: coords must be n*3 scalars");
    const std::size_t n = coords.size() / 3;
    if (n == 0) throw ContractError("devoxelize: no query points");
    const std::size_t c = grid.channels;
    const std::size_t r = std::size_t(grid.resolution);

    std::vector<T> out(n * c);
    kern::par::devox_fwd(grid.values.data().data(), c, r, coords.data(), n, out.data());

    auto pg = grid.values.node();
    return pvdc::detail::make_op<T>(
        {n, c}, std::move(out), {pg}, [pg, coords, n, c, r](TensorNode<T>& o) {
            if (!pg->requires_grad) return;
            pg->ensure_grad();
            const std::size_t vol = r * r * r;
            const T* g = o.grad.data();
            for (std::size_t pt = 0; pt < n; ++pt) {
                const T* p = coords.data() + pt * 3;
                std::size_t i0[3], i1[3];
                T w1[3];
                for (int a = 0; a < 3; ++a) {
                    const T u = p[a] * T(r) - T(0.5);
                    const T f = std::floor(u);
                    const std::ptrdiff_t base = std::ptrdiff_t(f);
                    const std::ptrdiff_t rmax = std::ptrdiff_t(r) - 1;
                    i0[a] = std::size_t(std::min(std::max(base, std::ptrdiff_t(0)), rmax));
                    i1[a] = std::size_t(std::min(std::max(base + 1, std::ptrdiff_t(0)), rmax));
                    w1[a] = u - f;
                }
                for (int corner = 0; corner < 8; ++corner) {
                    const int cz = (corner >> 2) & 1, cy = (corner >> 1) & 1, cx = corner & 1;
                    const T wz = cz ? w1[2] : T(1) - w1[2];
                    const T wy = cy ? w1[1] : T(1) - w1[1];
                    const T wx = cx ? w1[0] : T(1) - w1[0];
                    const T w = wz * wy * wx;
                    const std::size_t z = cz ? i1[2] : i0[2];
                    const std::size_t y = cy ? i1[1] : i0[1];
                    const std::size_t x = cx ? i1[0] : i0[0];
                    const std::size_t cellidx = (z * r + y) * r + x;
                    for (std::size_t ch = 0; ch < c; ++ch)
                        pg->grad[ch * vol + cellidx] += g[pt * c + ch] * w;
                }
            }
        });
}

} // namespace pvdc
