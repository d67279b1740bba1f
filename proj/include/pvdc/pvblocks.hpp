#pragma once

#include "pvdc/params.hpp"
#include "pvdc/pointcloud.hpp"

namespace pvdc {

enum class Direction { Encode, Decode };

// One (channels, num_blocks, voxel_resolution) group of PVConv / PVDeConv
// blocks. Kernel size, stride 1 and padding (k-1)/2 keep the voxel grid
// resolution unchanged so devoxelization reads the same geometry that
// voxelization wrote.
struct PVBlockConfig {
    int channels = 0;
    int num_blocks = 1;
    int voxel_resolution = 0;
    int kernel_size = 3;
    double dropout_rate = 0.1;
    Direction direction = Direction::Encode;

    void validate() const {
        if (channels <= 0) throw ConfigError("pv block: channels must be > 0");
        if (num_blocks < 1) throw ConfigError("pv block: num_blocks must be >= 1");
        if (voxel_resolution < 2) throw ConfigError("pv block: voxel_resolution must be >= 2");
        if (kernel_size < 1 || kernel_size % 2 == 0)
            throw ConfigError("pv block: kernel_size must be odd and >= 1");
        if (dropout_rate < 0.0 || dropout_rate >= 1.0)
            throw ConfigError("pv block: dropout_rate must satisfy 0 <= rate < 1");
    }
};

namespace blockname {

inline std::string block(std::string_view scope, int index, std::string_view leaf) {
    return std::string(scope) + ".block" + std::to_string(index) + "." + std::string(leaf);
}

} // namespace blockname

namespace detail {

// linear -> batch_norm (per-point channels) -> relu
template <class T>
Tensor<T> shared_mlp_layer(const Tensor<T>& x, ParamStore<T>& params, const std::string& prefix,
                           Mode mode) {
    auto y = ops::linear_pointwise(x, params.get(prefix + ".weight"), params.get(prefix + ".bias"));
    y = ops::batch_norm(y, params.get(prefix + "_bn.gamma"), params.get(prefix + "_bn.beta"),
                        params.get(prefix + "_bn.running_mean"),
                        params.get(prefix + "_bn.running_var"), mode, 1);
    return ops::relu(y);
}

} // namespace detail

// PVConv: fine per-point MLP branch fused (by addition) with a coarse branch
// that voxelizes, convolves, normalizes, activates and devoxelizes back at
// the input coordinates. Coordinates pass through untouched; only features
// change. Runs cfg.num_blocks blocks, parameters named
// "{scope}.block{first_block_index + j}.*".
template <class T>
PointCloud<T> pvconv_block(const PointCloud<T>& cloud, const PVBlockConfig& cfg,
                           ParamStore<T>& params, std::string_view scope, int first_block_index,
                           Mode mode) {
    cfg.validate();
    if (cfg.direction != Direction::Encode)
        throw ContractError("pvconv_block: config direction must be encode");
    cloud.validate();
    if (!cloud.has_features()) throw ContractError("pvconv_block: cloud has no features");

    PointCloud<T> cur = cloud;
    for (int b = 0; b < cfg.num_blocks; ++b) {
        const int idx = first_block_index + b;
        const auto name = [&](std::string_view leaf) { return blockname::block(scope, idx, leaf); };

        // coarse: voxelize -> conv3d -> BN -> relu -> devoxelize
        auto grid = voxelize(cur, cfg.voxel_resolution);
        auto gridv = ops::conv3d(grid.values, params.get(name("conv.weight")),
                                 params.get(name("conv.bias")), 1,
                                 std::size_t(cfg.kernel_size - 1) / 2);
        gridv = ops::batch_norm(gridv, params.get(name("conv_bn.gamma")),
                                params.get(name("conv_bn.beta")),
                                params.get(name("conv_bn.running_mean")),
                                params.get(name("conv_bn.running_var")), mode, 0);
        gridv = ops::relu(gridv);
        VoxelGrid<T> conv_grid{cfg.voxel_resolution, std::size_t(cfg.channels), gridv,
                               grid.occupancy};
        auto coarse = devoxelize(conv_grid, cur.coords);

        // fine: shared MLP
        auto fine = detail::shared_mlp_layer(cur.features, params, name("fine"), mode);

        PointCloud<T> next;
        next.coords = cur.coords;
        next.features = ops::add(coarse, fine);
        cur = std::move(next);
    }
    return cur;
}

// PVDeConv: decoder counterpart. Coarse branch applies a transposed 3D
// convolution to the voxelized features, then dropout, batch norm and the
// activation, in that order; fine branch is the shared transposed MLP, so
// the point count never changes. Fusion by addition.
template <class T>
PointCloud<T> pvdeconv_block(const PointCloud<T>& cloud, const PVBlockConfig& cfg,
                             ParamStore<T>& params, std::string_view scope, int first_block_index,
                             Mode mode, std::uint64_t seed) {
    cfg.validate();
    if (cfg.direction != Direction::Decode)
        throw ContractError("pvdeconv_block: config direction must be decode");
    cloud.validate();
    if (!cloud.has_features()) throw ContractError("pvdeconv_block: cloud has no features");

    PointCloud<T> cur = cloud;
    for (int b = 0; b < cfg.num_blocks; ++b) {
        const int idx = first_block_index + b;
        const auto name = [&](std::string_view leaf) { return blockname::block(scope, idx, leaf); };

        // coarse: voxelize -> deconv3d -> dropout -> BN -> relu -> devoxelize
        auto grid = voxelize(cur, cfg.voxel_resolution);
        auto gridv = ops::deconv3d(grid.values, params.get(name("deconv.weight")),
                                   params.get(name("deconv.bias")), 1,
                                   std::size_t(cfg.kernel_size - 1) / 2);
        gridv = ops::dropout(gridv, cfg.dropout_rate, mode, derive_seed(seed, std::uint64_t(idx)));
        gridv = ops::batch_norm(gridv, params.get(name("deconv_bn.gamma")),
                                params.get(name("deconv_bn.beta")),
                                params.get(name("deconv_bn.running_mean")),
                                params.get(name("deconv_bn.running_var")), mode, 0);
        gridv = ops::relu(gridv);
        VoxelGrid<T> deconv_grid{cfg.voxel_resolution, std::size_t(cfg.channels), gridv,
                                 grid.occupancy};
        auto coarse = devoxelize(deconv_grid, cur.coords);

        auto fine = detail::shared_mlp_layer(cur.features, params, name("fine"), mode);

        PointCloud<T> next;
        next.coords = cur.coords;
        next.features = ops::add(coarse, fine);
        cur = std::move(next);
    }
    return cur;
}

// Parameter creation for one block group; insertion order defines the
// deterministic init and checkpoint order.
template <class T>
void init_block_params(ParamStore<T>& params, const PVBlockConfig& cfg, std::string_view scope,
                       int first_block_index, int in_channels, std::uint64_t seed,
                       std::size_t& param_counter) {
    const std::size_t k = std::size_t(cfg.kernel_size);
    const std::size_t kvol = k * k * k;
    int cin = in_channels;
    for (int b = 0; b < cfg.num_blocks; ++b) {
        const int idx = first_block_index + b;
        const std::size_t ci = std::size_t(cin), co = std::size_t(cfg.channels);
        const auto name = [&](std::string_view leaf) { return blockname::block(scope, idx, leaf); };
        const auto next_seed = [&] { return derive_seed(seed, param_counter++); };

        if (cfg.direction == Direction::Encode)
            params.add(name("conv.weight"), init::xavier_uniform<T>({co, ci, k, k, k}, ci * kvol,
                                                                    co * kvol, next_seed()));
        else
            params.add(name("deconv.weight"), init::xavier_uniform<T>({ci, co, k, k, k}, ci * kvol,
                                                                      co * kvol, next_seed()));
        const std::string conv = cfg.direction == Direction::Encode ? "conv" : "deconv";
        params.add(name(conv + ".bias"), init::zeros<T>({co}));
        params.add(name(conv + "_bn.gamma"), init::ones<T>({co}));
        params.add(name(conv + "_bn.beta"), init::zeros<T>({co}));
        params.add(name(conv + "_bn.running_mean"), init::zeros<T>({co}, false));
        params.add(name(conv + "_bn.running_var"), init::ones<T>({co}, false));

        params.add(name("fine.weight"), init::xavier_uniform<T>({ci, co}, ci, co, next_seed()));
        params.add(name("fine.bias"), init::zeros<T>({co}));
        params.add(name("fine_bn.gamma"), init::ones<T>({co}));
        params.add(name("fine_bn.beta"), init::zeros<T>({co}));
        params.add(name("fine_bn.running_mean"), init::zeros<T>({co}, false));
        params.add(name("fine_bn.running_var"), init::ones<T>({co}, false));

        cin = cfg.channels;
    }
}

// MLP layer parameters (linear + BN)
template <class T>
void init_mlp_params(ParamStore<T>& params, const std::string& prefix, int in_channels,
                     int out_channels, std::uint64_t seed, std::size_t& param_counter) {
    const std::size_t ci = std::size_t(in_channels), co = std::size_t(out_channels);
    params.add(prefix + ".weight",
               init::xavier_uniform<T>({ci, co}, ci, co, derive_seed(seed, param_counter++)));
    params.add(prefix + ".bias", init::zeros<T>({co}));
    params.add(prefix + "_bn.gamma", init::ones<T>({co}));
    params.add(prefix + "_bn.beta", init::zeros<T>({co}));
    params.add(prefix + "_bn.running_mean", init::zeros<T>({co}, false));
    params.add(prefix + "_bn.running_var", init::ones<T>({co}, false));
}

} // namespace pvdc
