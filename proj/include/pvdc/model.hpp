#pragma once

#include "pvdc/chamfer.hpp"
#include "pvdc/pvblocks.hpp"

namespace pvdc {

struct StageSpec {
    int channels = 0;
    int num_blocks = 1;
    int resolution = 0;
};

// Architecture description. Coarse stages are (channels, num_blocks,
// voxel_resolution) triplets; the trailing width is the global feature size
// on the encoder side and the post-stage pointwise width on the decoder
// side. The embedding presented to the decoder concatenates the max-pooled
// global vector with the first encoder stage's per-point features and every
// cloud-MLP layer output.
struct ModelConfig {
    std::vector<StageSpec> encoder_coarse;
    int encoder_width = 1024;
    std::vector<int> encoder_cloud_mlp;
    std::vector<StageSpec> decoder_coarse;
    int decoder_width = 128;
    std::vector<int> decoder_fine_mlp;
    std::size_t n_points = 10000;
    int kernel_size = 3;
    double dropout_rate = 0.1;

    int per_point_dim() const {
        int d = encoder_coarse.empty() ? 0 : encoder_coarse.front().channels;
        for (int c : encoder_cloud_mlp) d += c;
        return d;
    }

    int embedding_dim() const { return encoder_width + per_point_dim(); }

    void validate() const {
        if (encoder_coarse.empty() || decoder_coarse.empty())
            throw ConfigError("model config: encoder/decoder stages must be non-empty");
        if (encoder_width <= 0 || decoder_width <= 0)
            throw ConfigError("model config: widths must be > 0");
        if (n_points == 0) throw ConfigError("model config: n_points must be > 0");
        for (const auto& s : encoder_coarse)
            if (s.channels <= 0 || s.num_blocks < 1 || s.resolution < 2)
                throw ConfigError("model config: bad encoder stage triplet");
        for (const auto& s : decoder_coarse)
            if (s.channels <= 0 || s.num_blocks < 1 || s.resolution < 2)
                throw ConfigError("model config: bad decoder stage triplet");
    }

    // paper-scale architecture: embedding 1024 + 64 + 256 + 128 = 1472
    static ModelConfig cc3d_default(std::size_t n_points = 10000) {
        ModelConfig c;
        c.encoder_coarse = {{64, 1, 32}, {64, 2, 16}, {128, 1, 16}};
        c.encoder_width = 1024;
        c.encoder_cloud_mlp = {256, 128};
        c.decoder_coarse = {{128, 1, 16}, {64, 2, 16}, {64, 1, 32}};
        c.decoder_width = 128;
        c.decoder_fine_mlp = {256, 128};
        c.n_points = n_points;
        return c;
    }

    // desk-scale test architecture: same stage pattern, channels (8,8,16),
    // grids r in {4,8}
    static ModelConfig toy(std::size_t n_points = 512) {
        ModelConfig c;
        c.encoder_coarse = {{8, 1, 8}, {8, 2, 4}, {16, 1, 4}};
        c.encoder_width = 64;
        c.encoder_cloud_mlp = {16, 8};
        c.decoder_coarse = {{16, 1, 4}, {8, 2, 4}, {8, 1, 8}};
        c.decoder_width = 16;
        c.decoder_fine_mlp = {16, 8};
        c.n_points = n_points;
        return c;
    }

    // smallest useful configuration, for determinism/resume tests
    static ModelConfig micro(std::size_t n_points = 64) {
        ModelConfig c;
        c.encoder_coarse = {{4, 1, 4}, {8, 1, 4}};
        c.encoder_width = 16;
        c.encoder_cloud_mlp = {8};
        c.decoder_coarse = {{8, 1, 4}, {4, 1, 4}};
        c.decoder_width = 8;
        c.decoder_fine_mlp = {8};
        c.n_points = n_points;
        return c;
    }
};

// Encoder output: a pooled global vector plus per-point features whose
// channel count completes embedding_dim.
template <class T>
struct Embedding {
    Tensor<T> global;    // [encoder_width]
    Tensor<T> per_point; // [n, per_point_dim]
};

// Deterministic parameter initialization: Glorot-uniform kernels, zero
// biases and BN betas, unit BN gammas. Identical seeds give bit-identical
// parameters.
template <class T>
ParamStore<T> init_params(const ModelConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    ParamStore<T> params;
    std::size_t counter = 0;

    int cin = 3;
    int block_index = 0;
    for (const auto& stage : cfg.encoder_coarse) {
        PVBlockConfig bc{stage.channels, stage.num_blocks, stage.resolution, cfg.kernel_size,
                         0.0, Direction::Encode};
        init_block_params(params, bc, "enc", block_index, cin, seed, counter);
        block_index += stage.num_blocks;
        cin = stage.channels;
    }
    init_mlp_params<T>(params, "enc.widen", cin, cfg.encoder_width, seed, counter);
    int mlp_in = cin;
    for (std::size_t i = 0; i < cfg.encoder_cloud_mlp.size(); ++i) {
        init_mlp_params<T>(params, "enc.mlp" + std::to_string(i), mlp_in,
                           cfg.encoder_cloud_mlp[i], seed, counter);
        mlp_in = cfg.encoder_cloud_mlp[i];
    }

    cin = cfg.embedding_dim();
    block_index = 0;
    for (const auto& stage : cfg.decoder_coarse) {
        PVBlockConfig bc{stage.channels, stage.num_blocks, stage.resolution, cfg.kernel_size,
                         cfg.dropout_rate, Direction::Decode};
        init_block_params(params, bc, "dec", block_index, cin, seed, counter);
        block_index += stage.num_blocks;
        cin = stage.channels;
    }
    init_mlp_params<T>(params, "dec.widen", cin, cfg.decoder_width, seed, counter);
    mlp_in = cfg.decoder_width;
    for (std::size_t i = 0; i < cfg.decoder_fine_mlp.size(); ++i) {
        init_mlp_params<T>(params, "dec.mlp" + std::to_string(i), mlp_in,
                           cfg.decoder_fine_mlp[i], seed, counter);
        mlp_in = cfg.decoder_fine_mlp[i];
    }
    params.add("dec.head.weight",
               init::xavier_uniform<T>({std::size_t(mlp_in), 3}, std::size_t(mlp_in), 3,
                                       derive_seed(seed, counter++)));
    params.add("dec.head.bias", init::zeros<T>({3}));
    return params;
}

// Input features are the xyz coordinates themselves. Runs the coarse PVConv
// stages, max-pools the last stage through the widening pointwise layer into
// the global vector, and feeds the cloud MLP from the last stage's per-point
// features.
template <class T>
Embedding<T> encode(const PointCloud<T>& cloud, const ModelConfig& cfg, ParamStore<T>& params,
                    Mode mode) {
    cfg.validate();
    if (cloud.size() != cfg.n_points)
        throw ContractError("encode: cloud has " + std::to_string(cloud.size()) +
                            " points but the config expects " + std::to_string(cfg.n_points));

    PointCloud<T> cur;
    cur.coords = cloud.coords;
    cur.features = Tensor<T>::from_data({cloud.size(), 3}, cloud.coords);

    Tensor<T> first_stage;
    int block_index = 0;
    for (std::size_t s = 0; s < cfg.encoder_coarse.size(); ++s) {
        const auto& stage = cfg.encoder_coarse[s];
        PVBlockConfig bc{stage.channels, stage.num_blocks, stage.resolution, cfg.kernel_size,
                         0.0, Direction::Encode};
        cur = pvconv_block(cur, bc, params, "enc", block_index, mode);
        block_index += stage.num_blocks;
        if (s == 0) first_stage = cur.features;
    }

    auto widened = detail::shared_mlp_layer(cur.features, params, "enc.widen", mode);
    Embedding<T> emb;
    emb.global = ops::col_max(widened);

    std::vector<Tensor<T>> pieces{first_stage};
    Tensor<T> mlp = cur.features;
    for (std::size_t i = 0; i < cfg.encoder_cloud_mlp.size(); ++i) {
        mlp = detail::shared_mlp_layer(mlp, params, "enc.mlp" + std::to_string(i), mode);
        pieces.push_back(mlp);
    }
    emb.per_point = ops::concat_cols(pieces);
    return emb;
}

// Per-point decoder input is the broadcast global vector concatenated with
// the per-point embedding; PVDeConv stages run at the anchor coordinates
// (the encoder input's coordinates), and the head predicts absolute output
// coordinates.
template <class T>
Tensor<T> decode(const Embedding<T>& emb, const std::vector<T>& anchor_coords,
                 const ModelConfig& cfg, ParamStore<T>& params, Mode mode,
                 std::uint64_t seed = 0) {
    cfg.validate();
    const std::size_t n = anchor_coords.size() / 3;
    if (n != emb.per_point.dim(0))
        throw ContractError("decode: anchor count " + std::to_string(n) +
                            " does not match embedding rows " +
                            std::to_string(emb.per_point.dim(0)));

    PointCloud<T> cur;
    cur.coords = anchor_coords;
    cur.features = ops::concat_cols<T>({ops::row_broadcast(emb.global, n), emb.per_point});

    int block_index = 0;
    for (const auto& stage : cfg.decoder_coarse) {
        PVBlockConfig bc{stage.channels, stage.num_blocks, stage.resolution, cfg.kernel_size,
                         cfg.dropout_rate, Direction::Decode};
        cur = pvdeconv_block(cur, bc, params, "dec", block_index, mode,
                             derive_seed(seed, std::uint64_t(block_index) + 0x7000));
        block_index += stage.num_blocks;
    }

    auto feats = detail::shared_mlp_layer(cur.features, params, "dec.widen", mode);
    for (std::size_t i = 0; i < cfg.decoder_fine_mlp.size(); ++i)
        feats = detail::shared_mlp_layer(feats, params, "dec.mlp" + std::to_string(i), mode);
    return ops::linear_pointwise(feats, params.get("dec.head.weight"), params.get("dec.head.bias"));
}

// encode -> decode at the input's own coordinates; returns the predicted
// [n, 3] coordinates
template <class T>
Tensor<T> autoencode(const PointCloud<T>& cloud, const ModelConfig& cfg, ParamStore<T>& params,
                     Mode mode, std::uint64_t seed = 0) {
    auto emb = encode(cloud, cfg, params, mode);
    return decode(emb, cloud.coords, cfg, params, mode, seed);
}

template <class T>
PointCloud<T> cloud_from_prediction(const Tensor<T>& pred) {
    if (pred.rank() != 2 || pred.dim(1) != 3)
        throw ShapeError("cloud_from_prediction: tensor must be [n, 3]");
    PointCloud<T> out;
    out.coords.assign(pred.data().begin(), pred.data().end());
    return out;
}

} // namespace pvdc
