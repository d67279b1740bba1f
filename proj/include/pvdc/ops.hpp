#pragma once

#include <cstring>
#include <string>

#include "pvdc/kernels.hpp"
#include "pvdc/rng.hpp"
#include "pvdc/tensor.hpp"

// Differentiable operations. Exactly the set the architecture needs; each op
// validates shapes, computes the forward value through the kernels, and
// registers a backward rule that *accumulates* into parent gradients.

namespace pvdc::ops {

namespace detail {

template <class T>
void require_rank(const Tensor<T>& t, std::size_t rank, const char* what) {
    if (t.rank() != rank)
        throw ShapeError(std::string(what) + ": expected rank " + std::to_string(rank) +
                         ", got shape " + shape_str(t.shape()));
}

template <class T>
void accumulate(TensorNode<T>& dst, const std::vector<T>& src) {
    dst.ensure_grad();
    for (std::size_t i = 0; i < src.size(); ++i) dst.grad[i] += src[i];
}

} // namespace detail

// out[n,j] = sum_i x[n,i] * weight[i,j] + bias[j]
template <class T>
Tensor<T> linear_pointwise(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias) {
    detail::require_rank(x, 2, "linear_pointwise: x");
    detail::require_rank(weight, 2, "linear_pointwise: weight");
    detail::require_rank(bias, 1, "linear_pointwise: bias");
    const std::size_t n = x.dim(0), cin = x.dim(1), cout = weight.dim(1);
    if (n < 1) throw ShapeError("linear_pointwise: x axis 0 (rows) must be >= 1");
    if (weight.dim(0) != cin)
        throw ShapeError("linear_pointwise: weight axis 0 (=" + std::to_string(weight.dim(0)) +
                         ") does not match x axis 1 (=" + std::to_string(cin) + ")");
    if (bias.dim(0) != cout)
        throw ShapeError("linear_pointwise: bias axis 0 (=" + std::to_string(bias.dim(0)) +
                         ") does not match weight axis 1 (=" + std::to_string(cout) + ")");

    std::vector<T> out(n * cout);
    kern::par::matmul_bias(x.data().data(), n, cin, weight.data().data(), cout,
                           bias.data().data(), out.data());

    auto px = x.node(), pw = weight.node(), pb = bias.node();
    return pvdc::detail::make_op<T>(
        {n, cout}, std::move(out), {px, pw, pb}, [px, pw, pb, n, cin, cout](TensorNode<T>& o) {
            const T* g = o.grad.data();
            if (px->requires_grad) {
                px->ensure_grad();
                kern::par::matmul_grad_x(g, n, cout, pw->value.data(), cin, px->grad.data());
            }
            if (pw->requires_grad) {
                pw->ensure_grad();
                kern::par::matmul_grad_w(px->value.data(), g, n, cin, cout, pw->grad.data());
            }
            if (pb->requires_grad) {
                pb->ensure_grad();
                kern::par::colsum(g, n, cout, pb->grad.data());
            }
        });
}

namespace detail {

template <class T>
void check_cubic(const Tensor<T>& t, const char* what) {
    if (t.dim(1) != t.dim(2) || t.dim(2) != t.dim(3))
        throw ShapeError(std::string(what) + ": spatial axes must be cubic, got " +
                         shape_str(t.shape()));
}

} // namespace detail

// Cross-correlation over an r^3 grid. grid: [Cin,r,r,r], kernel:
// [Cout,Cin,k,k,k], output [Cout,r',r',r'] with r' = (r + 2p - k)/s + 1.
template <class T>
Tensor<T> conv3d(const Tensor<T>& grid, const Tensor<T>& kernel, const Tensor<T>& bias,
                 std::size_t stride, std::size_t padding) {
    detail::require_rank(grid, 4, "conv3d: grid");
    detail::require_rank(kernel, 5, "conv3d: kernel");
    detail::require_rank(bias, 1, "conv3d: bias");
    detail::check_cubic(grid, "conv3d: grid");
    const std::size_t cin = grid.dim(0), r = grid.dim(1);
    const std::size_t cout = kernel.dim(0), k = kernel.dim(2);
    if (kernel.dim(2) != kernel.dim(3) || kernel.dim(3) != kernel.dim(4))
        throw ShapeError("conv3d: kernel spatial axes must be cubic, got " + shape_str(kernel.shape()));
    if (kernel.dim(1) != cin)
        throw ShapeError("conv3d: kernel axis 1 (=" + std::to_string(kernel.dim(1)) +
                         ") does not match grid channel axis 0 (=" + std::to_string(cin) + ")");
    if (bias.dim(0) != cout)
        throw ShapeError("conv3d: bias axis 0 does not match kernel axis 0 (Cout)");
    if (k % 2 == 0) throw ConfigError("conv3d: kernel size must be odd, got " + std::to_string(k));
    if (stride < 1) throw ConfigError("conv3d: stride must be >= 1");
    const std::ptrdiff_t num = std::ptrdiff_t(r) + 2 * std::ptrdiff_t(padding) - std::ptrdiff_t(k);
    if (num < 0 || num % std::ptrdiff_t(stride) != 0)
        throw ConfigError("conv3d: non-integer output size for r=" + std::to_string(r) +
                          " k=" + std::to_string(k) + " stride=" + std::to_string(stride) +
                          " padding=" + std::to_string(padding));
    const std::size_t ro = std::size_t(num) / stride + 1;

    std::vector<T> out(cout * ro * ro * ro);
    kern::par::conv3d_fwd(grid.data().data(), cin, r, kernel.data().data(), cout, k,
                          bias.data().data(), stride, std::ptrdiff_t(padding), out.data(), ro);

    auto pg = grid.node(), pk = kernel.node(), pb = bias.node();
    return pvdc::detail::make_op<T>(
        {cout, ro, ro, ro}, std::move(out), {pg, pk, pb},
        [pg, pk, pb, cin, cout, r, ro, k, stride, padding](TensorNode<T>& o) {
            const T* g = o.grad.data();
            if (pg->requires_grad) {
                // gradient w.r.t. the grid is the transposed correlation of g
                // with the same kernel (layout [Cout,Cin,k^3] read as
                // [cin=Cout, cout=Cin])
                std::vector<T> scratch(cin * r * r * r);
                kern::par::deconv3d_fwd(g, cout, ro, pk->value.data(), cin, k, (const T*)nullptr,
                                        stride, std::ptrdiff_t(padding), scratch.data(), r);
                detail::accumulate(*pg, scratch);
            }
            if (pk->requires_grad) {
                pk->ensure_grad();
                kern::par::conv3d_grad_kernel(pg->value.data(), cin, r, g, cout, ro, k, stride,
                                              std::ptrdiff_t(padding), pk->grad.data());
            }
            if (pb->requires_grad) {
                pb->ensure_grad();
                kern::par::channel_spatial_sum(g, cout, ro * ro * ro, pb->grad.data());
            }
        });
}

// Transposed cross-correlation (adjoint of conv3d). grid: [Cin,r,r,r],
// kernel: [Cin,Cout,k,k,k], output [Cout,r',r',r'] with
// r' = (r - 1)*s - 2p + k.
template <class T>
Tensor<T> deconv3d(const Tensor<T>& grid, const Tensor<T>& kernel, const Tensor<T>& bias,
                   std::size_t stride, std::size_t padding) {
    detail::require_rank(grid, 4, "deconv3d: grid");
    detail::require_rank(kernel, 5, "deconv3d: kernel");
    detail::require_rank(bias, 1, "deconv3d: bias");
    detail::check_cubic(grid, "deconv3d: grid");
    const std::size_t cin = grid.dim(0), r = grid.dim(1);
    const std::size_t cout = kernel.dim(1), k = kernel.dim(2);
    if (kernel.dim(2) != kernel.dim(3) || kernel.dim(3) != kernel.dim(4))
        throw ShapeError("deconv3d: kernel spatial axes must be cubic, got " + shape_str(kernel.shape()));
    if (kernel.dim(0) != cin)
        throw ShapeError("deconv3d: kernel axis 0 (=" + std::to_string(kernel.dim(0)) +
                         ") does not match grid channel axis 0 (=" + std::to_string(cin) + ")");
    if (bias.dim(0) != cout)
        throw ShapeError("deconv3d: bias axis 0 does not match kernel axis 1 (Cout)");
    if (stride < 1) throw ConfigError("deconv3d: stride must be >= 1");
    const std::ptrdiff_t rop = std::ptrdiff_t(r - 1) * std::ptrdiff_t(stride) -
                               2 * std::ptrdiff_t(padding) + std::ptrdiff_t(k);
    if (rop < 1)
        throw ConfigError("deconv3d: non-positive output size for r=" + std::to_string(r) +
                          " k=" + std::to_string(k) + " stride=" + std::to_string(stride) +
                          " padding=" + std::to_string(padding));
    const std::size_t ro = std::size_t(rop);

    std::vector<T> out(cout * ro * ro * ro);
    kern::par::deconv3d_fwd(grid.data().data(), cin, r, kernel.data().data(), cout, k,
                            bias.data().data(), stride, std::ptrdiff_t(padding), out.data(), ro);

    auto pg = grid.node(), pk = kernel.node(), pb = bias.node();
    return pvdc::detail::make_op<T>(
        {cout, ro, ro, ro}, std::move(out), {pg, pk, pb},
        [pg, pk, pb, cin, cout, r, ro, k, stride, padding](TensorNode<T>& o) {
            const T* g = o.grad.data();
            if (pg->requires_grad) {
                // adjoint of the adjoint: an ordinary correlation of g with
                // the kernel (layout [Cin,Cout,k^3] read as [cout=Cin, cin=Cout])
                std::vector<T> scratch(cin * r * r * r);
                kern::par::conv3d_fwd(g, cout, ro, pk->value.data(), cin, k, (const T*)nullptr,
                                      stride, std::ptrdiff_t(padding), scratch.data(), r);
                detail::accumulate(*pg, scratch);
            }
            if (pk->requires_grad) {
                // gk[ci,co,t] = sum_in in[ci,i] * g[co, i*s - p + t]; this is
                // conv3d_grad_kernel with x := g and g := in
                pk->ensure_grad();
                kern::par::conv3d_grad_kernel(g, cout, ro, pg->value.data(), cin, r, k, stride,
                                              std::ptrdiff_t(padding), pk->grad.data());
            }
            if (pb->requires_grad) {
                pb->ensure_grad();
                kern::par::channel_spatial_sum(g, cout, ro * ro * ro, pb->grad.data());
            }
        });
}

inline constexpr double kBatchNormEps = 1e-5;
inline constexpr double kBatchNormMomentum = 0.1;

// Per-channel normalization. channel_axis 0 treats x as [C, spatial...]
// (contiguous per-channel blocks); channel_axis 1 treats x as [N, C].
// Train mode normalizes with the batch statistics of this call (population
// variance) and updates the running stats in place; eval mode normalizes
// with the running stats. running_mean/running_var are state, not graph
// participants.
template <class T>
Tensor<T> batch_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                     Tensor<T>& running_mean, Tensor<T>& running_var, Mode mode,
                     int channel_axis, double eps = kBatchNormEps,
                     double momentum = kBatchNormMomentum) {
    if (channel_axis != 0 && channel_axis != 1)
        throw ConfigError("batch_norm: channel_axis must be 0 or 1");
    if (eps <= 0) throw ConfigError("batch_norm: epsilon must be > 0");
    if (x.rank() < 2) throw ShapeError("batch_norm: x must have rank >= 2");
    const std::size_t c = x.dim(std::size_t(channel_axis));
    if (gamma.numel() != c || beta.numel() != c || running_mean.numel() != c ||
        running_var.numel() != c)
        throw ShapeError("batch_norm: gamma/beta/running stats must have " + std::to_string(c) +
                         " channels");
    const std::size_t total = x.numel();
    const std::size_t per_channel = total / c;
    if (per_channel == 0) throw ConfigError("batch_norm: zero elements per channel");

    // element index -> channel mapping
    const auto channel_of = [c, channel_axis, per_channel](std::size_t i) {
        return channel_axis == 0 ? i / per_channel : i % c;
    };

    std::vector<T> mean(c), inv(c);
    if (mode == Mode::Train) {
        std::vector<double> sum(c, 0.0), sumsq(c, 0.0);
        const T* xd = x.data().data();
        for (std::size_t i = 0; i < total; ++i) sum[channel_of(i)] += double(xd[i]);
        for (std::size_t ch = 0; ch < c; ++ch) mean[ch] = T(sum[ch] / double(per_channel));
        for (std::size_t i = 0; i < total; ++i) {
            const double d = double(xd[i]) - double(mean[channel_of(i)]);
            sumsq[channel_of(i)] += d * d;
        }
        for (std::size_t ch = 0; ch < c; ++ch) {
            const double var = sumsq[ch] / double(per_channel);
            inv[ch] = T(1.0 / std::sqrt(var + eps));
            running_mean.at(ch) = T((1.0 - momentum) * double(running_mean.at(ch)) +
                                    momentum * double(mean[ch]));
            running_var.at(ch) =
                T((1.0 - momentum) * double(running_var.at(ch)) + momentum * var);
        }
    } else {
        for (std::size_t ch = 0; ch < c; ++ch) {
            mean[ch] = running_mean.at(ch);
            inv[ch] = T(1.0 / std::sqrt(double(running_var.at(ch)) + eps));
        }
    }

    std::vector<T> out(total);
    {
        const T* xd = x.data().data();
        const T* gm = gamma.data().data();
        const T* bt = beta.data().data();
        for (std::size_t i = 0; i < total; ++i) {
            const std::size_t ch = channel_of(i);
            out[i] = gm[ch] * ((xd[i] - mean[ch]) * inv[ch]) + bt[ch];
        }
    }

    auto px = x.node(), pg = gamma.node(), pb = beta.node();
    const bool train = mode == Mode::Train;
    return pvdc::detail::make_op<T>(
        x.shape(), std::move(out), {px, pg, pb},
        [px, pg, pb, mean, inv, c, total, per_channel, channel_of, train](TensorNode<T>& o) {
            const T* g = o.grad.data();
            const T* xd = px->value.data();
            // per-channel sums of g and g*xhat
            std::vector<double> gsum(c, 0.0), gxsum(c, 0.0);
            for (std::size_t i = 0; i < total; ++i) {
                const std::size_t ch = channel_of(i);
                const double xhat = double((xd[i] - mean[ch]) * inv[ch]);
                gsum[ch] += double(g[i]);
                gxsum[ch] += double(g[i]) * xhat;
            }
            if (pg->requires_grad) {
                pg->ensure_grad();
                for (std::size_t ch = 0; ch < c; ++ch) pg->grad[ch] += T(gxsum[ch]);
            }
            if (pb->requires_grad) {
                pb->ensure_grad();
                for (std::size_t ch = 0; ch < c; ++ch) pb->grad[ch] += T(gsum[ch]);
            }
            if (px->requires_grad) {
                px->ensure_grad();
                const T* gm = pg->value.data();
                if (train) {
                    const double l = double(per_channel);
                    for (std::size_t i = 0; i < total; ++i) {
                        const std::size_t ch = channel_of(i);
                        const double xhat = double((xd[i] - mean[ch]) * inv[ch]);
                        px->grad[i] += T(double(gm[ch]) * double(inv[ch]) *
                                         (double(g[i]) - gsum[ch] / l - xhat * gxsum[ch] / l));
                    }
                } else {
                    for (std::size_t i = 0; i < total; ++i) {
                        const std::size_t ch = channel_of(i);
                        px->grad[i] += g[i] * gm[ch] * inv[ch];
                    }
                }
            }
        });
}

template <class T>
Tensor<T> relu(const Tensor<T>& x) {
    std::vector<T> out(x.numel());
    const T* xd = x.data().data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = xd[i] > T(0) ? xd[i] : T(0);
    auto px = x.node();
    return pvdc::detail::make_op<T>(x.shape(), std::move(out), {px}, [px](TensorNode<T>& o) {
        if (!px->requires_grad) return;
        px->ensure_grad();
        const T* g = o.grad.data();
        const T* xd = px->value.data();
        for (std::size_t i = 0; i < o.numel(); ++i)
            if (xd[i] > T(0)) px->grad[i] += g[i];
    });
}

// Train mode zeroes each element with probability `rate` and scales the
// survivors by 1/(1-rate); eval mode is the identity. Deterministic under
// the given seed.
template <class T>
Tensor<T> dropout(const Tensor<T>& x, double rate, Mode mode, std::uint64_t seed) {
    if (rate < 0.0 || rate >= 1.0)
        throw ConfigError("dropout: rate must satisfy 0 <= rate < 1, got " + std::to_string(rate));
    if (mode == Mode::Eval || rate == 0.0) return x;

    Rng rng(seed);
    const T scale = T(1.0 / (1.0 - rate));
    std::vector<std::uint8_t> keep(x.numel());
    std::vector<T> out(x.numel());
    const T* xd = x.data().data();
    for (std::size_t i = 0; i < out.size(); ++i) {
        keep[i] = rng.uniform() >= rate ? 1 : 0;
        out[i] = keep[i] ? xd[i] * scale : T(0);
    }
    auto px = x.node();
    return pvdc::detail::make_op<T>(x.shape(), std::move(out), {px},
                                    [px, keep = std::move(keep), scale](TensorNode<T>& o) {
                                        if (!px->requires_grad) return;
                                        px->ensure_grad();
                                        const T* g = o.grad.data();
                                        for (std::size_t i = 0; i < o.numel(); ++i)
                                            if (keep[i]) px->grad[i] += g[i] * scale;
                                    });
}

template <class T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
    if (a.shape() != b.shape())
        throw ShapeError("add: shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
    std::vector<T> out(a.numel());
    const T* ad = a.data().data();
    const T* bd = b.data().data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = ad[i] + bd[i];
    auto pa = a.node(), pb = b.node();
    return pvdc::detail::make_op<T>(a.shape(), std::move(out), {pa, pb}, [pa, pb](TensorNode<T>& o) {
        const T* g = o.grad.data();
        if (pa->requires_grad) {
            pa->ensure_grad();
            for (std::size_t i = 0; i < o.numel(); ++i) pa->grad[i] += g[i];
        }
        if (pb->requires_grad) {
            pb->ensure_grad();
            for (std::size_t i = 0; i < o.numel(); ++i) pb->grad[i] += g[i];
        }
    });
}

template <class T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
    if (a.shape() != b.shape())
        throw ShapeError("mul: shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
    std::vector<T> out(a.numel());
    const T* ad = a.data().data();
    const T* bd = b.data().data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = ad[i] * bd[i];
    auto pa = a.node(), pb = b.node();
    return pvdc::detail::make_op<T>(a.shape(), std::move(out), {pa, pb}, [pa, pb](TensorNode<T>& o) {
        const T* g = o.grad.data();
        if (pa->requires_grad) {
            pa->ensure_grad();
            for (std::size_t i = 0; i < o.numel(); ++i) pa->grad[i] += g[i] * pb->value[i];
        }
        if (pb->requires_grad) {
            pb->ensure_grad();
            for (std::size_t i = 0; i < o.numel(); ++i) pb->grad[i] += g[i] * pa->value[i];
        }
    });
}

template <class T>
Tensor<T> scale(const Tensor<T>& x, T s) {
    std::vector<T> out(x.numel());
    const T* xd = x.data().data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = xd[i] * s;
    auto px = x.node();
    return pvdc::detail::make_op<T>(x.shape(), std::move(out), {px}, [px, s](TensorNode<T>& o) {
        if (!px->requires_grad) return;
        px->ensure_grad();
        const T* g = o.grad.data();
        for (std::size_t i = 0; i < o.numel(); ++i) px->grad[i] += g[i] * s;
    });
}

// sum of all entries, in index order
template <class T>
Tensor<T> sum_all(const Tensor<T>& x) {
    T acc = T(0);
    for (T v : x.data()) acc += v;
    auto px = x.node();
    return pvdc::detail::make_op<T>({1}, {acc}, {px}, [px](TensorNode<T>& o) {
        if (!px->requires_grad) return;
        px->ensure_grad();
        const T g = o.grad[0];
        for (std::size_t i = 0; i < px->grad.size(); ++i) px->grad[i] += g;
    });
}

// column-wise concatenation of [N, C_i] tensors
template <class T>
Tensor<T> concat_cols(const std::vector<Tensor<T>>& xs) {
    if (xs.empty()) throw ContractError("concat_cols: no inputs");
    const std::size_t n = xs[0].dim(0);
    std::size_t ctotal = 0;
    for (const auto& x : xs) {
        detail::require_rank(x, 2, "concat_cols: input");
        if (x.dim(0) != n)
            throw ShapeError("concat_cols: axis 0 mismatch, " + std::to_string(x.dim(0)) +
                             " vs " + std::to_string(n));
        ctotal += x.dim(1);
    }
    std::vector<T> out(n * ctotal);
    std::vector<std::size_t> offsets;
    std::size_t off = 0;
    for (const auto& x : xs) {
        offsets.push_back(off);
        const std::size_t c = x.dim(1);
        const T* xd = x.data().data();
        for (std::size_t row = 0; row < n; ++row)
            std::memcpy(out.data() + row * ctotal + off, xd + row * c, c * sizeof(T));
        off += c;
    }
    std::vector<std::shared_ptr<TensorNode<T>>> parents;
    for (const auto& x : xs) parents.push_back(x.node());
    return pvdc::detail::make_op<T>(
        {n, ctotal}, std::move(out), parents,
        [parents, offsets, n, ctotal](TensorNode<T>& o) {
            const T* g = o.grad.data();
            for (std::size_t pi = 0; pi < parents.size(); ++pi) {
                auto& p = *parents[pi];
                if (!p.requires_grad) continue;
                p.ensure_grad();
                const std::size_t c = p.shape[1];
                for (std::size_t row = 0; row < n; ++row)
                    for (std::size_t j = 0; j < c; ++j)
                        p.grad[row * c + j] += g[row * ctotal + offsets[pi] + j];
            }
        });
}

// broadcast a [C] vector to [n, C] rows
template <class T>
Tensor<T> row_broadcast(const Tensor<T>& v, std::size_t n) {
    detail::require_rank(v, 1, "row_broadcast: v");
    const std::size_t c = v.dim(0);
    std::vector<T> out(n * c);
    const T* vd = v.data().data();
    for (std::size_t row = 0; row < n; ++row) std::memcpy(out.data() + row * c, vd, c * sizeof(T));
    auto pv = v.node();
    return pvdc::detail::make_op<T>({n, c}, std::move(out), {pv}, [pv, n, c](TensorNode<T>& o) {
        if (!pv->requires_grad) return;
        pv->ensure_grad();
        kern::par::colsum(o.grad.data(), n, c, pv->grad.data());
    });
}

// column-wise max over rows of [N, C]; gradient routes to the first argmax row
template <class T>
Tensor<T> col_max(const Tensor<T>& x) {
    detail::require_rank(x, 2, "col_max: x");
    const std::size_t n = x.dim(0), c = x.dim(1);
    if (n < 1) throw ShapeError("col_max: x axis 0 (rows) must be >= 1");
    std::vector<T> out(c);
    std::vector<std::uint32_t> arg(c, 0);
    const T* xd = x.data().data();
    for (std::size_t j = 0; j < c; ++j) out[j] = xd[j];
    for (std::size_t row = 1; row < n; ++row)
        for (std::size_t j = 0; j < c; ++j) {
            const T v = xd[row * c + j];
            if (v > out[j]) {
                out[j] = v;
                arg[j] = std::uint32_t(row);
            }
        }
    auto px = x.node();
    return pvdc::detail::make_op<T>({c}, std::move(out), {px},
                                    [px, arg = std::move(arg), c](TensorNode<T>& o) {
                                        if (!px->requires_grad) return;
                                        px->ensure_grad();
                                        const T* g = o.grad.data();
                                        for (std::size_t j = 0; j < c; ++j)
                                            px->grad[arg[j] * c + j] += g[j];
                                    });
}

} // namespace pvdc::ops
