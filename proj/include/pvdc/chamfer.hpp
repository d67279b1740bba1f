#pragma once

#include "pvdc/kdtree.hpp"
#include "pvdc/tensor.hpp"

namespace pvdc {

// Bidirectional Chamfer distance between point sets S and S_G:
// sum over S of the squared distance to the nearest point of S_G, plus the
// symmetric term. Raw sums are kept per direction; normalized() divides each
// directional sum by its own cloud size (the per-model mean variant).
//
// Summation policy: nearest-neighbor squared distances are accumulated in
// ascending sorted order, which makes the value exactly invariant to point
// permutations (the multiset of distances does not depend on point order).
// Ties in the matching break to the lowest index.
template <class T>
struct ChamferResult {
    double value = 0.0;   // fwd_sum + bwd_sum, squared-distance units
    double fwd_sum = 0.0; // sum over S of d2 to nearest in S_G
    double bwd_sum = 0.0;
    std::vector<std::uint32_t> fwd_nn; // per S point: index of nearest S_G point
    std::vector<std::uint32_t> bwd_nn; // per S_G point: index of nearest S point

    double normalized() const {
        return fwd_sum / double(fwd_nn.size()) + bwd_sum / double(bwd_nn.size());
    }
};

namespace detail {

inline double sorted_sum(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc;
}

template <class T>
void check_cloud(std::span<const T> xyz, const char* what) {
    if (xyz.size() % 3 != 0) throw ShapeError(std::string(what) + ": coordinates must be n*3 scalars");
    if (xyz.empty()) throw ContractError(std::string(what) + ": empty point cloud");
}

} // namespace detail

// Exact reference: linear scan both directions.
template <class T>
ChamferResult<T> chamfer_brute(std::span<const T> s, std::span<const T> sg) {
    detail::check_cloud(s, "chamfer_brute: S");
    detail::check_cloud(sg, "chamfer_brute: S_G");
    const std::size_t n = s.size() / 3, m = sg.size() / 3;
    ChamferResult<T> res;
    res.fwd_nn.resize(n);
    res.bwd_nn.resize(m);
    std::vector<T> d2f(n), d2b(m);
    kern::par::nn_all(s.data(), n, sg.data(), m, res.fwd_nn.data(), d2f.data());
    kern::par::nn_all(sg.data(), m, s.data(), n, res.bwd_nn.data(), d2b.data());
    res.fwd_sum = detail::sorted_sum(std::vector<double>(d2f.begin(), d2f.end()));
    res.bwd_sum = detail::sorted_sum(std::vector<double>(d2b.begin(), d2b.end()));
    res.value = res.fwd_sum + res.bwd_sum;
    return res;
}

// KD-tree accelerated; value and matches identical to chamfer_brute.
template <class T>
ChamferResult<T> chamfer_kdtree(std::span<const T> s, std::span<const T> sg,
                                const KdTree<T>* prebuilt_sg = nullptr) {
    detail::check_cloud(s, "chamfer_kdtree: S");
    detail::check_cloud(sg, "chamfer_kdtree: S_G");
    const std::size_t n = s.size() / 3, m = sg.size() / 3;

    KdTree<T> local_sg;
    const KdTree<T>* tree_sg = prebuilt_sg;
    if (!tree_sg) {
        local_sg.build(sg);
        tree_sg = &local_sg;
    }
    KdTree<T> tree_s(s);

    ChamferResult<T> res;
    res.fwd_nn.resize(n);
    res.bwd_nn.resize(m);
    std::vector<T> d2f(n), d2b(m);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(n); ++i) {
        const auto hit = tree_sg->nearest(s.data() + std::size_t(i) * 3);
        res.fwd_nn[std::size_t(i)] = hit.index;
        d2f[std::size_t(i)] = hit.d2;
    }
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t j = 0; j < std::ptrdiff_t(m); ++j) {
        const auto hit = tree_s.nearest(sg.data() + std::size_t(j) * 3);
        res.bwd_nn[std::size_t(j)] = hit.index;
        d2b[std::size_t(j)] = hit.d2;
    }
    res.fwd_sum = detail::sorted_sum(std::vector<double>(d2f.begin(), d2f.end()));
    res.bwd_sum = detail::sorted_sum(std::vector<double>(d2b.begin(), d2b.end()));
    res.value = res.fwd_sum + res.bwd_sum;
    return res;
}

// Gradients of the (raw or per-point normalized) Chamfer value with the
// matching held fixed: a predicted point x matched to y receives 2(x - y)
// from the forward term plus 2(x - g) for every ground-truth point g whose
// backward match is x.
template <class T>
std::pair<std::vector<T>, std::vector<T>> chamfer_grad(std::span<const T> s, std::span<const T> sg,
                                                       const ChamferResult<T>& res,
                                                       bool normalized = false,
                                                       bool grad_sg = false) {
    const std::size_t n = s.size() / 3, m = sg.size() / 3;
    const double wf = normalized ? 1.0 / double(n) : 1.0;
    const double wb = normalized ? 1.0 / double(m) : 1.0;
    std::vector<T> gs(s.size(), T(0)), gg;
    if (grad_sg) gg.assign(sg.size(), T(0));

    for (std::size_t i = 0; i < n; ++i) {
        const T* x = s.data() + i * 3;
        const T* y = sg.data() + res.fwd_nn[i] * 3;
        for (int a = 0; a < 3; ++a) {
            const T d = T(2) * (x[a] - y[a]) * T(wf);
            gs[i * 3 + a] += d;
            if (grad_sg) gg[res.fwd_nn[i] * 3 + a] -= d;
        }
    }
    for (std::size_t j = 0; j < m; ++j) {
        const T* y = sg.data() + j * 3;
        const T* x = s.data() + res.bwd_nn[j] * 3;
        for (int a = 0; a < 3; ++a) {
            const T d = T(2) * (x[a] - y[a]) * T(wb);
            gs[res.bwd_nn[j] * 3 + a] += d;
            if (grad_sg) gg[j * 3 + a] -= d;
        }
    }
    return {std::move(gs), std::move(gg)};
}

// Differentiable scalar Chamfer loss between a predicted [n, 3] tensor and a
// fixed target cloud. Normalized=true gives the per-point mean variant used
// for optimization; gradients flow to pred only.
template <class T>
Tensor<T> chamfer_loss(const Tensor<T>& pred, std::span<const T> target, bool normalized,
                       const KdTree<T>* target_tree = nullptr) {
    if (pred.rank() != 2 || pred.dim(1) != 3)
        throw ShapeError("chamfer_loss: pred must be [n, 3], got " + shape_str(pred.shape()));
    auto res = chamfer_kdtree(std::span<const T>(pred.data()), target, target_tree);
    const T value = T(normalized ? res.normalized() : res.value);

    auto pp = pred.node();
    std::vector<T> tgt(target.begin(), target.end());
    return pvdc::detail::make_op<T>(
        {1}, {value}, {pp},
        [pp, tgt = std::move(tgt), res = std::move(res), normalized](TensorNode<T>& o) {
            if (!pp->requires_grad) return;
            pp->ensure_grad();
            auto [gs, gg] = chamfer_grad(std::span<const T>(pp->value.data(), pp->value.size()),
                                         std::span<const T>(tgt.data(), tgt.size()), res,
                                         normalized, false);
            const T g = o.grad[0];
            for (std::size_t i = 0; i < gs.size(); ++i) pp->grad[i] += g * gs[i];
        });
}

} // namespace pvdc
