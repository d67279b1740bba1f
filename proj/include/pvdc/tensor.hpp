#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <memory>
#include <span>
#include <unordered_set>
#include <utility>

#include "pvdc/base.hpp"

namespace pvdc {

namespace detail {
inline std::atomic<std::uint64_t>& node_sequence() {
    static std::atomic<std::uint64_t> seq{0};
    return seq;
}
} // namespace detail

// One record of the compute graph. Holds the value, the (lazily allocated)
// gradient, and the backward rule that accumulates into the parents' grads.
// Records are ordered by a global creation counter, so sorting a reachable
// set by `seq` descending replays the executed ops in reverse topological
// order: an op's output always carries a higher seq than its inputs.
template <class T>
struct TensorNode {
    Shape shape;
    std::vector<T> value;
    std::vector<T> grad; // empty until first accumulation
    bool requires_grad = false;
    bool backward_done = false;
    std::uint64_t seq;
    std::vector<std::shared_ptr<TensorNode>> parents;
    std::function<void(TensorNode&)> backprop;

    TensorNode() : seq(detail::node_sequence().fetch_add(1, std::memory_order_relaxed)) {}

    std::size_t numel() const { return value.size(); }

    void ensure_grad() {
        if (grad.empty()) grad.assign(value.size(), T(0));
    }
};

// Value-semantic handle to a shared graph node.
template <class T>
class Tensor {
public:
    using Scalar = T;

    Tensor() = default;

    static Tensor zeros(Shape shape, bool requires_grad = false) {
        return filled(std::move(shape), T(0), requires_grad);
    }

    static Tensor filled(Shape shape, T v, bool requires_grad = false) {
        Tensor t;
        t.n_ = std::make_shared<TensorNode<T>>();
        t.n_->value.assign(shape_numel(shape), v);
        t.n_->shape = std::move(shape);
        t.n_->requires_grad = requires_grad;
        return t;
    }

    static Tensor from_data(Shape shape, std::vector<T> data, bool requires_grad = false) {
        if (shape_numel(shape) != data.size())
            throw ShapeError("tensor: data length " + std::to_string(data.size()) +
                             " does not match shape " + shape_str(shape));
        Tensor t;
        t.n_ = std::make_shared<TensorNode<T>>();
        t.n_->shape = std::move(shape);
        t.n_->value = std::move(data);
        t.n_->requires_grad = requires_grad;
        return t;
    }

    static Tensor scalar(T v) { return from_data({1}, {v}); }

    bool defined() const { return n_ != nullptr; }
    const Shape& shape() const { return n_->shape; }
    std::size_t rank() const { return n_->shape.size(); }
    std::size_t dim(std::size_t i) const { return n_->shape[i]; }
    std::size_t numel() const { return n_ ? n_->value.size() : 0; }

    std::span<const T> data() const { return {n_->value.data(), n_->value.size()}; }
    std::span<T> data() { return {n_->value.data(), n_->value.size()}; }

    bool has_grad() const { return n_ && !n_->grad.empty(); }
    std::span<const T> grad() const {
        if (!has_grad()) throw Error("tensor: gradient not populated; run backward() first");
        return {n_->grad.data(), n_->grad.size()};
    }

    bool requires_grad() const { return n_->requires_grad; }
    void set_requires_grad(bool rg) { n_->requires_grad = rg; }

    void zero_grad() {
        if (n_ && !n_->grad.empty()) std::fill(n_->grad.begin(), n_->grad.end(), T(0));
    }

    T item() const {
        if (numel() != 1) throw ShapeError("item(): tensor is not scalar, shape " + shape_str(shape()));
        return n_->value[0];
    }

    // element access for tests and small constructions
    T& at(std::size_t i) { return n_->value[i]; }
    T at(std::size_t i) const { return n_->value[i]; }

    std::shared_ptr<TensorNode<T>> node() const { return n_; }

private:
    std::shared_ptr<TensorNode<T>> n_;
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

namespace detail {

template <class T>
bool all_finite(std::span<const T> v) {
    for (T x : v)
        if (!std::isfinite(double(x))) return false;
    return true;
}

// Assemble an op output node. Parents and the backward rule are only kept
// when some parent participates in differentiation, so constant subgraphs
// detach and free eagerly.
template <class T>
Tensor<T> make_op(Shape shape, std::vector<T> value,
                  std::vector<std::shared_ptr<TensorNode<T>>> parents,
                  std::function<void(TensorNode<T>&)> backprop) {
    Tensor<T> out = Tensor<T>::from_data(std::move(shape), std::move(value));
#ifndef NDEBUG
    if (!all_finite(std::span<const T>(out.data())))
        throw Error("op produced non-finite values");
#endif
    bool rg = false;
    for (const auto& p : parents) rg = rg || (p && p->requires_grad);
    if (rg) {
        auto node = out.node();
        node->requires_grad = true;
        node->parents = std::move(parents);
        node->backprop = std::move(backprop);
    }
    return out;
}

} // namespace detail

// Reverse accumulation from a scalar loss. Gradients add into every
// requires_grad tensor reachable from `loss`; calling twice on the same loss
// is an error (the graph is define-by-run and must be rebuilt).
template <class T>
void backward(const Tensor<T>& loss) {
    if (!loss.defined() || loss.numel() != 1)
        throw ShapeError("backward: loss must be a defined scalar tensor");
    auto root = loss.node();
    if (!root->requires_grad)
        throw Error("backward: loss is not connected to any requires_grad tensor");
    if (root->backward_done)
        throw Error("backward: already called on this loss; rebuild the graph before calling again");
    root->backward_done = true;

    // collect reachable differentiable nodes
    std::vector<TensorNode<T>*> order;
    std::unordered_set<TensorNode<T>*> seen;
    std::vector<TensorNode<T>*> stack{root.get()};
    seen.insert(root.get());
    while (!stack.empty()) {
        TensorNode<T>* n = stack.back();
        stack.pop_back();
        order.push_back(n);
        for (const auto& p : n->parents) {
            if (p && p->requires_grad && seen.insert(p.get()).second) stack.push_back(p.get());
        }
    }
    std::sort(order.begin(), order.end(),
              [](const TensorNode<T>* a, const TensorNode<T>* b) { return a->seq > b->seq; });

    root->ensure_grad();
    root->grad[0] += T(1);
    for (TensorNode<T>* n : order) {
        if (n->backprop && !n->grad.empty()) n->backprop(*n);
    }
}

} // namespace pvdc
