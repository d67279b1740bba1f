#pragma once

#include <unordered_map>

#include "pvdc/rng.hpp"
#include "pvdc/tensor.hpp"

namespace pvdc {

// Named tensor collection with stable insertion order. Learnable parameters
// carry requires_grad; running statistics and other state live here too with
// requires_grad off, so checkpointing sees one flat namespace.
template <class T>
class ParamStore {
public:
    Tensor<T>& add(const std::string& name, Tensor<T> t) {
        if (index_.count(name)) throw Error("param store: duplicate name " + name);
        index_[name] = items_.size();
        items_.emplace_back(name, std::move(t));
        return items_.back().second;
    }

    bool contains(const std::string& name) const { return index_.count(name) != 0; }

    Tensor<T>& get(const std::string& name) {
        auto it = index_.find(name);
        if (it == index_.end()) throw Error("param store: unknown parameter " + name);
        return items_[it->second].second;
    }

    const Tensor<T>& get(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw Error("param store: unknown parameter " + name);
        return items_[it->second].second;
    }

    std::size_t size() const { return items_.size(); }
    auto begin() { return items_.begin(); }
    auto end() { return items_.end(); }
    auto begin() const { return items_.begin(); }
    auto end() const { return items_.end(); }

    void zero_grads() {
        for (auto& [name, t] : items_)
            if (t.requires_grad()) t.zero_grad();
    }

    std::size_t learnable_count() const {
        std::size_t n = 0;
        for (const auto& [name, t] : items_)
            if (t.requires_grad()) n += t.numel();
        return n;
    }

private:
    std::vector<std::pair<std::string, Tensor<T>>> items_;
    std::unordered_map<std::string, std::size_t> index_;
};

namespace init {

// Glorot-uniform bound sqrt(6 / (fan_in + fan_out))
template <class T>
Tensor<T> xavier_uniform(Shape shape, std::size_t fan_in, std::size_t fan_out,
                         std::uint64_t seed) {
    const double bound = std::sqrt(6.0 / double(fan_in + fan_out));
    Rng rng(seed);
    std::vector<T> data(shape_numel(shape));
    for (auto& v : data) v = T(rng.uniform(-bound, bound));
    return Tensor<T>::from_data(std::move(shape), std::move(data), true);
}

template <class T>
Tensor<T> zeros(Shape shape, bool requires_grad = true) {
    return Tensor<T>::zeros(std::move(shape), requires_grad);
}

template <class T>
Tensor<T> ones(Shape shape, bool requires_grad = true) {
    return Tensor<T>::filled(std::move(shape), T(1), requires_grad);
}

} // namespace init

} // namespace pvdc
