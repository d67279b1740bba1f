#pragma once

#include "pvdc/params.hpp"

namespace pvdc {

// Adam with bias correction. Walks the learnable parameters in their stable
// store order; state aligns with that order and round-trips through the
// checkpoint by parameter name.
template <class T>
class Adam {
public:
    Adam(ParamStore<T>& params, double lr, double beta1 = 0.9, double beta2 = 0.999,
         double eps = 1e-8)
        : params_(&params), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
        for (auto& [name, t] : params) {
            if (!t.requires_grad()) continue;
            names_.push_back(name);
            m_.emplace_back(t.numel(), T(0));
            v_.emplace_back(t.numel(), T(0));
        }
    }

    std::uint64_t step_count() const { return t_; }
    double learning_rate() const { return lr_; }

    void step() {
        ++t_;
        const double bc1 = 1.0 - std::pow(beta1_, double(t_));
        const double bc2 = 1.0 - std::pow(beta2_, double(t_));
        for (std::size_t pi = 0; pi < names_.size(); ++pi) {
            auto& param = params_->get(names_[pi]);
            if (!param.has_grad()) continue; // no gradient flowed this step
            auto data = param.data();
            auto grad = param.grad();
            auto& m = m_[pi];
            auto& v = v_[pi];
            for (std::size_t i = 0; i < data.size(); ++i) {
                const double g = double(grad[i]);
                m[i] = T(beta1_ * double(m[i]) + (1.0 - beta1_) * g);
                v[i] = T(beta2_ * double(v[i]) + (1.0 - beta2_) * g * g);
                const double mhat = double(m[i]) / bc1;
                const double vhat = double(v[i]) / bc2;
                data[i] = T(double(data[i]) - lr_ * mhat / (std::sqrt(vhat) + eps_));
            }
        }
    }

    // checkpoint bridging
    const std::vector<std::string>& names() const { return names_; }
    std::vector<T>& moment1(std::size_t i) { return m_[i]; }
    std::vector<T>& moment2(std::size_t i) { return v_[i]; }
    const std::vector<T>& moment1(std::size_t i) const { return m_[i]; }
    const std::vector<T>& moment2(std::size_t i) const { return v_[i]; }
    void set_step_count(std::uint64_t t) { t_ = t; }

private:
    ParamStore<T>* params_;
    double lr_, beta1_, beta2_, eps_;
    std::uint64_t t_ = 0;
    std::vector<std::string> names_;
    std::vector<std::vector<T>> m_, v_;
};

} // namespace pvdc
