#pragma once

#include <functional>

#include "pvdc/rng.hpp"
#include "pvdc/tensor.hpp"

namespace pvdc {

struct GradCheckReport {
    double max_rel_err = 0.0;
    double max_abs_err = 0.0;
    std::size_t coords_checked = 0;
    double tolerance = 0.0;
    bool passed = false;
};

// Central finite differences against reverse-mode gradients.
//
// `forward` must rebuild the graph from the current contents of `inputs` and
// return a scalar; the check perturbs one coordinate at a time, so it needs a
// deterministic forward (fix dropout seeds). Error per coordinate is
// |fd - ad| / max(1, |fd|, |ad|). With max_coords_per_input >= 0 only a
// deterministic subset of coordinates per input is probed, which keeps the
// cost of whole-model checks bounded.
template <class T>
GradCheckReport finite_diff_check(const std::function<Tensor<T>()>& forward,
                                  std::vector<Tensor<T>> inputs, T epsilon, double tolerance,
                                  std::ptrdiff_t max_coords_per_input = -1,
                                  std::uint64_t subsample_seed = 0x9d5ec) {
    if (!(epsilon > T(0))) throw ConfigError("finite_diff_check: epsilon must be > 0");
    GradCheckReport report;
    report.tolerance = tolerance;

    Tensor<T> loss = forward();
    if (loss.numel() != 1) throw ShapeError("finite_diff_check: forward() must return a scalar");
    backward(loss);

    std::vector<std::vector<T>> adjoint;
    for (auto& in : inputs) {
        if (!in.requires_grad()) {
            adjoint.emplace_back();
            continue;
        }
        auto node = in.node();
        node->ensure_grad();
        adjoint.emplace_back(node->grad.begin(), node->grad.end());
    }

    for (std::size_t t = 0; t < inputs.size(); ++t) {
        auto& in = inputs[t];
        if (!in.requires_grad()) continue;
        std::vector<std::size_t> coords;
        if (max_coords_per_input < 0 || std::size_t(max_coords_per_input) >= in.numel()) {
            coords.resize(in.numel());
            for (std::size_t i = 0; i < coords.size(); ++i) coords[i] = i;
        } else {
            Rng rng(derive_seed(subsample_seed, t));
            for (std::ptrdiff_t i = 0; i < max_coords_per_input; ++i)
                coords.push_back(std::size_t(rng.below(in.numel())));
        }
        for (std::size_t i : coords) {
            const T saved = in.at(i);
            in.at(i) = saved + epsilon;
            const double fp = double(forward().item());
            in.at(i) = saved - epsilon;
            const double fm = double(forward().item());
            in.at(i) = saved;

            const double fd = (fp - fm) / (2.0 * double(epsilon));
            const double ad = double(adjoint[t][i]);
            const double abs_err = std::abs(fd - ad);
            const double rel = abs_err / std::max({1.0, std::abs(fd), std::abs(ad)});
            report.max_abs_err = std::max(report.max_abs_err, abs_err);
            report.max_rel_err = std::max(report.max_rel_err, rel);
            ++report.coords_checked;
        }
    }
    report.passed = report.max_rel_err < tolerance;
    return report;
}

} // namespace pvdc
