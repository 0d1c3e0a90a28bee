#pragma once

#include <cmath>
#include <functional>
#include <string>

#include "grail/parameters.hpp"

namespace grail {

// Central-difference gradient estimate, the reference oracle for every
// hand-derived gradient in the models.
inline GradientVector finite_difference_grad(
    const std::function<double(const ParameterVector&)>& loss_fn, ParameterVector& params,
    double eps = 1e-5) {
    if (eps <= 0.0) throw std::invalid_argument("finite_difference_grad: eps must be > 0");
    GradientVector grad(params.layout_ptr());
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double saved = params[i];
        params[i] = saved + eps;
        const double f_plus = loss_fn(params);
        params[i] = saved - eps;
        const double f_minus = loss_fn(params);
        params[i] = saved;
        if (!std::isfinite(f_plus) || !std::isfinite(f_minus)) {
            throw std::runtime_error("finite_difference_grad: non-finite loss at coordinate " +
                                     std::to_string(i));
        }
        grad[i] = (f_plus - f_minus) / (2.0 * eps);
    }
    return grad;
}

// Per-coordinate relative error with a unit floor. Losses in this project
// are O(ln #classes), so gradient entries are O(1) and the floor keeps
// finite-difference roundoff on near-zero coordinates out of the signal.
inline double max_relative_error(const GradientVector& a, const GradientVector& b) {
    a.require_same_layout(b);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double denom = std::max({1.0, std::fabs(a[i]), std::fabs(b[i])});
        worst = std::max(worst, std::fabs(a[i] - b[i]) / denom);
    }
    return worst;
}

}  // namespace grail
