#pragma once

#include <cmath>
#include <vector>

#include "grail/parameters.hpp"

namespace grail {

struct AdamwConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 1e-3;

    void validate() const {
        if (learning_rate <= 0.0) throw std::invalid_argument("adamw: learning_rate must be > 0");
        if (beta1 < 0.0 || beta1 >= 1.0) throw std::invalid_argument("adamw: beta1 out of [0,1)");
        if (beta2 < 0.0 || beta2 >= 1.0) throw std::invalid_argument("adamw: beta2 out of [0,1)");
        if (epsilon <= 0.0) throw std::invalid_argument("adamw: epsilon must be > 0");
        if (weight_decay < 0.0) throw std::invalid_argument("adamw: weight_decay must be >= 0");
    }
};

// Adaptive-moment update with decoupled weight decay and bias correction.
struct OptimizerState {
    std::vector<double> first_moment;
    std::vector<double> second_moment;
    long step = 0;
    AdamwConfig config;

    explicit OptimizerState(std::size_t parameter_count, AdamwConfig cfg = {})
        : first_moment(parameter_count, 0.0),
          second_moment(parameter_count, 0.0),
          config(cfg) {
        config.validate();
    }
};

inline void optimizer_step(ParameterVector& params, const GradientVector& grads,
                           OptimizerState& state) {
    require_matching_layout(params, grads);
    if (state.first_moment.size() != params.size())
        throw std::invalid_argument("optimizer state size mismatch");
    grads.check_finite("optimizer_step gradient");

    ++state.step;
    const AdamwConfig& c = state.config;
    const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));

    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        state.first_moment[i] = c.beta1 * state.first_moment[i] + (1.0 - c.beta1) * g;
        state.second_moment[i] = c.beta2 * state.second_moment[i] + (1.0 - c.beta2) * g * g;
        const double m_hat = state.first_moment[i] / bc1;
        const double v_hat = state.second_moment[i] / bc2;
        params[i] -= c.learning_rate *
                     (m_hat / (std::sqrt(v_hat) + c.epsilon) + c.weight_decay * params[i]);
    }
}

}  // namespace grail
