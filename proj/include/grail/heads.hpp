#pragma once

#include <string>
#include <vector>

#include "grail/math.hpp"
#include "grail/parameters.hpp"

namespace grail {

// y = W_o (W_h x + b_h) + b_o, the two-affine classification head shared by
// the taggers and classifiers. No nonlinearity between the affines.
struct TwoLayerHead {
    std::string prefix;
    std::size_t in_dim = 0;
    std::size_t hidden_dim = 0;
    std::size_t out_dim = 0;

    std::string hidden_weight() const { return prefix + ".hidden_weight"; }
    std::string hidden_bias() const { return prefix + ".hidden_bias"; }
    std::string output_weight() const { return prefix + ".output_weight"; }
    std::string output_bias() const { return prefix + ".output_bias"; }

    void register_segments(ParameterLayout& layout) const {
        layout.add(hidden_weight(), {hidden_dim, in_dim});
        layout.add(hidden_bias(), {hidden_dim});
        layout.add(output_weight(), {out_dim, hidden_dim});
        layout.add(output_bias(), {out_dim});
    }

    // `mid` receives the hidden activation when the caller will backprop.
    std::vector<double> forward(std::span<const double> x, const ParameterVector& params,
                                std::vector<double>* mid = nullptr) const {
        if (x.size() != in_dim) throw std::invalid_argument(prefix + ": input size mismatch");
        std::vector<double> hidden(params.segment(hidden_bias()).begin(),
                                   params.segment(hidden_bias()).end());
        matvec_accum(params.segment(hidden_weight()), hidden_dim, in_dim, x, hidden);
        std::vector<double> out(params.segment(output_bias()).begin(),
                                params.segment(output_bias()).end());
        matvec_accum(params.segment(output_weight()), out_dim, hidden_dim, hidden, out);
        if (mid) *mid = std::move(hidden);
        return out;
    }

    // Accumulates parameter gradients and, when dx is non-empty, the input
    // gradient.
    void backward(std::span<const double> x, std::span<const double> mid,
                  std::span<const double> dy, const ParameterVector& params, GradientVector& grad,
                  std::span<double> dx) const {
        std::vector<double> d_mid(hidden_dim, 0.0);
        matvec_backward(params.segment(output_weight()), out_dim, hidden_dim, mid, dy,
                        grad.segment(output_weight()), d_mid);
        auto d_ob = grad.segment(output_bias());
        for (std::size_t i = 0; i < out_dim; ++i) d_ob[i] += dy[i];

        std::vector<double> d_x_local(in_dim, 0.0);
        matvec_backward(params.segment(hidden_weight()), hidden_dim, in_dim, x, d_mid,
                        grad.segment(hidden_weight()), d_x_local);
        auto d_hb = grad.segment(hidden_bias());
        for (std::size_t i = 0; i < hidden_dim; ++i) d_hb[i] += d_mid[i];

        if (!dx.empty()) {
            if (dx.size() != in_dim)
                throw std::invalid_argument(prefix + ": dx size mismatch");
            for (std::size_t i = 0; i < in_dim; ++i) dx[i] += d_x_local[i];
        }
    }
};

}  // namespace grail
