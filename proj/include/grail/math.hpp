#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "grail/parameters.hpp"

namespace grail {

// Dense row-major matrix of doubles.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

    double* row(std::size_t i) { return a.data() + i * cols; }
    const double* row(std::size_t i) const { return a.data() + i * cols; }
    std::span<double> row_span(std::size_t i) { return {row(i), cols}; }
    std::span<const double> row_span(std::size_t i) const { return {row(i), cols}; }
    double& at(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
};

struct Prf {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    // Micro counts behind the ratios, for aggregation across runs.
    std::size_t true_positives = 0;
    std::size_t predicted = 0;
    std::size_t gold = 0;
};

inline Prf prf_from_counts(std::size_t tp, std::size_t pred, std::size_t gold) {
    Prf m;
    m.precision = pred == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(pred);
    m.recall = gold == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(gold);
    m.f1 = (m.precision + m.recall) == 0.0
               ? 0.0
               : 2.0 * m.precision * m.recall / (m.precision + m.recall);
    m.true_positives = tp;
    m.predicted = pred;
    m.gold = gold;
    return m;
}

inline double log_sum_exp(std::span<const double> xs) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : xs) m = std::max(m, x);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double x : xs) s += std::exp(x - m);
    return m + std::log(s);
}

// Lowest-index winner on ties.
inline std::size_t argmax(std::span<const double> xs) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < xs.size(); ++i) {
        if (xs[i] > xs[best]) best = i;
    }
    return best;
}

inline std::vector<double> softmax(std::span<const double> logits) {
    std::vector<double> p(logits.size());
    double m = -std::numeric_limits<double>::infinity();
    for (double x : logits) m = std::max(m, x);
    double s = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - m);
        s += p[i];
    }
    for (double& v : p) v /= s;
    return p;
}

struct SoftmaxCe {
    double loss = 0.0;
    std::vector<double> prob;  // also the start of dlogits: prob - onehot(gold)
};

inline SoftmaxCe softmax_cross_entropy(std::span<const double> logits, std::size_t gold) {
    if (gold >= logits.size())
        throw std::invalid_argument("cross entropy: gold index out of range");
    SoftmaxCe out;
    out.prob = softmax(logits);
    out.loss = log_sum_exp(logits) - logits[gold];
    return out;
}

// y += W x  where W is (out × in), row-major.
inline void matvec_accum(std::span<const double> w, std::size_t out_dim, std::size_t in_dim,
                         std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < out_dim; ++i) {
        const double* wr = w.data() + i * in_dim;
        double s = 0.0;
        for (std::size_t j = 0; j < in_dim; ++j) s += wr[j] * x[j];
        y[i] += s;
    }
}

// dx += Wᵀ dy;  dW += dy ⊗ x
inline void matvec_backward(std::span<const double> w, std::size_t out_dim, std::size_t in_dim,
                            std::span<const double> x, std::span<const double> dy,
                            std::span<double> dw, std::span<double> dx) {
    for (std::size_t i = 0; i < out_dim; ++i) {
        const double g = dy[i];
        if (g == 0.0) continue;
        const double* wr = w.data() + i * in_dim;
        double* dwr = dw.data() + i * in_dim;
        for (std::size_t j = 0; j < in_dim; ++j) {
            dwr[j] += g * x[j];
            dx[j] += g * wr[j];
        }
    }
}

// Cosine of the angle between two gradient vectors, clamped to [-1, 1]
// against rounding. Zero-norm inputs have no direction and are refused.
inline double cosine_similarity(const GradientVector& a, const GradientVector& b) {
    a.require_same_layout(b);
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0)
        throw DegenerateGradientError("cosine_similarity: zero-norm gradient");
    const double c = a.dot(b) / (na * nb);
    return std::clamp(c, -1.0, 1.0);
}

// Running-mean correction of the standard gradient direction:
// (N·g_l + g_p) / (N + 1).
inline GradientVector running_mean_update(const GradientVector& g_l, const GradientVector& g_p,
                                          std::size_t n) {
    g_l.require_same_layout(g_p);
    if (n < 1) throw std::invalid_argument("running_mean_update: N must be >= 1");
    GradientVector out(g_l.layout_ptr());
    const double dn = static_cast<double>(n);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = (dn * g_l[i] + g_p[i]) / (dn + 1.0);
    }
    return out;
}

}  // namespace grail
