#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "grail/math.hpp"
#include "grail/parameters.hpp"

namespace grail {

// Linear-chain CRF over a tag inventory, with a linear emission layer
// (emit_weight · h + emit_bias) and a transition matrix that carries two
// virtual tags <b> and <e> for the sequence boundaries.
struct CrfSpec {
    std::string prefix;
    std::size_t num_tags = 0;
    std::size_t state_dim = 0;

    std::size_t begin_tag() const { return num_tags; }
    std::size_t end_tag() const { return num_tags + 1; }
    std::size_t trans_dim() const { return num_tags + 2; }

    std::string emit_weight() const { return prefix + ".emit_weight"; }
    std::string emit_bias() const { return prefix + ".emit_bias"; }
    std::string transitions() const { return prefix + ".transitions"; }

    void register_segments(ParameterLayout& layout) const {
        layout.add(emit_weight(), {num_tags, state_dim});
        layout.add(emit_bias(), {num_tags});
        layout.add(transitions(), {trans_dim(), trans_dim()});
    }
};

inline Matrix crf_emissions(const CrfSpec& crf, const Matrix& h, const ParameterVector& params) {
    if (h.cols != crf.state_dim)
        throw std::invalid_argument(crf.prefix + ": state dimension mismatch");
    Matrix em(h.rows, crf.num_tags);
    const auto b = params.segment(crf.emit_bias());
    const auto w = params.segment(crf.emit_weight());
    for (std::size_t i = 0; i < h.rows; ++i) {
        std::copy(b.begin(), b.end(), em.row(i));
        matvec_accum(w, crf.num_tags, crf.state_dim, h.row_span(i), em.row_span(i));
    }
    return em;
}

namespace detail {
inline double trans_at(std::span<const double> a, const CrfSpec& crf, std::size_t from,
                       std::size_t to) {
    return a[from * crf.trans_dim() + to];
}
}  // namespace detail

// Sum of L emission scores and L+1 transition scores, the virtual tags
// standing at both ends of the path.
inline double crf_path_score_emissions(const CrfSpec& crf, const Matrix& em,
                                       const std::vector<int>& path,
                                       const ParameterVector& params) {
    if (path.size() != em.rows)
        throw std::invalid_argument(crf.prefix + ": path length mismatch");
    const auto a = params.segment(crf.transitions());
    double score = 0.0;
    std::size_t prev = crf.begin_tag();
    for (std::size_t i = 0; i < path.size(); ++i) {
        const int t = path[i];
        if (t < 0 || static_cast<std::size_t>(t) >= crf.num_tags)
            throw std::invalid_argument(crf.prefix + ": invalid tag index in path");
        score += em.at(i, static_cast<std::size_t>(t));
        score += detail::trans_at(a, crf, prev, static_cast<std::size_t>(t));
        prev = static_cast<std::size_t>(t);
    }
    score += detail::trans_at(a, crf, prev, crf.end_tag());
    return score;
}

inline double crf_path_score(const CrfSpec& crf, const Matrix& h, const std::vector<int>& path,
                             const ParameterVector& params) {
    return crf_path_score_emissions(crf, crf_emissions(crf, h, params), path, params);
}

// Log-space forward recursion.
inline double crf_log_partition_emissions(const CrfSpec& crf, const Matrix& em,
                                          const ParameterVector& params) {
    const std::size_t len = em.rows;
    if (len == 0) throw std::invalid_argument(crf.prefix + ": empty sequence");
    const auto a = params.segment(crf.transitions());
    const std::size_t nt = crf.num_tags;

    std::vector<double> alpha(nt), next(nt), work(nt);
    for (std::size_t t = 0; t < nt; ++t)
        alpha[t] = em.at(0, t) + detail::trans_at(a, crf, crf.begin_tag(), t);
    for (std::size_t i = 1; i < len; ++i) {
        for (std::size_t t = 0; t < nt; ++t) {
            for (std::size_t s = 0; s < nt; ++s)
                work[s] = alpha[s] + detail::trans_at(a, crf, s, t);
            next[t] = em.at(i, t) + log_sum_exp(work);
        }
        alpha.swap(next);
    }
    for (std::size_t t = 0; t < nt; ++t)
        work[t] = alpha[t] + detail::trans_at(a, crf, t, crf.end_tag());
    return log_sum_exp(work);
}

inline double crf_log_partition(const CrfSpec& crf, const Matrix& h,
                                const ParameterVector& params) {
    return crf_log_partition_emissions(crf, crf_emissions(crf, h, params), params);
}

inline double crf_nll(const CrfSpec& crf, const Matrix& h, const std::vector<int>& gold,
                      const ParameterVector& params) {
    Matrix em = crf_emissions(crf, h, params);
    return crf_log_partition_emissions(crf, em, params) -
           crf_path_score_emissions(crf, em, gold, params);
}

// Forward-backward pass. Fills the L × T position marginals and, when
// `pairwise` is given, accumulates expected transition counts (including
// the virtual boundary rows/columns) into it.
inline double crf_forward_backward(const CrfSpec& crf, const Matrix& em,
                                   const ParameterVector& params, Matrix& marginals,
                                   Matrix* pairwise = nullptr) {
    const std::size_t len = em.rows;
    const std::size_t nt = crf.num_tags;
    const auto a = params.segment(crf.transitions());

    Matrix alpha(len, nt), beta(len, nt);
    std::vector<double> work(nt);
    for (std::size_t t = 0; t < nt; ++t)
        alpha.at(0, t) = em.at(0, t) + detail::trans_at(a, crf, crf.begin_tag(), t);
    for (std::size_t i = 1; i < len; ++i) {
        for (std::size_t t = 0; t < nt; ++t) {
            for (std::size_t s = 0; s < nt; ++s)
                work[s] = alpha.at(i - 1, s) + detail::trans_at(a, crf, s, t);
            alpha.at(i, t) = em.at(i, t) + log_sum_exp(work);
        }
    }
    for (std::size_t t = 0; t < nt; ++t)
        beta.at(len - 1, t) = detail::trans_at(a, crf, t, crf.end_tag());
    for (std::size_t i = len - 1; i-- > 0;) {
        for (std::size_t s = 0; s < nt; ++s) {
            for (std::size_t t = 0; t < nt; ++t)
                work[t] = detail::trans_at(a, crf, s, t) + em.at(i + 1, t) + beta.at(i + 1, t);
            beta.at(i, s) = log_sum_exp(work);
        }
    }
    for (std::size_t t = 0; t < nt; ++t)
        work[t] = alpha.at(len - 1, t) + detail::trans_at(a, crf, t, crf.end_tag());
    const double log_z = log_sum_exp(work);

    marginals = Matrix(len, nt);
    for (std::size_t i = 0; i < len; ++i)
        for (std::size_t t = 0; t < nt; ++t)
            marginals.at(i, t) = std::exp(alpha.at(i, t) + beta.at(i, t) - log_z);

    if (pairwise) {
        *pairwise = Matrix(crf.trans_dim(), crf.trans_dim());
        for (std::size_t t = 0; t < nt; ++t) {
            pairwise->at(crf.begin_tag(), t) += marginals.at(0, t);
            pairwise->at(t, crf.end_tag()) += marginals.at(len - 1, t);
        }
        for (std::size_t i = 0; i + 1 < len; ++i) {
            for (std::size_t s = 0; s < nt; ++s) {
                for (std::size_t t = 0; t < nt; ++t) {
                    pairwise->at(s, t) +=
                        std::exp(alpha.at(i, s) + detail::trans_at(a, crf, s, t) +
                                 em.at(i + 1, t) + beta.at(i + 1, t) - log_z);
                }
            }
        }
    }
    return log_z;
}

// NLL plus analytic gradients: d(emissions) = marginals - onehot(gold),
// d(transitions) = expected counts - gold counts. Returns the NLL and
// fills `d_em` for the caller to push through the emission layer.
inline double crf_nll_grad_emissions(const CrfSpec& crf, const Matrix& em,
                                     const std::vector<int>& gold, const ParameterVector& params,
                                     Matrix& d_em, GradientVector& grad) {
    if (gold.size() != em.rows)
        throw std::invalid_argument(crf.prefix + ": gold path length mismatch");
    Matrix marginals, pairwise;
    const double log_z = crf_forward_backward(crf, em, params, marginals, &pairwise);
    const double gold_score = crf_path_score_emissions(crf, em, gold, params);

    d_em = marginals;
    for (std::size_t i = 0; i < em.rows; ++i)
        d_em.at(i, static_cast<std::size_t>(gold[i])) -= 1.0;

    auto d_a = grad.segment(crf.transitions());
    std::size_t prev = crf.begin_tag();
    for (std::size_t i = 0; i < gold.size(); ++i) {
        pairwise.at(prev, static_cast<std::size_t>(gold[i])) -= 1.0;
        prev = static_cast<std::size_t>(gold[i]);
    }
    pairwise.at(prev, crf.end_tag()) -= 1.0;
    for (std::size_t i = 0; i < pairwise.a.size(); ++i) d_a[i] += pairwise.a[i];

    return log_z - gold_score;
}

// Pushes emission gradients through the linear emission layer; accumulates
// dH for the encoder.
inline void crf_emissions_backward(const CrfSpec& crf, const Matrix& h, const Matrix& d_em,
                                   const ParameterVector& params, GradientVector& grad,
                                   Matrix& dh) {
    const auto w = params.segment(crf.emit_weight());
    auto d_w = grad.segment(crf.emit_weight());
    auto d_b = grad.segment(crf.emit_bias());
    for (std::size_t i = 0; i < h.rows; ++i) {
        matvec_backward(w, crf.num_tags, crf.state_dim, h.row_span(i), d_em.row_span(i), d_w,
                        dh.row_span(i));
        for (std::size_t t = 0; t < crf.num_tags; ++t) d_b[t] += d_em.at(i, t);
    }
}

// Max-scoring path; ties break toward the lower tag index.
inline std::vector<int> crf_viterbi_emissions(const CrfSpec& crf, const Matrix& em,
                                              const ParameterVector& params) {
    const std::size_t len = em.rows;
    if (len == 0) throw std::invalid_argument(crf.prefix + ": empty sequence");
    const auto a = params.segment(crf.transitions());
    const std::size_t nt = crf.num_tags;

    std::vector<double> score(nt), next(nt);
    std::vector<std::vector<int>> back(len, std::vector<int>(nt, 0));
    for (std::size_t t = 0; t < nt; ++t)
        score[t] = em.at(0, t) + detail::trans_at(a, crf, crf.begin_tag(), t);
    for (std::size_t i = 1; i < len; ++i) {
        for (std::size_t t = 0; t < nt; ++t) {
            double best = -std::numeric_limits<double>::infinity();
            int best_s = 0;
            for (std::size_t s = 0; s < nt; ++s) {
                const double v = score[s] + detail::trans_at(a, crf, s, t);
                if (v > best) {
                    best = v;
                    best_s = static_cast<int>(s);
                }
            }
            next[t] = best + em.at(i, t);
            back[i][t] = best_s;
        }
        score.swap(next);
    }
    double best = -std::numeric_limits<double>::infinity();
    int last = 0;
    for (std::size_t t = 0; t < nt; ++t) {
        const double v = score[t] + detail::trans_at(a, crf, t, crf.end_tag());
        if (v > best) {
            best = v;
            last = static_cast<int>(t);
        }
    }
    std::vector<int> path(len);
    path[len - 1] = last;
    for (std::size_t i = len - 1; i > 0; --i) path[i - 1] = back[i][static_cast<std::size_t>(path[i])];
    return path;
}

inline std::vector<int> crf_viterbi(const CrfSpec& crf, const Matrix& h,
                                    const ParameterVector& params) {
    return crf_viterbi_emissions(crf, crf_emissions(crf, h, params), params);
}

// p(path | H) of the Viterbi path, used as an identification confidence.
inline double crf_path_posterior(const CrfSpec& crf, const Matrix& em,
                                 const std::vector<int>& path, const ParameterVector& params) {
    return std::exp(crf_path_score_emissions(crf, em, path, params) -
                    crf_log_partition_emissions(crf, em, params));
}

}  // namespace grail
