#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "grail/math.hpp"
#include "grail/parameters.hpp"
#include "grail/vocab.hpp"

namespace grail {

struct EncoderConfig {
    int embed_dim = 32;    // d_e
    int window = 2;        // context radius k
    int hidden_dim = 64;   // d_h
    int max_len = 128;

    void validate() const {
        if (embed_dim <= 0 || window < 0 || hidden_dim <= 0 || max_len <= 0)
            throw std::invalid_argument("encoder config: dimensions must be positive");
    }

    int window_width() const { return 2 * window + 1; }
    int mixer_in_dim() const { return window_width() * embed_dim; }
};

inline constexpr const char* kEmbeddingSegment = "encoder.embedding";
inline constexpr const char* kMixerWeightSegment = "encoder.mixer_weight";
inline constexpr const char* kMixerBiasSegment = "encoder.mixer_bias";

inline void register_encoder_segments(ParameterLayout& layout, const EncoderConfig& cfg,
                                      int vocab_size) {
    cfg.validate();
    layout.add(kEmbeddingSegment,
               {static_cast<std::size_t>(vocab_size), static_cast<std::size_t>(cfg.embed_dim)});
    layout.add(kMixerWeightSegment, {static_cast<std::size_t>(cfg.hidden_dim),
                                     static_cast<std::size_t>(cfg.mixer_in_dim())});
    layout.add(kMixerBiasSegment, {static_cast<std::size_t>(cfg.hidden_dim)});
}

// Per-token hidden states plus what the backward pass needs.
struct TokenStates {
    Matrix h;                  // L × d_h, tanh outputs
    std::vector<int> ids;      // input token ids
};

// h_i = tanh(W · concat(emb(x_{i-k}) .. emb(x_{i+k})) + b), with the [PAD]
// embedding standing in for out-of-range positions.
inline TokenStates encode(const std::vector<int>& ids, const ParameterVector& params,
                          const EncoderConfig& cfg) {
    const std::size_t len = ids.size();
    if (len == 0) throw std::invalid_argument("encode: empty token sequence");
    if (len > static_cast<std::size_t>(cfg.max_len))
        throw std::invalid_argument("encode: sentence length " + std::to_string(len) +
                                    " exceeds max_len " + std::to_string(cfg.max_len));

    const auto emb = params.segment(kEmbeddingSegment);
    const auto w = params.segment(kMixerWeightSegment);
    const auto b = params.segment(kMixerBiasSegment);
    const std::size_t de = static_cast<std::size_t>(cfg.embed_dim);
    const std::size_t dh = static_cast<std::size_t>(cfg.hidden_dim);
    const int vocab_size = static_cast<int>(emb.size() / de);

    for (std::size_t i = 0; i < len; ++i) {
        if (ids[i] < 0 || ids[i] >= vocab_size)
            throw std::invalid_argument("encode: token id out of range at position " +
                                        std::to_string(i));
    }

    TokenStates st;
    st.ids = ids;
    st.h = Matrix(len, dh);
    std::vector<double> window(cfg.mixer_in_dim());
    for (std::size_t i = 0; i < len; ++i) {
        for (int s = 0; s < cfg.window_width(); ++s) {
            const long src = static_cast<long>(i) + s - cfg.window;
            const int id =
                (src < 0 || src >= static_cast<long>(len)) ? Vocabulary::kPad : ids[src];
            const double* e = emb.data() + static_cast<std::size_t>(id) * de;
            std::copy(e, e + de, window.begin() + static_cast<std::size_t>(s) * de);
        }
        double* hr = st.h.row(i);
        std::copy(b.begin(), b.end(), hr);
        matvec_accum(w, dh, window.size(), window, {hr, dh});
        for (std::size_t j = 0; j < dh; ++j) hr[j] = std::tanh(hr[j]);
    }
    return st;
}

// Accumulates d(embedding), d(mixer) from the upstream dH. A token that
// appears in several windows receives the sum of its positional
// contributions.
inline void encode_backward(const TokenStates& st, const Matrix& dh, const ParameterVector& params,
                            const EncoderConfig& cfg, GradientVector& grad) {
    const std::size_t len = st.ids.size();
    if (dh.rows != len || dh.cols != static_cast<std::size_t>(cfg.hidden_dim))
        throw std::invalid_argument("encode_backward: upstream gradient shape mismatch");

    const auto emb = params.segment(kEmbeddingSegment);
    const auto w = params.segment(kMixerWeightSegment);
    auto d_emb = grad.segment(kEmbeddingSegment);
    auto d_w = grad.segment(kMixerWeightSegment);
    auto d_b = grad.segment(kMixerBiasSegment);
    const std::size_t de = static_cast<std::size_t>(cfg.embed_dim);
    const std::size_t dh_dim = static_cast<std::size_t>(cfg.hidden_dim);

    std::vector<double> window(cfg.mixer_in_dim());
    std::vector<double> dz(dh_dim);
    std::vector<double> d_window(cfg.mixer_in_dim());
    for (std::size_t i = 0; i < len; ++i) {
        const double* hr = st.h.row(i);
        const double* dhr = dh.row(i);
        for (std::size_t j = 0; j < dh_dim; ++j) dz[j] = dhr[j] * (1.0 - hr[j] * hr[j]);

        for (int s = 0; s < cfg.window_width(); ++s) {
            const long src = static_cast<long>(i) + s - cfg.window;
            const int id =
                (src < 0 || src >= static_cast<long>(len)) ? Vocabulary::kPad : st.ids[src];
            const double* e = emb.data() + static_cast<std::size_t>(id) * de;
            std::copy(e, e + de, window.begin() + static_cast<std::size_t>(s) * de);
        }

        std::fill(d_window.begin(), d_window.end(), 0.0);
        matvec_backward(w, dh_dim, window.size(), window, dz, d_w, d_window);
        for (std::size_t j = 0; j < dh_dim; ++j) d_b[j] += dz[j];

        for (int s = 0; s < cfg.window_width(); ++s) {
            const long src = static_cast<long>(i) + s - cfg.window;
            const int id =
                (src < 0 || src >= static_cast<long>(len)) ? Vocabulary::kPad : st.ids[src];
            double* de_row = d_emb.data() + static_cast<std::size_t>(id) * de;
            const double* dwin = d_window.data() + static_cast<std::size_t>(s) * de;
            for (std::size_t j = 0; j < de; ++j) de_row[j] += dwin[j];
        }
    }
}

// Uniform [-0.1, 0.1] weights, zero biases, from the run seed.
inline void init_parameters(ParameterVector& params, Rng& rng) {
    for (const auto& seg : params.layout().segments()) {
        auto span = params.segment(seg.name);
        const bool is_bias = seg.name.ends_with("_bias") || seg.name.ends_with(".bias");
        for (double& v : span) v = is_bias ? 0.0 : rng.uniform(-0.1, 0.1);
    }
}

}  // namespace grail
