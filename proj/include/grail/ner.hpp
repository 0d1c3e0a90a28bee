#pragma once

#include <algorithm>
#include <compare>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "grail/encoder.hpp"
#include "grail/heads.hpp"
#include "grail/math.hpp"

namespace grail {

// BIO tag inventory over an entity type list. Index 0 is O; each type t
// contributes B-t and I-t in type order.
class TagSet {
public:
    TagSet() = default;

    static TagSet from_types(std::vector<std::string> types) {
        TagSet ts;
        ts.types_ = std::move(types);
        ts.tags_.push_back("O");
        for (const auto& t : ts.types_) {
            ts.tags_.push_back("B-" + t);
            ts.tags_.push_back("I-" + t);
        }
        for (std::size_t i = 0; i < ts.tags_.size(); ++i) ts.index_[ts.tags_[i]] = static_cast<int>(i);
        return ts;
    }

    int size() const { return static_cast<int>(tags_.size()); }
    int num_types() const { return static_cast<int>(types_.size()); }
    const std::vector<std::string>& types() const { return types_; }
    const std::string& tag_name(int idx) const { return tags_.at(static_cast<std::size_t>(idx)); }
    const std::string& type_name(int type_idx) const {
        return types_.at(static_cast<std::size_t>(type_idx));
    }

    int tag_index(std::string_view name) const {
        auto it = index_.find(std::string(name));
        if (it == index_.end()) throw DataError("unknown tag: " + std::string(name));
        return it->second;
    }

    bool is_outside(int tag) const { return tag == 0; }
    bool is_begin(int tag) const { return tag > 0 && (tag - 1) % 2 == 0; }
    bool is_inside(int tag) const { return tag > 0 && (tag - 1) % 2 == 1; }
    int type_of(int tag) const { return tag == 0 ? -1 : (tag - 1) / 2; }
    int begin_tag(int type_idx) const { return 1 + 2 * type_idx; }
    int inside_tag(int type_idx) const { return 2 + 2 * type_idx; }

    // I-t only after B-t or I-t of the same type.
    bool bio_valid(const std::vector<int>& tags) const {
        int open_type = -1;
        for (int t : tags) {
            if (t < 0 || t >= size()) return false;
            if (is_inside(t)) {
                if (open_type != type_of(t)) return false;
            }
            open_type = is_outside(t) ? -1 : type_of(t);
        }
        return true;
    }

private:
    std::vector<std::string> types_;
    std::vector<std::string> tags_;
    std::map<std::string, int> index_;
};

struct NerExample {
    std::vector<std::string> tokens;
    std::vector<int> tags;
    bool is_labeled = true;
};

struct SpanPrediction {
    int start = 0;  // inclusive
    int end = 0;    // exclusive
    int type = 0;
    auto operator<=>(const SpanPrediction&) const = default;
};

// Maximal spans from a (possibly BIO-invalid) tag sequence. An I-t with no
// open span of type t opens a new span; a type change closes the previous
// span.
inline std::vector<SpanPrediction> decode_spans(const std::vector<int>& tags, const TagSet& ts) {
    std::vector<SpanPrediction> spans;
    int open_type = -1;
    int open_start = -1;
    auto close = [&](int end) {
        if (open_type >= 0) spans.push_back({open_start, end, open_type});
        open_type = -1;
    };
    for (std::size_t i = 0; i < tags.size(); ++i) {
        const int t = tags[i];
        if (ts.is_outside(t)) {
            close(static_cast<int>(i));
        } else if (ts.is_begin(t)) {
            close(static_cast<int>(i));
            open_type = ts.type_of(t);
            open_start = static_cast<int>(i);
        } else {  // inside
            if (open_type != ts.type_of(t)) {
                close(static_cast<int>(i));
                open_type = ts.type_of(t);
                open_start = static_cast<int>(i);
            }
        }
    }
    close(static_cast<int>(tags.size()));
    return spans;
}

// Inverse of decode_spans for non-overlapping spans.
inline std::vector<int> spans_to_tags(const std::vector<SpanPrediction>& spans, std::size_t length,
                                      const TagSet& ts) {
    std::vector<int> tags(length, 0);
    for (const auto& s : spans) {
        if (s.start < 0 || s.end <= s.start || static_cast<std::size_t>(s.end) > length)
            throw std::invalid_argument("spans_to_tags: span out of bounds");
        tags[static_cast<std::size_t>(s.start)] = ts.begin_tag(s.type);
        for (int i = s.start + 1; i < s.end; ++i)
            tags[static_cast<std::size_t>(i)] = ts.inside_tag(s.type);
    }
    return tags;
}

// Micro P/R/F1 over exact (start, end, type) matches.
inline Prf span_f1(const std::vector<std::vector<SpanPrediction>>& pred,
                   const std::vector<std::vector<SpanPrediction>>& gold) {
    if (pred.size() != gold.size())
        throw std::invalid_argument("span_f1: sentence count mismatch");
    std::size_t tp = 0, n_pred = 0, n_gold = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        std::set<SpanPrediction> gs(gold[i].begin(), gold[i].end());
        n_gold += gs.size();
        std::set<SpanPrediction> ps(pred[i].begin(), pred[i].end());
        n_pred += ps.size();
        for (const auto& s : ps) tp += gs.count(s);
    }
    return prf_from_counts(tp, n_pred, n_gold);
}

// Vanilla NER model: windowed encoder plus a two-affine tagging head with
// per-token softmax cross-entropy.
class NerModel {
public:
    using Example = NerExample;
    using Label = std::vector<int>;

    NerModel(Vocabulary vocab, TagSet tags, EncoderConfig enc_cfg, std::uint64_t init_seed)
        : vocab_(std::move(vocab)),
          tags_(std::move(tags)),
          enc_cfg_(enc_cfg),
          head_{"ner", static_cast<std::size_t>(enc_cfg.hidden_dim),
                static_cast<std::size_t>(enc_cfg.hidden_dim),
                static_cast<std::size_t>(tags_.size())},
          params_(build_params(enc_cfg_, vocab_.size(), head_, init_seed)) {}

    const Vocabulary& vocab() const { return vocab_; }
    const TagSet& tags() const { return tags_; }
    const EncoderConfig& encoder_config() const { return enc_cfg_; }
    ParameterVector& params() { return params_; }
    const ParameterVector& params() const { return params_; }
    LayoutPtr layout_ptr() const { return params_.layout_ptr(); }

    static const std::vector<std::string>& input_of(const Example& ex) { return ex.tokens; }
    static const Label& label_of(const Example& ex) { return ex.tags; }
    static Example make_example(const Example& unlabeled, Label pseudo) {
        Example ex = unlabeled;
        ex.tags = std::move(pseudo);
        ex.is_labeled = false;
        return ex;
    }
    static Label strip_label(Example& ex) {
        Label gold = std::move(ex.tags);
        ex.tags.clear();
        ex.is_labeled = false;
        return gold;
    }

    Matrix forward_logits(const Example& ex, TokenStates* states = nullptr,
                          Matrix* hidden = nullptr) const {
        TokenStates st = encode(vocab_.encode(ex.tokens), params_, enc_cfg_);
        Matrix logits(st.h.rows, static_cast<std::size_t>(tags_.size()));
        Matrix mid(st.h.rows, head_.hidden_dim);
        for (std::size_t i = 0; i < st.h.rows; ++i) {
            std::vector<double> m;
            auto y = head_.forward(st.h.row_span(i), params_, &m);
            std::copy(y.begin(), y.end(), logits.row(i));
            std::copy(m.begin(), m.end(), mid.row(i));
        }
        if (states) *states = std::move(st);
        if (hidden) *hidden = std::move(mid);
        return logits;
    }

    Label predict(const Example& ex) const {
        Matrix logits = forward_logits(ex);
        Label out(logits.rows);
        for (std::size_t i = 0; i < logits.rows; ++i)
            out[i] = static_cast<int>(argmax(logits.row_span(i)));
        return out;
    }

    // Mean over tokens of -log softmax(logits)[gold].
    double loss(const Example& ex, const Label& gold) const {
        Matrix logits = forward_logits(ex);
        return loss_from_logits(logits, gold);
    }

    double loss_and_grad(const Example& ex, const Label& gold, GradientVector& grad) const {
        TokenStates st;
        Matrix mid;
        Matrix logits = forward_logits(ex, &st, &mid);
        check_gold(logits.rows, gold);
        const double inv_len = 1.0 / static_cast<double>(logits.rows);
        Matrix dh(st.h.rows, st.h.cols);
        double total = 0.0;
        for (std::size_t i = 0; i < logits.rows; ++i) {
            auto ce = softmax_cross_entropy(logits.row_span(i),
                                            static_cast<std::size_t>(gold[i]));
            total += ce.loss;
            std::vector<double> dy = std::move(ce.prob);
            dy[static_cast<std::size_t>(gold[i])] -= 1.0;
            for (double& v : dy) v *= inv_len;
            head_.backward(st.h.row_span(i), mid.row_span(i), dy, params_, grad,
                           dh.row_span(i));
        }
        encode_backward(st, dh, params_, enc_cfg_, grad);
        return total * inv_len;
    }

    // Mean over tokens of the max softmax probability.
    double confidence(const Example& ex, const Label& pred) const {
        (void)pred;
        Matrix logits = forward_logits(ex);
        double s = 0.0;
        for (std::size_t i = 0; i < logits.rows; ++i) {
            auto p = softmax(logits.row_span(i));
            s += *std::max_element(p.begin(), p.end());
        }
        return s / static_cast<double>(logits.rows);
    }

    Prf quality(const std::vector<Label>& preds, const std::vector<Label>& golds) const {
        std::vector<std::vector<SpanPrediction>> ps, gs;
        ps.reserve(preds.size());
        gs.reserve(golds.size());
        for (const auto& p : preds) ps.push_back(decode_spans(p, tags_));
        for (const auto& g : golds) gs.push_back(decode_spans(g, tags_));
        return span_f1(ps, gs);
    }

private:
    double loss_from_logits(const Matrix& logits, const Label& gold) const {
        check_gold(logits.rows, gold);
        double total = 0.0;
        for (std::size_t i = 0; i < logits.rows; ++i)
            total += softmax_cross_entropy(logits.row_span(i),
                                           static_cast<std::size_t>(gold[i]))
                         .loss;
        return total / static_cast<double>(logits.rows);
    }

    void check_gold(std::size_t len, const Label& gold) const {
        if (gold.size() != len) throw std::invalid_argument("ner loss: tag/token length mismatch");
        for (int t : gold) {
            if (t < 0 || t >= tags_.size())
                throw std::invalid_argument("ner loss: gold tag index out of range");
        }
    }

    static ParameterVector build_params(const EncoderConfig& cfg, int vocab_size,
                                         const TwoLayerHead& head, std::uint64_t seed) {
        cfg.validate();
        auto layout = std::make_shared<ParameterLayout>();
        register_encoder_segments(*layout, cfg, vocab_size);
        head.register_segments(*layout);
        ParameterVector p{LayoutPtr(layout)};
        Rng rng(seed);
        init_parameters(p, rng);
        return p;
    }

    Vocabulary vocab_;
    TagSet tags_;
    EncoderConfig enc_cfg_;
    TwoLayerHead head_;
    ParameterVector params_;
};

}  // namespace grail
