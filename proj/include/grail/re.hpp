#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "grail/encoder.hpp"
#include "grail/heads.hpp"
#include "grail/math.hpp"

namespace grail {

struct ReExample {
    std::vector<std::string> tokens;
    std::pair<int, int> head{0, 0};  // token span, end exclusive
    std::pair<int, int> tail{0, 0};
    int relation = -1;
    bool is_labeled = true;
};

struct RelationLabelSet {
    std::vector<std::string> labels;
    int no_relation_id = -1;

    static RelationLabelSet from_labels(std::vector<std::string> labels,
                                        const std::string& no_relation_name = "no_relation") {
        RelationLabelSet set;
        set.labels = std::move(labels);
        for (std::size_t i = 0; i < set.labels.size(); ++i) {
            if (set.labels[i] == no_relation_name) {
                if (set.no_relation_id >= 0)
                    throw DataError("relation label set: duplicate " + no_relation_name);
                set.no_relation_id = static_cast<int>(i);
            }
        }
        if (set.no_relation_id < 0)
            throw DataError("relation label set: missing " + no_relation_name);
        return set;
    }

    int size() const { return static_cast<int>(labels.size()); }
    const std::string& name(int id) const { return labels.at(static_cast<std::size_t>(id)); }
    int index(std::string_view name) const {
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == name) return static_cast<int>(i);
        throw DataError("unknown relation label: " + std::string(name));
    }
};

struct MarkedSentence {
    std::vector<int> ids;
    int pos_e1 = -1;  // index of the opening head marker
    int pos_e2 = -1;  // index of the opening tail marker
};

// Wraps the head span in [E1]/[/E1] and the tail span in [E2]/[/E2] at
// their original positions, whichever comes first textually. Output length
// is L + 4.
inline MarkedSentence insert_markers(const ReExample& ex, const Vocabulary& vocab) {
    const int len = static_cast<int>(ex.tokens.size());
    auto check_span = [&](std::pair<int, int> s, const char* which) {
        if (s.first < 0 || s.second <= s.first || s.second > len)
            throw std::invalid_argument(std::string("insert_markers: invalid ") + which + " span");
    };
    check_span(ex.head, "head");
    check_span(ex.tail, "tail");
    if (ex.head.first < ex.tail.second && ex.tail.first < ex.head.second)
        throw std::invalid_argument("insert_markers: head and tail spans overlap");

    MarkedSentence out;
    out.ids.reserve(ex.tokens.size() + 4);
    for (int i = 0; i <= len; ++i) {
        if (i == ex.head.second) out.ids.push_back(Vocabulary::kE1Close);
        if (i == ex.tail.second) out.ids.push_back(Vocabulary::kE2Close);
        if (i == ex.head.first) {
            out.pos_e1 = static_cast<int>(out.ids.size());
            out.ids.push_back(Vocabulary::kE1Open);
        }
        if (i == ex.tail.first) {
            out.pos_e2 = static_cast<int>(out.ids.size());
            out.ids.push_back(Vocabulary::kE2Open);
        }
        if (i < len) out.ids.push_back(vocab.id(ex.tokens[static_cast<std::size_t>(i)]));
    }
    return out;
}

// Fixed-length relational embedding: the two opening-marker rows of H,
// concatenated.
inline std::vector<double> relational_embedding(const Matrix& h, int pos_e1, int pos_e2) {
    if (pos_e1 < 0 || static_cast<std::size_t>(pos_e1) >= h.rows || pos_e2 < 0 ||
        static_cast<std::size_t>(pos_e2) >= h.rows)
        throw std::invalid_argument("relational_embedding: marker position out of range");
    std::vector<double> out(2 * h.cols);
    auto r1 = h.row_span(static_cast<std::size_t>(pos_e1));
    auto r2 = h.row_span(static_cast<std::size_t>(pos_e2));
    std::copy(r1.begin(), r1.end(), out.begin());
    std::copy(r2.begin(), r2.end(), out.begin() + static_cast<std::ptrdiff_t>(h.cols));
    return out;
}

// Micro P/R/F1 where correct no_relation predictions are ignored: only
// non-no_relation predictions/golds enter the denominators.
inline Prf relation_f1(const std::vector<int>& preds, const std::vector<int>& golds,
                       const RelationLabelSet& labels) {
    if (preds.size() != golds.size())
        throw std::invalid_argument("relation_f1: prediction/gold length mismatch");
    const int no_rel = labels.no_relation_id;
    std::size_t tp = 0, n_pred = 0, n_gold = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (preds[i] != no_rel) ++n_pred;
        if (golds[i] != no_rel) ++n_gold;
        if (preds[i] != no_rel && preds[i] == golds[i]) ++tp;
    }
    return prf_from_counts(tp, n_pred, n_gold);
}

// Vanilla RE model: markers, relational embedding, two-affine classifier,
// sentence-level cross-entropy.
class ReModel {
public:
    using Example = ReExample;
    using Label = int;

    ReModel(Vocabulary vocab, RelationLabelSet labels, EncoderConfig enc_cfg,
            std::uint64_t init_seed)
        : vocab_(std::move(vocab)),
          labels_(std::move(labels)),
          enc_cfg_(enc_cfg),
          head_{"re", 2 * static_cast<std::size_t>(enc_cfg.hidden_dim),
                static_cast<std::size_t>(enc_cfg.hidden_dim),
                static_cast<std::size_t>(labels_.size())},
          params_(build_params(enc_cfg_, vocab_.size(), head_, init_seed)) {}

    const Vocabulary& vocab() const { return vocab_; }
    const RelationLabelSet& labels() const { return labels_; }
    const EncoderConfig& encoder_config() const { return enc_cfg_; }
    ParameterVector& params() { return params_; }
    const ParameterVector& params() const { return params_; }
    LayoutPtr layout_ptr() const { return params_.layout_ptr(); }

    static const Label& label_of(const Example& ex) { return ex.relation; }
    static Example make_example(const Example& unlabeled, Label pseudo) {
        Example ex = unlabeled;
        ex.relation = pseudo;
        ex.is_labeled = false;
        return ex;
    }
    static Label strip_label(Example& ex) {
        Label gold = ex.relation;
        ex.relation = -1;
        ex.is_labeled = false;
        return gold;
    }

    std::vector<double> forward_logits(const Example& ex, TokenStates* states = nullptr,
                                       MarkedSentence* marked = nullptr,
                                       std::vector<double>* rel_emb = nullptr,
                                       std::vector<double>* mid = nullptr) const {
        MarkedSentence ms = insert_markers(ex, vocab_);
        TokenStates st = encode(ms.ids, params_, enc_cfg_);
        std::vector<double> hr = relational_embedding(st.h, ms.pos_e1, ms.pos_e2);
        auto logits = head_.forward(hr, params_, mid);
        if (states) *states = std::move(st);
        if (marked) *marked = std::move(ms);
        if (rel_emb) *rel_emb = std::move(hr);
        return logits;
    }

    Label predict(const Example& ex) const {
        auto logits = forward_logits(ex);
        return static_cast<int>(argmax(logits));
    }

    double loss(const Example& ex, const Label& gold) const {
        check_gold(gold);
        auto logits = forward_logits(ex);
        return softmax_cross_entropy(logits, static_cast<std::size_t>(gold)).loss;
    }

    double loss_and_grad(const Example& ex, const Label& gold, GradientVector& grad) const {
        check_gold(gold);
        TokenStates st;
        MarkedSentence ms;
        std::vector<double> hr, mid;
        auto logits = forward_logits(ex, &st, &ms, &hr, &mid);
        auto ce = softmax_cross_entropy(logits, static_cast<std::size_t>(gold));
        std::vector<double> dy = std::move(ce.prob);
        dy[static_cast<std::size_t>(gold)] -= 1.0;

        std::vector<double> d_hr(hr.size(), 0.0);
        head_.backward(hr, mid, dy, params_, grad, d_hr);

        Matrix dh(st.h.rows, st.h.cols);
        const std::size_t dh_dim = st.h.cols;
        for (std::size_t j = 0; j < dh_dim; ++j) {
            dh.at(static_cast<std::size_t>(ms.pos_e1), j) += d_hr[j];
            dh.at(static_cast<std::size_t>(ms.pos_e2), j) += d_hr[dh_dim + j];
        }
        encode_backward(st, dh, params_, enc_cfg_, grad);
        return ce.loss;
    }

    // Max softmax probability of the predicted relation.
    double confidence(const Example& ex, const Label& pred) const {
        (void)pred;
        auto logits = forward_logits(ex);
        auto p = softmax(logits);
        return *std::max_element(p.begin(), p.end());
    }

    Prf quality(const std::vector<Label>& preds, const std::vector<Label>& golds) const {
        return relation_f1(preds, golds, labels_);
    }

private:
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

    void check_gold(Label gold) const {
        if (gold < 0 || gold >= labels_.size())
            throw std::invalid_argument("re loss: relation index out of range");
    }

    Vocabulary vocab_;
    RelationLabelSet labels_;
    EncoderConfig enc_cfg_;
    TwoLayerHead head_;
    ParameterVector params_;
};

}  // namespace grail
