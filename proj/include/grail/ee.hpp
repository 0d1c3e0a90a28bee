#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "grail/crf.hpp"
#include "grail/encoder.hpp"
#include "grail/heads.hpp"
#include "grail/ner.hpp"

namespace grail {

// Label inventory for event extraction. The role list carries an explicit
// no-role entry (appended last) so every trigger-entity pair is classifiable.
struct EeSchema {
    std::vector<std::string> entity_types;
    std::vector<std::string> event_types;
    std::vector<std::string> roles;  // includes no_role_name, last
    static constexpr const char* kNoRoleName = "no_role";

    static EeSchema from_sets(std::vector<std::string> entity_types,
                              std::vector<std::string> event_types,
                              std::vector<std::string> roles) {
        EeSchema s;
        s.entity_types = std::move(entity_types);
        s.event_types = std::move(event_types);
        s.roles = std::move(roles);
        for (const auto& r : s.roles) {
            if (r == kNoRoleName) throw DataError("ee schema: reserved role name in data");
        }
        s.roles.emplace_back(kNoRoleName);
        return s;
    }

    int no_role_id() const { return static_cast<int>(roles.size()) - 1; }

    static int index_in(const std::vector<std::string>& list, std::string_view name,
                        const char* what) {
        for (std::size_t i = 0; i < list.size(); ++i)
            if (list[i] == name) return static_cast<int>(i);
        throw DataError(std::string("unknown ") + what + ": " + std::string(name));
    }
};

struct Node {
    int start = 0;  // inclusive
    int end = 0;    // exclusive
    int type = -1;  // entity type for mentions, event type for triggers
    auto operator<=>(const Node&) const = default;
};

struct ArgumentEdge {
    int trigger = -1;  // index into triggers
    int entity = -1;   // index into entities
    int role = -1;
    auto operator<=>(const ArgumentEdge&) const = default;
};

struct EventGraph {
    std::vector<Node> entities;
    std::vector<Node> triggers;
    std::vector<ArgumentEdge> arguments;

    bool operator==(const EventGraph&) const = default;
};

struct EventExample {
    std::vector<std::string> tokens;
    EventGraph graph;
    bool is_labeled = true;
};

// Mean of the encoder rows over [start, end).
inline std::vector<double> node_representation(const Matrix& h, int start, int end) {
    if (start < 0 || end <= start || static_cast<std::size_t>(end) > h.rows)
        throw std::invalid_argument("node_representation: invalid span");
    std::vector<double> v(h.cols, 0.0);
    for (int i = start; i < end; ++i) {
        const double* r = h.row(static_cast<std::size_t>(i));
        for (std::size_t j = 0; j < h.cols; ++j) v[j] += r[j];
    }
    const double inv = 1.0 / static_cast<double>(end - start);
    for (double& x : v) x *= inv;
    return v;
}

namespace detail {

template <typename Tuple>
inline std::size_t count_matches(std::vector<Tuple> pred, std::vector<Tuple> gold) {
    std::sort(pred.begin(), pred.end());
    std::sort(gold.begin(), gold.end());
    std::vector<Tuple> common;
    std::set_intersection(pred.begin(), pred.end(), gold.begin(), gold.end(),
                          std::back_inserter(common));
    return common.size();
}

}  // namespace detail

// Trigger classification: offsets and event type must both match.
inline Prf trig_c_f1(const std::vector<EventGraph>& pred, const std::vector<EventGraph>& gold) {
    if (pred.size() != gold.size()) throw std::invalid_argument("trig_c_f1: corpus size mismatch");
    std::size_t tp = 0, n_pred = 0, n_gold = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        using Item = std::tuple<int, int, int>;
        std::vector<Item> p, g;
        for (const auto& t : pred[i].triggers) p.emplace_back(t.start, t.end, t.type);
        for (const auto& t : gold[i].triggers) g.emplace_back(t.start, t.end, t.type);
        n_pred += p.size();
        n_gold += g.size();
        tp += detail::count_matches(p, g);
    }
    return prf_from_counts(tp, n_pred, n_gold);
}

// Argument classification: argument offsets, role, and the event type of
// the attached trigger must all match.
inline Prf arg_c_f1(const std::vector<EventGraph>& pred, const std::vector<EventGraph>& gold) {
    if (pred.size() != gold.size()) throw std::invalid_argument("arg_c_f1: corpus size mismatch");
    std::size_t tp = 0, n_pred = 0, n_gold = 0;
    auto items = [](const EventGraph& gph) {
        using Item = std::tuple<int, int, int, int>;
        std::vector<Item> out;
        for (const auto& e : gph.arguments) {
            const Node& ent = gph.entities.at(static_cast<std::size_t>(e.entity));
            const Node& trig = gph.triggers.at(static_cast<std::size_t>(e.trigger));
            out.emplace_back(ent.start, ent.end, e.role, trig.type);
        }
        return out;
    };
    for (std::size_t i = 0; i < pred.size(); ++i) {
        auto p = items(pred[i]);
        auto g = items(gold[i]);
        n_pred += p.size();
        n_gold += g.size();
        tp += detail::count_matches(p, g);
    }
    return prf_from_counts(tp, n_pred, n_gold);
}

// Vanilla EE model: two CRF taggers identify entity-mention and trigger
// spans (typed paths, types discarded after decoding), then two-affine
// heads classify node types and argument roles over averaged hidden
// states. The training loss is the sum of the two identification NLLs and
// the three mean-reduced classification cross-entropies.
class EeModel {
public:
    using Example = EventExample;
    using Label = EventGraph;

    EeModel(Vocabulary vocab, EeSchema schema, EncoderConfig enc_cfg, std::uint64_t init_seed)
        : vocab_(std::move(vocab)),
          schema_(std::move(schema)),
          enc_cfg_(enc_cfg),
          entity_tags_(TagSet::from_types(schema_.entity_types)),
          trigger_tags_(TagSet::from_types(schema_.event_types)),
          entity_crf_{"ee.entity_crf", static_cast<std::size_t>(entity_tags_.size()),
                      static_cast<std::size_t>(enc_cfg.hidden_dim)},
          trigger_crf_{"ee.trigger_crf", static_cast<std::size_t>(trigger_tags_.size()),
                       static_cast<std::size_t>(enc_cfg.hidden_dim)},
          entity_type_head_{"ee.entity_type", static_cast<std::size_t>(enc_cfg.hidden_dim),
                            static_cast<std::size_t>(enc_cfg.hidden_dim),
                            schema_.entity_types.size()},
          event_type_head_{"ee.event_type", static_cast<std::size_t>(enc_cfg.hidden_dim),
                           static_cast<std::size_t>(enc_cfg.hidden_dim),
                           schema_.event_types.size()},
          role_head_{"ee.role", 2 * static_cast<std::size_t>(enc_cfg.hidden_dim),
                     static_cast<std::size_t>(enc_cfg.hidden_dim), schema_.roles.size()},
          params_(build_params(*this, init_seed)) {}

    const Vocabulary& vocab() const { return vocab_; }
    const EeSchema& schema() const { return schema_; }
    const EncoderConfig& encoder_config() const { return enc_cfg_; }
    const TagSet& entity_tags() const { return entity_tags_; }
    const TagSet& trigger_tags() const { return trigger_tags_; }
    const CrfSpec& entity_crf() const { return entity_crf_; }
    const CrfSpec& trigger_crf() const { return trigger_crf_; }
    ParameterVector& params() { return params_; }
    const ParameterVector& params() const { return params_; }
    LayoutPtr layout_ptr() const { return params_.layout_ptr(); }

    static const Label& label_of(const Example& ex) { return ex.graph; }
    static Example make_example(const Example& unlabeled, Label pseudo) {
        Example ex = unlabeled;
        ex.graph = std::move(pseudo);
        ex.is_labeled = false;
        return ex;
    }
    static Label strip_label(Example& ex) {
        Label gold = std::move(ex.graph);
        ex.graph = EventGraph{};
        ex.is_labeled = false;
        return gold;
    }

    Label predict(const Example& ex) const {
        TokenStates st = encode(vocab_.encode(ex.tokens), params_, enc_cfg_);
        EventGraph g;
        for (const auto& s : decode_spans(crf_viterbi(entity_crf_, st.h, params_), entity_tags_)) {
            auto v = node_representation(st.h, s.start, s.end);
            const int type = static_cast<int>(argmax(entity_type_head_.forward(v, params_)));
            g.entities.push_back({s.start, s.end, type});
        }
        for (const auto& s :
             decode_spans(crf_viterbi(trigger_crf_, st.h, params_), trigger_tags_)) {
            auto v = node_representation(st.h, s.start, s.end);
            const int type = static_cast<int>(argmax(event_type_head_.forward(v, params_)));
            g.triggers.push_back({s.start, s.end, type});
        }
        for (std::size_t ti = 0; ti < g.triggers.size(); ++ti) {
            auto vt = node_representation(st.h, g.triggers[ti].start, g.triggers[ti].end);
            for (std::size_t ei = 0; ei < g.entities.size(); ++ei) {
                auto ve = node_representation(st.h, g.entities[ei].start, g.entities[ei].end);
                std::vector<double> pair = vt;
                pair.insert(pair.end(), ve.begin(), ve.end());
                const int role = static_cast<int>(argmax(role_head_.forward(pair, params_)));
                if (role != schema_.no_role_id())
                    g.arguments.push_back({static_cast<int>(ti), static_cast<int>(ei), role});
            }
        }
        return g;
    }

    double loss(const Example& ex, const Label& gold) const {
        return loss_impl(ex, gold, nullptr);
    }

    double loss_and_grad(const Example& ex, const Label& gold, GradientVector& grad) const {
        return loss_impl(ex, gold, &grad);
    }

    // Mean of the two Viterbi-path posteriors and the max-softmax of every
    // classification decision.
    double confidence(const Example& ex, const Label& pred) const {
        TokenStates st = encode(vocab_.encode(ex.tokens), params_, enc_cfg_);
        std::vector<double> scores;
        {
            Matrix em = crf_emissions(entity_crf_, st.h, params_);
            scores.push_back(crf_path_posterior(entity_crf_, em,
                                                crf_viterbi_emissions(entity_crf_, em, params_),
                                                params_));
        }
        {
            Matrix em = crf_emissions(trigger_crf_, st.h, params_);
            scores.push_back(crf_path_posterior(trigger_crf_, em,
                                                crf_viterbi_emissions(trigger_crf_, em, params_),
                                                params_));
        }
        auto push_max_softmax = [&](const std::vector<double>& logits) {
            auto p = softmax(logits);
            scores.push_back(*std::max_element(p.begin(), p.end()));
        };
        for (const auto& n : pred.entities)
            push_max_softmax(
                entity_type_head_.forward(node_representation(st.h, n.start, n.end), params_));
        for (const auto& n : pred.triggers)
            push_max_softmax(
                event_type_head_.forward(node_representation(st.h, n.start, n.end), params_));
        for (const auto& t : pred.triggers) {
            auto vt = node_representation(st.h, t.start, t.end);
            for (const auto& e : pred.entities) {
                auto ve = node_representation(st.h, e.start, e.end);
                std::vector<double> pair = vt;
                pair.insert(pair.end(), ve.begin(), ve.end());
                push_max_softmax(role_head_.forward(pair, params_));
            }
        }
        double s = 0.0;
        for (double x : scores) s += x;
        return s / static_cast<double>(scores.size());
    }

    Prf quality(const std::vector<Label>& preds, const std::vector<Label>& golds) const {
        return trig_c_f1(preds, golds);
    }

private:
    struct NodeCache {
        std::vector<double> repr;
        int start = 0, end = 0;
    };

    // Scatters d(node representation) back onto the encoder rows.
    static void node_backward(Matrix& dh, const NodeCache& n, std::span<const double> dv) {
        const double inv = 1.0 / static_cast<double>(n.end - n.start);
        for (int i = n.start; i < n.end; ++i) {
            double* r = dh.row(static_cast<std::size_t>(i));
            for (std::size_t j = 0; j < dv.size(); ++j) r[j] += inv * dv[j];
        }
    }

    std::vector<int> typed_path(const std::vector<Node>& nodes, std::size_t len,
                                const TagSet& ts) const {
        std::vector<SpanPrediction> spans;
        spans.reserve(nodes.size());
        for (const auto& n : nodes) spans.push_back({n.start, n.end, n.type});
        return spans_to_tags(spans, len, ts);
    }

    double loss_impl(const Example& ex, const Label& gold, GradientVector* grad) const {
        TokenStates st = encode(vocab_.encode(ex.tokens), params_, enc_cfg_);
        const std::size_t len = st.h.rows;
        Matrix dh(len, st.h.cols);
        double total = 0.0;

        // Identification: one NLL per tagger.
        const auto entity_path = typed_path(gold.entities, len, entity_tags_);
        const auto trigger_path = typed_path(gold.triggers, len, trigger_tags_);
        if (grad) {
            Matrix d_em;
            Matrix em = crf_emissions(entity_crf_, st.h, params_);
            total += crf_nll_grad_emissions(entity_crf_, em, entity_path, params_, d_em, *grad);
            crf_emissions_backward(entity_crf_, st.h, d_em, params_, *grad, dh);
            Matrix em2 = crf_emissions(trigger_crf_, st.h, params_);
            total +=
                crf_nll_grad_emissions(trigger_crf_, em2, trigger_path, params_, d_em, *grad);
            crf_emissions_backward(trigger_crf_, st.h, d_em, params_, *grad, dh);
        } else {
            total += crf_nll(entity_crf_, st.h, entity_path, params_);
            total += crf_nll(trigger_crf_, st.h, trigger_path, params_);
        }

        // Classification: mean-reduced cross-entropy per task; empty tasks
        // contribute nothing.
        std::vector<NodeCache> ents, trigs;
        for (const auto& n : gold.entities)
            ents.push_back({node_representation(st.h, n.start, n.end), n.start, n.end});
        for (const auto& n : gold.triggers)
            trigs.push_back({node_representation(st.h, n.start, n.end), n.start, n.end});

        total += classify_nodes(entity_type_head_, ents, gold.entities, grad, dh);
        total += classify_nodes(event_type_head_, trigs, gold.triggers, grad, dh);
        total += classify_roles(gold, ents, trigs, grad, dh);

        if (grad) encode_backward(st, dh, params_, enc_cfg_, *grad);
        return total;
    }

    double classify_nodes(const TwoLayerHead& head, const std::vector<NodeCache>& nodes,
                          const std::vector<Node>& gold, GradientVector* grad, Matrix& dh) const {
        if (nodes.empty()) return 0.0;
        const double inv = 1.0 / static_cast<double>(nodes.size());
        double total = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (gold[i].type < 0 || static_cast<std::size_t>(gold[i].type) >= head.out_dim)
                throw std::invalid_argument(head.prefix + ": gold type out of range");
            std::vector<double> mid;
            auto logits = head.forward(nodes[i].repr, params_, &mid);
            auto ce = softmax_cross_entropy(logits, static_cast<std::size_t>(gold[i].type));
            total += ce.loss;
            if (grad) {
                std::vector<double> dy = std::move(ce.prob);
                dy[static_cast<std::size_t>(gold[i].type)] -= 1.0;
                for (double& v : dy) v *= inv;
                std::vector<double> dv(nodes[i].repr.size(), 0.0);
                head.backward(nodes[i].repr, mid, dy, params_, *grad, dv);
                node_backward(dh, nodes[i], dv);
            }
        }
        return total * inv;
    }

    double classify_roles(const Label& gold, const std::vector<NodeCache>& ents,
                          const std::vector<NodeCache>& trigs, GradientVector* grad,
                          Matrix& dh) const {
        if (ents.empty() || trigs.empty()) return 0.0;
        std::map<std::pair<int, int>, int> role_of;
        for (const auto& e : gold.arguments) {
            if (e.trigger < 0 || static_cast<std::size_t>(e.trigger) >= trigs.size() ||
                e.entity < 0 || static_cast<std::size_t>(e.entity) >= ents.size())
                throw std::invalid_argument("ee loss: argument edge references invalid node");
            if (e.role < 0 || static_cast<std::size_t>(e.role) >= schema_.roles.size())
                throw std::invalid_argument("ee loss: role index out of range");
            if (!role_of.emplace(std::make_pair(e.trigger, e.entity), e.role).second)
                throw std::invalid_argument("ee loss: duplicate argument edge");
        }
        const std::size_t count = trigs.size() * ents.size();
        const double inv = 1.0 / static_cast<double>(count);
        const std::size_t dh_dim = static_cast<std::size_t>(enc_cfg_.hidden_dim);
        double total = 0.0;
        for (std::size_t ti = 0; ti < trigs.size(); ++ti) {
            for (std::size_t ei = 0; ei < ents.size(); ++ei) {
                auto it = role_of.find({static_cast<int>(ti), static_cast<int>(ei)});
                const int role = it == role_of.end() ? schema_.no_role_id() : it->second;
                std::vector<double> pair = trigs[ti].repr;
                pair.insert(pair.end(), ents[ei].repr.begin(), ents[ei].repr.end());
                std::vector<double> mid;
                auto logits = role_head_.forward(pair, params_, &mid);
                auto ce = softmax_cross_entropy(logits, static_cast<std::size_t>(role));
                total += ce.loss;
                if (grad) {
                    std::vector<double> dy = std::move(ce.prob);
                    dy[static_cast<std::size_t>(role)] -= 1.0;
                    for (double& v : dy) v *= inv;
                    std::vector<double> dpair(pair.size(), 0.0);
                    role_head_.backward(pair, mid, dy, params_, *grad, dpair);
                    node_backward(dh, trigs[ti], std::span<const double>(dpair).first(dh_dim));
                    node_backward(dh, ents[ei],
                                  std::span<const double>(dpair).subspan(dh_dim));
                }
            }
        }
        return total * inv;
    }

    static ParameterVector build_params(const EeModel& m, std::uint64_t seed) {
        m.enc_cfg_.validate();
        auto layout = std::make_shared<ParameterLayout>();
        register_encoder_segments(*layout, m.enc_cfg_, m.vocab_.size());
        m.entity_crf_.register_segments(*layout);
        m.trigger_crf_.register_segments(*layout);
        m.entity_type_head_.register_segments(*layout);
        m.event_type_head_.register_segments(*layout);
        m.role_head_.register_segments(*layout);
        ParameterVector p{LayoutPtr(layout)};
        Rng rng(seed);
        init_parameters(p, rng);
        return p;
    }

    Vocabulary vocab_;
    EeSchema schema_;
    EncoderConfig enc_cfg_;
    TagSet entity_tags_;
    TagSet trigger_tags_;
    CrfSpec entity_crf_;
    CrfSpec trigger_crf_;
    TwoLayerHead entity_type_head_;
    TwoLayerHead event_type_head_;
    TwoLayerHead role_head_;
    ParameterVector params_;
};

}  // namespace grail
