#pragma once

#include <iostream>
#include <string>
#include <vector>

#include "grail/ee.hpp"
#include "grail/finite_diff.hpp"
#include "grail/ner.hpp"
#include "grail/re.hpp"

namespace grail::gradcheck {

// Probe-scale fixtures: the gradient identities are dimension-independent,
// so the suite runs on deliberately tiny models.

inline EncoderConfig probe_encoder() {
    EncoderConfig cfg;
    cfg.embed_dim = 5;
    cfg.window = 1;
    cfg.hidden_dim = 7;
    cfg.max_len = 32;
    return cfg;
}

inline Vocabulary probe_vocab() {
    std::vector<std::vector<std::string>> sentences = {
        {"alpha", "bravo", "charlie", "delta", "echo", "foxtrot", "golf", "hotel"}};
    return Vocabulary::build(sentences, 1);
}

inline std::vector<std::string> random_tokens(const Vocabulary& vocab, Rng& rng,
                                              std::size_t min_len = 3, std::size_t max_len = 7) {
    const std::size_t len = min_len + rng.uniform_index(max_len - min_len + 1);
    std::vector<std::string> toks;
    for (std::size_t i = 0; i < len; ++i) {
        const int id = 6 + static_cast<int>(rng.uniform_index(
                               static_cast<std::size_t>(vocab.size() - 6)));
        toks.push_back(vocab.token(id));
    }
    return toks;
}

// BIO-valid random tag sequence: at each position pick uniformly among the
// legal continuations.
inline std::vector<int> random_bio_tags(std::size_t len, const TagSet& ts, Rng& rng) {
    std::vector<int> tags(len, 0);
    int open_type = -1;
    for (std::size_t i = 0; i < len; ++i) {
        std::vector<int> options{0};
        for (int t = 0; t < ts.num_types(); ++t) options.push_back(ts.begin_tag(t));
        if (open_type >= 0) options.push_back(ts.inside_tag(open_type));
        const int tag = options[rng.uniform_index(options.size())];
        tags[i] = tag;
        open_type = ts.is_outside(tag) ? -1 : ts.type_of(tag);
    }
    return tags;
}

// Non-overlapping random spans with types drawn from [0, num_types).
inline std::vector<Node> random_spans(std::size_t len, int num_types, Rng& rng) {
    std::vector<Node> spans;
    std::size_t pos = rng.uniform_index(2);
    while (pos + 1 <= len) {
        if (rng.uniform() < 0.45 && pos < len) {
            const int width = 1 + static_cast<int>(rng.uniform_index(2));
            const int end = std::min(static_cast<int>(len), static_cast<int>(pos) + width);
            spans.push_back({static_cast<int>(pos), end,
                             static_cast<int>(rng.uniform_index(static_cast<std::size_t>(num_types)))});
            pos = static_cast<std::size_t>(end) + 1;
        } else {
            pos += 1 + rng.uniform_index(2);
        }
    }
    return spans;
}

inline double check_ner(std::uint64_t seed, int draws) {
    Rng rng(seed);
    double worst = 0.0;
    for (int d = 0; d < draws; ++d) {
        NerModel model(probe_vocab(), TagSet::from_types({"PER", "LOC"}), probe_encoder(),
                       rng.next_u64());
        NerExample ex;
        ex.tokens = random_tokens(model.vocab(), rng);
        ex.tags = random_bio_tags(ex.tokens.size(), model.tags(), rng);

        GradientVector analytic(model.layout_ptr());
        model.loss_and_grad(ex, ex.tags, analytic);
        auto numeric = finite_difference_grad(
            [&](const ParameterVector&) { return model.loss(ex, ex.tags); }, model.params());
        worst = std::max(worst, max_relative_error(analytic, numeric));
    }
    return worst;
}

inline double check_re(std::uint64_t seed, int draws) {
    Rng rng(seed);
    double worst = 0.0;
    for (int d = 0; d < draws; ++d) {
        ReModel model(probe_vocab(),
                      RelationLabelSet::from_labels({"founded", "no_relation", "works_for"}),
                      probe_encoder(), rng.next_u64());
        ReExample ex;
        ex.tokens = random_tokens(model.vocab(), rng, 4, 7);
        const int mid = 1 + static_cast<int>(rng.uniform_index(ex.tokens.size() - 2));
        ex.head = {0, mid > 1 ? 1 + static_cast<int>(rng.uniform_index(
                                        static_cast<std::size_t>(mid - 1)))
                              : 1};
        ex.tail = {mid, mid + 1 +
                            static_cast<int>(rng.uniform_index(ex.tokens.size() - mid))};
        ex.relation = static_cast<int>(rng.uniform_index(3));

        GradientVector analytic(model.layout_ptr());
        model.loss_and_grad(ex, ex.relation, analytic);
        auto numeric = finite_difference_grad(
            [&](const ParameterVector&) { return model.loss(ex, ex.relation); }, model.params());
        worst = std::max(worst, max_relative_error(analytic, numeric));
    }
    return worst;
}

inline double check_ee(std::uint64_t seed, int draws) {
    Rng rng(seed);
    double worst = 0.0;
    for (int d = 0; d < draws; ++d) {
        EeModel model(probe_vocab(),
                      EeSchema::from_sets({"PER", "ORG"}, {"attack", "meet"},
                                          {"agent", "place"}),
                      probe_encoder(), rng.next_u64());
        EventExample ex;
        ex.tokens = random_tokens(model.vocab(), rng, 4, 6);
        ex.graph.entities = random_spans(ex.tokens.size(), 2, rng);
        ex.graph.triggers = random_spans(ex.tokens.size(), 2, rng);
        for (std::size_t t = 0; t < ex.graph.triggers.size(); ++t) {
            for (std::size_t e = 0; e < ex.graph.entities.size(); ++e) {
                if (rng.uniform() < 0.5) {
                    ex.graph.arguments.push_back({static_cast<int>(t), static_cast<int>(e),
                                                  static_cast<int>(rng.uniform_index(2))});
                }
            }
        }

        GradientVector analytic(model.layout_ptr());
        model.loss_and_grad(ex, ex.graph, analytic);
        auto numeric = finite_difference_grad(
            [&](const ParameterVector&) { return model.loss(ex, ex.graph); }, model.params());
        worst = std::max(worst, max_relative_error(analytic, numeric));
    }
    return worst;
}

}  // namespace grail::gradcheck

namespace grail::run {

// Finite-difference suite over all three task models at probe scale; the
// gradcheck command fails when any model exceeds the gate.
struct GradcheckReport {
    double ner = 0.0;
    double re = 0.0;
    double ee = 0.0;
    static constexpr double kGate = 1e-4;
    bool pass() const { return ner < kGate && re < kGate && ee < kGate; }
};

inline GradcheckReport gradcheck_suite(std::uint64_t seed, int draws, std::ostream& out) {
    GradcheckReport report;
    report.ner = gradcheck::check_ner(seed, draws);
    out << "gradcheck ner: max relative error " << format_double(report.ner) << "\n";
    report.re = gradcheck::check_re(seed + 1, draws);
    out << "gradcheck re:  max relative error " << format_double(report.re) << "\n";
    report.ee = gradcheck::check_ee(seed + 2, draws);
    out << "gradcheck ee:  max relative error " << format_double(report.ee) << "\n";
    return report;
}

}  // namespace grail::run
