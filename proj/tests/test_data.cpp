#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>

#include "grail/data.hpp"

using namespace grail;

namespace {

// Template re-matcher: checks that a generated sentence plus gold spans is
// producible by some template, with every slot filled from the slot type's
// lexicon.
bool ner_template_consistent(const NerExample& ex, const NerCorpus& corpus, int lexicon_size) {
    std::map<std::string, std::set<std::vector<std::string>>> lexicon;
    for (const std::string type : {"PER", "LOC", "ORG", "DATE"}) {
        for (int i = 0; i < lexicon_size; ++i)
            lexicon[type].insert(synth::filler_tokens(type, i));
    }
    auto spans = decode_spans(ex.tags, corpus.tags);
    for (const auto& tpl : synth::ner_templates()) {
        std::size_t pos = 0;
        std::size_t span_idx = 0;
        bool ok = true;
        for (const auto& item : tpl.items) {
            if (item.starts_with('<')) {
                const std::string type = item.substr(1, item.size() - 2);
                if (span_idx >= spans.size()) {
                    ok = false;
                    break;
                }
                const auto& sp = spans[span_idx];
                if (static_cast<std::size_t>(sp.start) != pos ||
                    corpus.tags.type_name(sp.type) != type) {
                    ok = false;
                    break;
                }
                std::vector<std::string> surface(
                    ex.tokens.begin() + sp.start, ex.tokens.begin() + sp.end);
                if (!lexicon[type].count(surface)) {
                    ok = false;
                    break;
                }
                pos = static_cast<std::size_t>(sp.end);
                ++span_idx;
            } else {
                if (pos >= ex.tokens.size() || ex.tokens[pos] != item) {
                    ok = false;
                    break;
                }
                ++pos;
            }
        }
        if (ok && pos == ex.tokens.size() && span_idx == spans.size()) return true;
    }
    return false;
}

}  // namespace

TEST_CASE("conll round trip") {
    const std::string text =
        "ana\tB-PER\n"
        "visited\tO\n"
        "arden\tB-LOC\n"
        "\n"
        "acme\tB-ORG\n"
        "labs\tI-ORG\n";
    auto corpus = read_conll_text(text);
    REQUIRE(corpus.examples.size() == 2);
    REQUIRE(corpus.examples[0].tokens.size() == 3);
    REQUIRE(corpus.examples[1].tokens.size() == 2);
    REQUIRE(conll_to_text(corpus) == text);
}

TEST_CASE("conll empty file gives empty corpus") {
    auto corpus = read_conll_text("");
    REQUIRE(corpus.examples.empty());
}

TEST_CASE("conll malformed and BIO-invalid inputs") {
    REQUIRE_THROWS_WITH(read_conll_text("ana B-PER\n"),
                        Catch::Matchers::ContainsSubstring("line 1"));
    REQUIRE_THROWS_WITH(read_conll_text("ana\tB-PER\nbad\tX-PER\n"),
                        Catch::Matchers::ContainsSubstring("line 2"));
    REQUIRE_THROWS_WITH(read_conll_text("ana\tI-PER\n"),
                        Catch::Matchers::ContainsSubstring("BIO-invalid"));
    REQUIRE_THROWS_WITH(read_conll_text("a\tB-PER\nb\tI-LOC\n"),
                        Catch::Matchers::ContainsSubstring("BIO-invalid"));
}

TEST_CASE("re jsonl round trip and errors") {
    const std::string text =
        R"({"tokens":["ana","founded","acme"],"head":[0,1],"tail":[2,3],"relation":"founded"})"
        "\n"
        R"({"tokens":["x","y"],"head":[0,1],"tail":[1,2],"relation":"no_relation"})"
        "\n";
    auto corpus = read_re_jsonl_text(text);
    REQUIRE(corpus.examples.size() == 2);
    REQUIRE(corpus.labels.name(corpus.examples[0].relation) == "founded");
    REQUIRE(re_jsonl_to_text(corpus) == text);

    REQUIRE_THROWS_WITH(read_re_jsonl_text("{not json}\n"),
                        Catch::Matchers::ContainsSubstring("line 1"));
    REQUIRE_THROWS_WITH(
        read_re_jsonl_text(
            R"({"tokens":["a"],"head":[0,2],"tail":[0,1],"relation":"r"})" "\n"),
        Catch::Matchers::ContainsSubstring("head"));
    REQUIRE_THROWS_WITH(
        read_re_jsonl_text(R"({"tokens":["a"],"head":[0,1],"relation":"r"})" "\n"),
        Catch::Matchers::ContainsSubstring("line 1"));
}

TEST_CASE("ee jsonl round trip and validation") {
    const std::string text =
        R"({"tokens":["acme","attacked","arden"],"entities":[{"start":0,"end":1,"type":"ORG"},{"start":2,"end":3,"type":"LOC"}],"triggers":[{"start":1,"end":2,"event_type":"conflict.attack"}],"arguments":[{"trigger":0,"entity":0,"role":"attacker"}]})"
        "\n";
    auto corpus = read_ee_jsonl_text(text);
    REQUIRE(corpus.examples.size() == 1);
    REQUIRE(corpus.schema.entity_types == std::vector<std::string>{"LOC", "ORG"});
    REQUIRE(corpus.schema.roles.back() == "no_role");
    REQUIRE(ee_jsonl_to_text(corpus) == text);

    REQUIRE_THROWS_WITH(
        read_ee_jsonl_text(
            R"({"tokens":["a"],"entities":[],"triggers":[],"arguments":[{"trigger":0,"entity":0,"role":"r"}]})"
            "\n"),
        Catch::Matchers::ContainsSubstring("invalid node index"));

    const std::string dup =
        R"({"tokens":["a","b"],"entities":[{"start":0,"end":1,"type":"T"}],"triggers":[{"start":1,"end":2,"event_type":"E"}],"arguments":[{"trigger":0,"entity":0,"role":"r"},{"trigger":0,"entity":0,"role":"r"}]})"
        "\n";
    REQUIRE_THROWS_WITH(read_ee_jsonl_text(dup),
                        Catch::Matchers::ContainsSubstring("duplicate argument edge"));
}

TEST_CASE("generated corpora round-trip byte-identically") {
    SynthSpec spec;
    spec.sentences = 40;
    spec.seed = 11;

    spec.task = "ner";
    auto ner = generate_synthetic_ner(spec);
    REQUIRE(read_conll_text(conll_to_text(ner)).examples.size() == 40);
    REQUIRE(conll_to_text(read_conll_text(conll_to_text(ner))) == conll_to_text(ner));

    spec.task = "re";
    auto re = generate_synthetic_re(spec);
    REQUIRE(re_jsonl_to_text(read_re_jsonl_text(re_jsonl_to_text(re))) == re_jsonl_to_text(re));

    spec.task = "ee";
    auto ee = generate_synthetic_ee(spec);
    REQUIRE(ee_jsonl_to_text(read_ee_jsonl_text(ee_jsonl_to_text(ee))) == ee_jsonl_to_text(ee));
}

TEST_CASE("segment_unlabeled balanced partition") {
    Rng rng(5);
    std::vector<int> ids(100);
    std::iota(ids.begin(), ids.end(), 0);
    auto segs = segment_unlabeled(ids, 10, rng);
    REQUIRE(segs.size() == 10);
    for (const auto& s : segs) REQUIRE(s.size() == 10);

    Rng rng2(5);
    std::vector<int> seven = {0, 1, 2, 3, 4, 5, 6};
    auto s3 = segment_unlabeled(seven, 3, rng2);
    REQUIRE(s3[0].size() == 3);
    REQUIRE(s3[1].size() == 2);
    REQUIRE(s3[2].size() == 2);
}

TEST_CASE("segment_unlabeled union and disjointness on random inputs") {
    Rng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 1 + rng.uniform_index(50);
        const int k = 1 + static_cast<int>(rng.uniform_index(8));
        std::vector<int> ids(n);
        std::iota(ids.begin(), ids.end(), 100);
        auto segs = segment_unlabeled(ids, k, rng);
        std::multiset<int> all;
        for (const auto& s : segs) all.insert(s.begin(), s.end());
        REQUIRE(all.size() == n);
        REQUIRE(std::set<int>(all.begin(), all.end()).size() == n);
        std::size_t max_size = 0, min_size = n + 1;
        for (const auto& s : segs) {
            max_size = std::max(max_size, s.size());
            min_size = std::min(min_size, s.size());
        }
        REQUIRE(max_size - min_size <= 1);
    }
}

TEST_CASE("stratified split: exact fraction case") {
    // 100 examples, 2 classes 50/50, fraction 0.1 -> 5 + 5 labeled.
    SplitSpec spec;
    spec.mode = SplitSpec::Mode::fraction;
    spec.fraction = 0.1;
    spec.unlabeled_fraction = 0.5;
    spec.segments = 5;
    auto manifest = stratified_split(
        100, [](int i) { return i < 50 ? "a" : "b"; }, spec);
    REQUIRE(manifest.labeled.size() == 10);
    std::size_t class_a = 0;
    for (int id : manifest.labeled)
        if (id < 50) ++class_a;
    REQUIRE(class_a == 5);
    REQUIRE(manifest.unlabeled.size() == 50);
}

TEST_CASE("stratified split: k-shot gives k per class") {
    SplitSpec spec;
    spec.mode = SplitSpec::Mode::kshot;
    spec.k = 5;
    spec.unlabeled_fraction = 0.3;
    auto manifest = stratified_split(
        90, [](int i) { return std::to_string(i % 3); }, spec);
    REQUIRE(manifest.labeled.size() == 15);
    std::map<int, int> counts;
    for (int id : manifest.labeled) ++counts[id % 3];
    for (auto [cls, n] : counts) REQUIRE(n == 5);

    spec.k = 40;
    REQUIRE_THROWS_WITH(stratified_split(
                            90, [](int i) { return std::to_string(i % 3); }, spec),
                        Catch::Matchers::ContainsSubstring("class '0'"));
}

TEST_CASE("stratified split: disjointness and histogram preservation") {
    Rng rng(23);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 60 + rng.uniform_index(80);
        std::vector<std::string> keys(n);
        std::map<std::string, long> hist;
        for (std::size_t i = 0; i < n; ++i) {
            keys[i] = std::string(1, static_cast<char>('a' + rng.uniform_index(4)));
            ++hist[keys[i]];
        }
        SplitSpec spec;
        spec.mode = SplitSpec::Mode::fraction;
        spec.fraction = 0.2;
        spec.unlabeled_fraction = 0.5;
        spec.seed = 100 + static_cast<std::uint64_t>(trial);
        auto manifest = stratified_split(
            n, [&](int i) { return keys[static_cast<std::size_t>(i)]; }, spec);

        std::set<int> labeled(manifest.labeled.begin(), manifest.labeled.end());
        std::set<int> unlabeled(manifest.unlabeled.begin(), manifest.unlabeled.end());
        for (int id : unlabeled) REQUIRE_FALSE(labeled.count(id));

        std::map<std::string, long> labeled_hist;
        for (int id : manifest.labeled) ++labeled_hist[keys[static_cast<std::size_t>(id)]];
        for (auto& [cls, total] : hist) {
            const double expected = 0.2 * static_cast<double>(total);
            REQUIRE(std::fabs(static_cast<double>(labeled_hist[cls]) - expected) <= 1.0);
        }

        // Segment union must equal the unlabeled set.
        std::set<int> from_segments;
        for (const auto& s : manifest.segments)
            from_segments.insert(s.begin(), s.end());
        REQUIRE(from_segments == unlabeled);
    }
}

TEST_CASE("splits are deterministic under the seed") {
    SplitSpec spec;
    spec.mode = SplitSpec::Mode::fraction;
    spec.fraction = 0.1;
    spec.seed = 42;
    auto key = [](int i) { return std::to_string(i % 4); };
    auto a = stratified_split(200, key, spec);
    auto b = stratified_split(200, key, spec);
    REQUIRE(a.labeled == b.labeled);
    REQUIRE(a.unlabeled == b.unlabeled);
    REQUIRE(a.segments == b.segments);
    REQUIRE(manifest_to_json(a) == manifest_to_json(b));

    auto restored = manifest_from_json(manifest_to_json(a));
    REQUIRE(restored.labeled == a.labeled);
    REQUIRE(restored.segments == a.segments);
}

TEST_CASE("synthetic generation is deterministic") {
    SynthSpec spec;
    spec.task = "ner";
    spec.sentences = 50;
    spec.seed = 31;
    auto a = generate_synthetic_ner(spec);
    auto b = generate_synthetic_ner(spec);
    REQUIRE(conll_to_text(a) == conll_to_text(b));

    spec.seed = 32;
    auto c = generate_synthetic_ner(spec);
    REQUIRE(conll_to_text(a) != conll_to_text(c));
}

TEST_CASE("noise-free synthetic ner is template consistent") {
    SynthSpec spec;
    spec.task = "ner";
    spec.sentences = 120;
    spec.noise = 0.0;
    spec.seed = 7;
    auto corpus = generate_synthetic_ner(spec);
    REQUIRE(corpus.tags.num_types() == 4);
    for (const auto& ex : corpus.examples)
        REQUIRE(ner_template_consistent(ex, corpus, spec.lexicon_size));
}

TEST_CASE("noisy synthetic ner breaks template consistency somewhere") {
    SynthSpec spec;
    spec.task = "ner";
    spec.sentences = 200;
    spec.noise = 0.3;
    spec.seed = 7;
    auto corpus = generate_synthetic_ner(spec);
    bool any_inconsistent = false;
    for (const auto& ex : corpus.examples)
        if (!ner_template_consistent(ex, corpus, spec.lexicon_size)) any_inconsistent = true;
    REQUIRE(any_inconsistent);
}

TEST_CASE("round-robin template usage counts are exact") {
    SynthSpec spec;
    spec.task = "re";
    spec.sentences = 60;  // 6 templates -> 10 each
    spec.round_robin = true;
    spec.noise = 0.0;
    auto corpus = generate_synthetic_re(spec);
    std::map<int, int> counts;
    for (const auto& ex : corpus.examples) ++counts[ex.relation];
    // Templates map to relations {founded, based_in, works_for, born_in,
    // no_relation x2}: each template used exactly 10 times.
    REQUIRE(counts[corpus.labels.index("founded")] == 10);
    REQUIRE(counts[corpus.labels.index("based_in")] == 10);
    REQUIRE(counts[corpus.labels.index("works_for")] == 10);
    REQUIRE(counts[corpus.labels.index("born_in")] == 10);
    REQUIRE(counts[corpus.labels.no_relation_id] == 20);
}

TEST_CASE("random template usage stays within multinomial expectation") {
    SynthSpec spec;
    spec.task = "ner";
    spec.sentences = 1000;
    spec.seed = 13;
    auto corpus = generate_synthetic_ner(spec);
    // 5 templates, expected 200 draws each; 5 sigma ~ 63.
    std::map<std::string, int> first_token_counts;
    for (const auto& ex : corpus.examples) {
        auto spans = decode_spans(ex.tags, corpus.tags);
        std::string key = spans.empty() ? "none" : corpus.tags.type_name(spans.front().type);
        ++first_token_counts[key];
    }
    REQUIRE(std::fabs(first_token_counts["none"] - 200.0) < 65.0);
}

TEST_CASE("synthetic ee graphs are well formed") {
    SynthSpec spec;
    spec.task = "ee";
    spec.sentences = 80;
    spec.seed = 3;
    auto corpus = generate_synthetic_ee(spec);
    for (const auto& ex : corpus.examples) {
        REQUIRE_FALSE(ex.graph.triggers.empty());
        for (const auto& a : ex.graph.arguments) {
            REQUIRE(a.trigger >= 0);
            REQUIRE(static_cast<std::size_t>(a.trigger) < ex.graph.triggers.size());
            REQUIRE(a.entity >= 0);
            REQUIRE(static_cast<std::size_t>(a.entity) < ex.graph.entities.size());
            REQUIRE(a.role >= 0);
            REQUIRE(a.role < corpus.schema.no_role_id());
        }
    }
}

TEST_CASE("pseudo label quality agrees with the task metrics") {
    auto ts = TagSet::from_types({"PER"});
    std::vector<std::vector<int>> gold = {{1, 2, 0}, {0, 1, 0}};
    REQUIRE(pseudo_label_quality(gold, gold, ts).f1 == 1.0);
    std::vector<std::vector<int>> all_o = {{0, 0, 0}, {0, 0, 0}};
    REQUIRE(pseudo_label_quality(all_o, gold, ts).f1 == 0.0);

    // Cross-module equality against span_f1 on a shared fixture.
    std::vector<std::vector<int>> pred = {{1, 0, 0}, {0, 1, 2}};
    std::vector<std::vector<SpanPrediction>> pred_spans, gold_spans;
    for (const auto& t : pred) pred_spans.push_back(decode_spans(t, ts));
    for (const auto& t : gold) gold_spans.push_back(decode_spans(t, ts));
    auto direct = span_f1(pred_spans, gold_spans);
    auto via_quality = pseudo_label_quality(pred, gold, ts);
    REQUIRE(via_quality.f1 == direct.f1);

    REQUIRE_THROWS_AS(pseudo_label_quality(pred, std::vector<std::vector<int>>{{0}}, ts),
                      DataError);

    auto labels = RelationLabelSet::from_labels({"r", "no_relation"});
    REQUIRE(pseudo_label_quality(std::vector<int>{0}, std::vector<int>{0}, labels).f1 == 1.0);
}

TEST_CASE("split class keys") {
    SynthSpec spec;
    spec.task = "ner";
    spec.sentences = 30;
    auto ner = generate_synthetic_ner(spec);
    for (int i = 0; i < 30; ++i) {
        auto key = split_class_key(ner, i);
        auto spans = decode_spans(ner.examples[static_cast<std::size_t>(i)].tags, ner.tags);
        if (spans.empty()) {
            REQUIRE(key == "O");
        } else {
            REQUIRE(key == ner.tags.type_name(spans.front().type));
        }
    }

    spec.task = "re";
    auto re = generate_synthetic_re(spec);
    REQUIRE(split_class_key(re, 0) == re.labels.name(re.examples[0].relation));

    spec.task = "ee";
    auto ee = generate_synthetic_ee(spec);
    REQUIRE(split_class_key(ee, 0) ==
            ee.schema.event_types[static_cast<std::size_t>(ee.examples[0].graph.triggers[0].type)]);
}
