#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "grail/common.hpp"
#include "grail/ee.hpp"
#include "grail/ner.hpp"
#include "grail/re.hpp"

namespace grail {

using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Corpora
// ---------------------------------------------------------------------------

struct NerCorpus {
    TagSet tags;
    std::vector<NerExample> examples;
};

struct ReCorpus {
    RelationLabelSet labels;
    std::vector<ReExample> examples;
};

struct EeCorpus {
    EeSchema schema;
    std::vector<EventExample> examples;
};

// ---------------------------------------------------------------------------
// CoNLL format: one `token<TAB>tag` per line, blank line between sentences.
// ---------------------------------------------------------------------------

inline NerCorpus read_conll_text(const std::string& text) {
    std::vector<std::vector<std::pair<std::string, std::string>>> sentences;
    std::vector<std::pair<std::string, std::string>> current;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    std::set<std::string> types;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            if (!current.empty()) sentences.push_back(std::move(current));
            current.clear();
            continue;
        }
        const auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size())
            throw DataError("conll line " + std::to_string(line_no) +
                            ": expected token<TAB>tag");
        std::string tok = line.substr(0, tab);
        std::string tag = line.substr(tab + 1);
        if (tag != "O") {
            if (tag.size() < 3 || (tag[0] != 'B' && tag[0] != 'I') || tag[1] != '-')
                throw DataError("conll line " + std::to_string(line_no) + ": malformed tag '" +
                                tag + "'");
            types.insert(tag.substr(2));
        }
        current.emplace_back(std::move(tok), std::move(tag));
    }
    if (!current.empty()) sentences.push_back(std::move(current));

    NerCorpus corpus;
    corpus.tags = TagSet::from_types({types.begin(), types.end()});
    for (const auto& sent : sentences) {
        NerExample ex;
        for (const auto& [tok, tag] : sent) {
            ex.tokens.push_back(tok);
            ex.tags.push_back(corpus.tags.tag_index(tag));
        }
        if (!corpus.tags.bio_valid(ex.tags))
            throw DataError("conll: BIO-invalid gold tag sequence in sentence " +
                            std::to_string(corpus.examples.size() + 1));
        corpus.examples.push_back(std::move(ex));
    }
    return corpus;
}

inline NerCorpus read_conll(const std::filesystem::path& path) {
    return read_conll_text(read_text_file(path));
}

inline std::string conll_to_text(const NerCorpus& corpus) {
    std::ostringstream out;
    for (std::size_t s = 0; s < corpus.examples.size(); ++s) {
        if (s > 0) out << '\n';
        const auto& ex = corpus.examples[s];
        for (std::size_t i = 0; i < ex.tokens.size(); ++i)
            out << ex.tokens[i] << '\t' << corpus.tags.tag_name(ex.tags[i]) << '\n';
    }
    return out.str();
}

inline void write_conll(const std::filesystem::path& path, const NerCorpus& corpus) {
    atomic_write_file(path, conll_to_text(corpus));
}

// ---------------------------------------------------------------------------
// JSON Lines formats for RE and EE.
// ---------------------------------------------------------------------------

namespace detail {

inline ordered_json parse_jsonl_line(const std::string& line, std::size_t line_no) {
    ordered_json j = ordered_json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw DataError("jsonl line " + std::to_string(line_no) + ": malformed JSON object");
    return j;
}

inline void check_span(int start, int end, std::size_t len, std::size_t line_no,
                       const char* what) {
    if (start < 0 || end <= start || static_cast<std::size_t>(end) > len)
        throw DataError("jsonl line " + std::to_string(line_no) + ": invalid " + what + " span");
}

}  // namespace detail

inline ReCorpus read_re_jsonl_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    std::set<std::string> relation_names;
    std::vector<std::tuple<std::vector<std::string>, std::pair<int, int>, std::pair<int, int>,
                           std::string>>
        rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        ordered_json j = detail::parse_jsonl_line(line, line_no);
        try {
            std::vector<std::string> tokens = j.at("tokens").get<std::vector<std::string>>();
            auto head = j.at("head").get<std::vector<int>>();
            auto tail = j.at("tail").get<std::vector<int>>();
            std::string relation = j.at("relation").get<std::string>();
            if (head.size() != 2 || tail.size() != 2)
                throw DataError("jsonl line " + std::to_string(line_no) +
                                ": head/tail must be [start, end]");
            detail::check_span(head[0], head[1], tokens.size(), line_no, "head");
            detail::check_span(tail[0], tail[1], tokens.size(), line_no, "tail");
            relation_names.insert(relation);
            rows.emplace_back(std::move(tokens), std::make_pair(head[0], head[1]),
                              std::make_pair(tail[0], tail[1]), std::move(relation));
        } catch (const ordered_json::exception& e) {
            throw DataError("jsonl line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    relation_names.insert("no_relation");
    ReCorpus corpus;
    corpus.labels =
        RelationLabelSet::from_labels({relation_names.begin(), relation_names.end()});
    for (auto& [tokens, head, tail, relation] : rows) {
        ReExample ex;
        ex.tokens = std::move(tokens);
        ex.head = head;
        ex.tail = tail;
        ex.relation = corpus.labels.index(relation);
        corpus.examples.push_back(std::move(ex));
    }
    return corpus;
}

inline ReCorpus read_re_jsonl(const std::filesystem::path& path) {
    return read_re_jsonl_text(read_text_file(path));
}

inline std::string re_jsonl_to_text(const ReCorpus& corpus) {
    std::ostringstream out;
    for (const auto& ex : corpus.examples) {
        ordered_json j;
        j["tokens"] = ex.tokens;
        j["head"] = {ex.head.first, ex.head.second};
        j["tail"] = {ex.tail.first, ex.tail.second};
        j["relation"] = corpus.labels.name(ex.relation);
        out << j.dump() << '\n';
    }
    return out.str();
}

inline void write_re_jsonl(const std::filesystem::path& path, const ReCorpus& corpus) {
    atomic_write_file(path, re_jsonl_to_text(corpus));
}

inline EeCorpus read_ee_jsonl_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    std::set<std::string> entity_types, event_types, role_names;
    struct Row {
        std::vector<std::string> tokens;
        std::vector<std::tuple<int, int, std::string>> entities, triggers;
        std::vector<std::tuple<int, int, std::string>> arguments;  // trigger, entity, role
        std::size_t line_no = 0;
    };
    std::vector<Row> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        ordered_json j = detail::parse_jsonl_line(line, line_no);
        Row row;
        row.line_no = line_no;
        try {
            row.tokens = j.at("tokens").get<std::vector<std::string>>();
            for (const auto& e : j.at("entities")) {
                const int s = e.at("start").get<int>();
                const int t = e.at("end").get<int>();
                detail::check_span(s, t, row.tokens.size(), line_no, "entity");
                std::string type = e.at("type").get<std::string>();
                entity_types.insert(type);
                row.entities.emplace_back(s, t, std::move(type));
            }
            for (const auto& e : j.at("triggers")) {
                const int s = e.at("start").get<int>();
                const int t = e.at("end").get<int>();
                detail::check_span(s, t, row.tokens.size(), line_no, "trigger");
                std::string type = e.at("event_type").get<std::string>();
                event_types.insert(type);
                row.triggers.emplace_back(s, t, std::move(type));
            }
            for (const auto& e : j.at("arguments")) {
                const int ti = e.at("trigger").get<int>();
                const int ei = e.at("entity").get<int>();
                if (ti < 0 || static_cast<std::size_t>(ti) >= row.triggers.size() || ei < 0 ||
                    static_cast<std::size_t>(ei) >= row.entities.size())
                    throw DataError("jsonl line " + std::to_string(line_no) +
                                    ": argument references invalid node index");
                std::string role = e.at("role").get<std::string>();
                role_names.insert(role);
                row.arguments.emplace_back(ti, ei, std::move(role));
            }
        } catch (const ordered_json::exception& e) {
            throw DataError("jsonl line " + std::to_string(line_no) + ": " + e.what());
        }
        rows.push_back(std::move(row));
    }
    EeCorpus corpus;
    corpus.schema = EeSchema::from_sets({entity_types.begin(), entity_types.end()},
                                        {event_types.begin(), event_types.end()},
                                        {role_names.begin(), role_names.end()});
    for (auto& row : rows) {
        EventExample ex;
        ex.tokens = std::move(row.tokens);
        for (auto& [s, t, type] : row.entities)
            ex.graph.entities.push_back(
                {s, t, EeSchema::index_in(corpus.schema.entity_types, type, "entity type")});
        for (auto& [s, t, type] : row.triggers)
            ex.graph.triggers.push_back(
                {s, t, EeSchema::index_in(corpus.schema.event_types, type, "event type")});
        std::set<std::pair<int, int>> seen;
        for (auto& [ti, ei, role] : row.arguments) {
            if (!seen.emplace(ti, ei).second)
                throw DataError("jsonl line " + std::to_string(row.line_no) +
                                ": duplicate argument edge");
            ex.graph.arguments.push_back(
                {ti, ei, EeSchema::index_in(corpus.schema.roles, role, "role")});
        }
        corpus.examples.push_back(std::move(ex));
    }
    return corpus;
}

inline EeCorpus read_ee_jsonl(const std::filesystem::path& path) {
    return read_ee_jsonl_text(read_text_file(path));
}

inline std::string ee_jsonl_to_text(const EeCorpus& corpus) {
    std::ostringstream out;
    for (const auto& ex : corpus.examples) {
        ordered_json j;
        j["tokens"] = ex.tokens;
        j["entities"] = ordered_json::array();
        for (const auto& n : ex.graph.entities) {
            ordered_json e;
            e["start"] = n.start;
            e["end"] = n.end;
            e["type"] = corpus.schema.entity_types.at(static_cast<std::size_t>(n.type));
            j["entities"].push_back(std::move(e));
        }
        j["triggers"] = ordered_json::array();
        for (const auto& n : ex.graph.triggers) {
            ordered_json e;
            e["start"] = n.start;
            e["end"] = n.end;
            e["event_type"] = corpus.schema.event_types.at(static_cast<std::size_t>(n.type));
            j["triggers"].push_back(std::move(e));
        }
        j["arguments"] = ordered_json::array();
        for (const auto& a : ex.graph.arguments) {
            ordered_json e;
            e["trigger"] = a.trigger;
            e["entity"] = a.entity;
            e["role"] = corpus.schema.roles.at(static_cast<std::size_t>(a.role));
            j["arguments"].push_back(std::move(e));
        }
        out << j.dump() << '\n';
    }
    return out.str();
}

inline void write_ee_jsonl(const std::filesystem::path& path, const EeCorpus& corpus) {
    atomic_write_file(path, ee_jsonl_to_text(corpus));
}

// ---------------------------------------------------------------------------
// Low-resource splits
// ---------------------------------------------------------------------------

struct SplitSpec {
    enum class Mode { kshot, fraction };
    Mode mode = Mode::fraction;
    int k = 5;
    double fraction = 0.05;
    double unlabeled_fraction = 0.5;
    int segments = 10;
    std::uint64_t seed = 1;

    void validate() const {
        if (mode == Mode::kshot && k < 1) throw ConfigError("split: k must be >= 1");
        if (mode == Mode::fraction && !(fraction > 0.0 && fraction <= 1.0))
            throw ConfigError("split: fraction must be in (0, 1]");
        if (!(unlabeled_fraction >= 0.0 && unlabeled_fraction <= 1.0))
            throw ConfigError("split: unlabeled_fraction must be in [0, 1]");
        if (segments < 1) throw ConfigError("split: segments must be >= 1");
    }
};

struct SplitManifest {
    std::vector<int> labeled;
    std::vector<int> unlabeled;
    std::vector<std::vector<int>> segments;
    std::uint64_t seed = 0;
};

// Contiguous-after-shuffle partition; sizes differ by at most one, larger
// segments first.
inline std::vector<std::vector<int>> segment_unlabeled(std::vector<int> ids, int segments,
                                                       Rng& rng) {
    if (segments < 1) throw std::invalid_argument("segment_unlabeled: segments must be >= 1");
    rng.shuffle(ids);
    const std::size_t n = ids.size();
    const std::size_t s = static_cast<std::size_t>(segments);
    const std::size_t base = n / s;
    const std::size_t rem = n % s;
    std::vector<std::vector<int>> out;
    std::size_t pos = 0;
    for (std::size_t i = 0; i < s; ++i) {
        const std::size_t take = base + (i < rem ? 1 : 0);
        out.emplace_back(ids.begin() + static_cast<std::ptrdiff_t>(pos),
                         ids.begin() + static_cast<std::ptrdiff_t>(pos + take));
        pos += take;
    }
    return out;
}

// Stratified labeled/unlabeled/held-back split over example indices.
// `class_key` supplies the stratification key for an example.
inline SplitManifest stratified_split(std::size_t corpus_size,
                                      const std::function<std::string(int)>& class_key,
                                      const SplitSpec& spec) {
    spec.validate();
    if (corpus_size == 0) throw DataError("stratified_split: empty corpus");
    Rng rng(spec.seed);

    std::map<std::string, std::vector<int>> groups;
    for (std::size_t i = 0; i < corpus_size; ++i)
        groups[class_key(static_cast<int>(i))].push_back(static_cast<int>(i));
    for (auto& [key, ids] : groups) rng.shuffle(ids);

    std::vector<int> labeled;
    if (spec.mode == SplitSpec::Mode::kshot) {
        for (const auto& [key, ids] : groups) {
            if (ids.size() < static_cast<std::size_t>(spec.k))
                throw DataError("stratified_split: class '" + key + "' has only " +
                                std::to_string(ids.size()) + " examples, need k=" +
                                std::to_string(spec.k));
            labeled.insert(labeled.end(), ids.begin(), ids.begin() + spec.k);
        }
    } else {
        // Largest-remainder quotas against round(fraction * N).
        const long target =
            std::lround(spec.fraction * static_cast<double>(corpus_size));
        std::vector<std::pair<std::string, double>> remainders;
        std::map<std::string, long> quota;
        long assigned = 0;
        for (const auto& [key, ids] : groups) {
            const double exact = spec.fraction * static_cast<double>(ids.size());
            quota[key] = static_cast<long>(std::floor(exact));
            assigned += quota[key];
            remainders.emplace_back(key, exact - std::floor(exact));
        }
        std::stable_sort(remainders.begin(), remainders.end(),
                         [](const auto& a, const auto& b) { return a.second > b.second; });
        for (std::size_t i = 0; assigned < target && i < remainders.size(); ++i) {
            const auto& key = remainders[i].first;
            if (quota[key] < static_cast<long>(groups[key].size())) {
                ++quota[key];
                ++assigned;
            }
        }
        for (const auto& [key, ids] : groups) {
            labeled.insert(labeled.end(), ids.begin(), ids.begin() + quota[key]);
        }
    }
    std::sort(labeled.begin(), labeled.end());

    std::set<int> labeled_set(labeled.begin(), labeled.end());
    std::vector<int> rest;
    for (std::size_t i = 0; i < corpus_size; ++i) {
        if (!labeled_set.count(static_cast<int>(i))) rest.push_back(static_cast<int>(i));
    }
    rng.shuffle(rest);
    const std::size_t target_u = static_cast<std::size_t>(
        std::lround(spec.unlabeled_fraction * static_cast<double>(corpus_size)));
    if (target_u > rest.size())
        throw DataError("stratified_split: unlabeled_fraction requires " +
                        std::to_string(target_u) + " examples but only " +
                        std::to_string(rest.size()) + " remain after the labeled draw");

    SplitManifest manifest;
    manifest.seed = spec.seed;
    manifest.labeled = std::move(labeled);
    manifest.unlabeled.assign(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(target_u));
    manifest.segments = segment_unlabeled(manifest.unlabeled, spec.segments, rng);
    return manifest;
}

inline std::string manifest_to_json(const SplitManifest& m) {
    ordered_json j;
    j["labeled"] = m.labeled;
    j["unlabeled"] = m.unlabeled;
    j["segments"] = m.segments;
    j["seed"] = m.seed;
    return j.dump(2) + "\n";
}

inline SplitManifest manifest_from_json(const std::string& text) {
    ordered_json j = ordered_json::parse(text, nullptr, false);
    if (j.is_discarded()) throw DataError("split manifest: malformed JSON");
    SplitManifest m;
    try {
        m.labeled = j.at("labeled").get<std::vector<int>>();
        m.unlabeled = j.at("unlabeled").get<std::vector<int>>();
        m.segments = j.at("segments").get<std::vector<std::vector<int>>>();
        m.seed = j.at("seed").get<std::uint64_t>();
    } catch (const ordered_json::exception& e) {
        throw DataError(std::string("split manifest: ") + e.what());
    }
    return m;
}

// Stratification keys: first entity span's type (NER), the relation (RE),
// first trigger's event type (EE).
inline std::string split_class_key(const NerCorpus& corpus, int idx) {
    const auto& ex = corpus.examples.at(static_cast<std::size_t>(idx));
    auto spans = decode_spans(ex.tags, corpus.tags);
    return spans.empty() ? std::string("O") : corpus.tags.type_name(spans.front().type);
}

inline std::string split_class_key(const ReCorpus& corpus, int idx) {
    return corpus.labels.name(corpus.examples.at(static_cast<std::size_t>(idx)).relation);
}

inline std::string split_class_key(const EeCorpus& corpus, int idx) {
    const auto& ex = corpus.examples.at(static_cast<std::size_t>(idx));
    if (ex.graph.triggers.empty()) return "<none>";
    return corpus.schema.event_types.at(
        static_cast<std::size_t>(ex.graph.triggers.front().type));
}

// ---------------------------------------------------------------------------
// Synthetic corpora
// ---------------------------------------------------------------------------

struct SynthSpec {
    std::string task = "ner";  // ner | re | ee
    std::string template_set = "default";
    int lexicon_size = 40;
    int sentences = 1000;
    double noise = 0.0;
    bool round_robin = false;
    std::uint64_t seed = 1;

    void validate() const {
        if (task != "ner" && task != "re" && task != "ee")
            throw ConfigError("synth: unknown task '" + task + "'");
        if (template_set != "default")
            throw ConfigError("synth: unknown template set '" + template_set + "'");
        if (lexicon_size < 1) throw ConfigError("synth: lexicon_size must be >= 1");
        if (sentences < 1) throw ConfigError("synth: sentences must be >= 1");
        if (!(noise >= 0.0 && noise < 1.0)) throw ConfigError("synth: noise must be in [0, 1)");
    }
};

namespace synth {

inline const std::vector<std::string>& word_pool(std::string_view type) {
    static const std::map<std::string, std::vector<std::string>> pools = {
        {"PER", {"ana",  "boris", "carla", "dmitri", "elena", "farid", "greta",
                 "hugo", "ines",  "jonas", "katya",  "liam",  "mira",  "nadia",
                 "oscar", "priya", "quentin", "rosa", "samir", "tessa"}},
        {"PER2", {"alvarez", "brandt", "cisse", "dalton", "egorov", "fuentes", "gruber",
                  "hansen", "ibarra", "jansen", "keller", "lombard", "moreau", "novak",
                  "okafor", "petrov", "quigley", "rahman", "sato", "toledo"}},
        {"LOC", {"arden", "brookfield", "calder", "dunmore", "elkhart", "fairview", "glenrock",
                 "harborview", "irvine", "jasperton", "kingsley", "lakewood", "morton",
                 "newhall", "oakridge", "pinecrest", "quarrytown", "redfield", "stanton",
                 "tulare"}},
        {"LOC2", {"valley", "harbor", "ridge", "heights"}},
        {"ORG", {"acme", "borealis", "cobalt", "dynamo", "everest", "fulcrum", "granite",
                 "horizon", "ironwood", "juniper", "keystone", "lumen", "meridian", "nimbus",
                 "orchid", "pinnacle", "quartzite", "redwood", "summit", "trident"}},
        {"ORG2", {"corp", "labs", "group", "systems"}},
        {"DATE", {"january", "february", "march", "april", "may", "june", "july", "august",
                  "september", "october", "november", "december"}},
    };
    auto it = pools.find(std::string(type));
    if (it == pools.end()) throw std::invalid_argument("synth: unknown slot type");
    return it->second;
}

// Deterministic filler for (type, index): small indices give one-token
// fillers, larger ones two-token combinations.
inline std::vector<std::string> filler_tokens(std::string_view type, int index) {
    if (index < 0) throw std::invalid_argument("synth: negative filler index");
    if (type == "DATE") {
        const auto& months = word_pool("DATE");
        if (index < static_cast<int>(months.size())) return {months[index]};
        const int i = index - static_cast<int>(months.size());
        return {months[i % months.size()], std::to_string(1 + (i * 5) % 28)};
    }
    const auto& base = word_pool(type);
    if (index < static_cast<int>(base.size()))
        return {base[static_cast<std::size_t>(index)]};
    const int i = index - static_cast<int>(base.size());
    const auto& second = word_pool(type == "PER"   ? "PER2"
                                   : type == "LOC" ? "LOC2"
                                                   : "ORG2");
    return {base[static_cast<std::size_t>(i) % base.size()],
            second[(static_cast<std::size_t>(i) / base.size()) % second.size()]};
}

struct NerTemplate {
    // Items starting with '<' name an entity slot, e.g. "<PER>".
    std::vector<std::string> items;
};

inline const std::vector<NerTemplate>& ner_templates() {
    static const std::vector<NerTemplate> t = {
        {{"<PER>", "visited", "<LOC>", "on", "<DATE>", "."}},
        {{"<ORG>", "opened", "an", "office", "in", "<LOC>", "."}},
        {{"<PER>", "joined", "<ORG>", "in", "<DATE>", "."}},
        {{"<PER>", "met", "<PER>", "near", "<LOC>", "."}},
        {{"the", "quarterly", "meeting", "was", "postponed", "again", "."}},
    };
    return t;
}

struct ReTemplate {
    // Slot items: "<TYPE:head>", "<TYPE:tail>", or plain "<TYPE>".
    std::vector<std::string> items;
    std::string relation;
};

inline const std::vector<ReTemplate>& re_templates() {
    static const std::vector<ReTemplate> t = {
        {{"<PER:head>", "founded", "<ORG:tail>", "in", "<DATE>", "."}, "founded"},
        {{"<ORG:head>", "is", "based", "in", "<LOC:tail>", "."}, "based_in"},
        {{"<PER:head>", "works", "for", "<ORG:tail>", "."}, "works_for"},
        {{"<PER:head>", "was", "born", "in", "<LOC:tail>", "."}, "born_in"},
        {{"<PER:head>", "visited", "<LOC:tail>", "last", "week", "."}, "no_relation"},
        {{"<PER:head>", "spoke", "with", "<PER:tail>", "briefly", "."}, "no_relation"},
    };
    return t;
}

struct EeTemplate {
    struct Item {
        std::string literal;      // set for plain words and trigger words
        std::string entity_type;  // set for entity slots
        std::string role;         // argument role of the slot, may be empty
        std::string event_type;   // set on the trigger item
    };
    std::vector<Item> items;
};

inline const std::vector<EeTemplate>& ee_templates() {
    using I = EeTemplate::Item;
    static const std::vector<EeTemplate> t = {
        {{I{"", "ORG", "attacker", ""}, I{"attacked", "", "", "conflict.attack"},
          I{"", "LOC", "place", ""}, I{"on", "", "", ""}, I{"", "DATE", "", ""},
          I{".", "", "", ""}}},
        {{I{"", "PER", "participant", ""}, I{"met", "", "", "contact.meet"},
          I{"", "PER", "participant", ""}, I{"in", "", "", ""}, I{"", "LOC", "place", ""},
          I{".", "", "", ""}}},
        {{I{"", "PER", "person", ""}, I{"left", "", "", "personnel.end"},
          I{"", "ORG", "organization", ""}, I{"abruptly", "", "", ""}, I{".", "", "", ""}}},
        {{I{"", "ORG", "attacker", ""}, I{"raided", "", "", "conflict.attack"},
          I{"", "LOC", "place", ""}, I{".", "", "", ""}}},
    };
    return t;
}

}  // namespace synth

inline NerCorpus generate_synthetic_ner(const SynthSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    const auto& templates = synth::ner_templates();
    std::set<std::string> types;
    for (const auto& t : templates)
        for (const auto& item : t.items)
            if (item.starts_with('<')) types.insert(item.substr(1, item.size() - 2));

    NerCorpus corpus;
    corpus.tags = TagSet::from_types({types.begin(), types.end()});
    const int num_types = corpus.tags.num_types();
    for (int s = 0; s < spec.sentences; ++s) {
        const auto& tpl = spec.round_robin
                              ? templates[static_cast<std::size_t>(s) % templates.size()]
                              : templates[rng.uniform_index(templates.size())];
        NerExample ex;
        std::vector<SpanPrediction> spans;
        for (const auto& item : tpl.items) {
            if (item.starts_with('<')) {
                const std::string type = item.substr(1, item.size() - 2);
                auto filler = synth::filler_tokens(
                    type, static_cast<int>(rng.uniform_index(
                              static_cast<std::size_t>(spec.lexicon_size))));
                const int start = static_cast<int>(ex.tokens.size());
                for (auto& tok : filler) ex.tokens.push_back(std::move(tok));
                int type_id = 0;
                for (int i = 0; i < num_types; ++i)
                    if (corpus.tags.type_name(i) == type) type_id = i;
                spans.push_back({start, static_cast<int>(ex.tokens.size()), type_id});
            } else {
                ex.tokens.push_back(item);
            }
        }
        // Label noise: each span's type independently corrupted to a
        // uniformly random other type.
        for (auto& sp : spans) {
            if (spec.noise > 0.0 && rng.uniform() < spec.noise && num_types > 1) {
                const int shift =
                    1 + static_cast<int>(rng.uniform_index(static_cast<std::size_t>(num_types - 1)));
                sp.type = (sp.type + shift) % num_types;
            }
        }
        ex.tags = spans_to_tags(spans, ex.tokens.size(), corpus.tags);
        corpus.examples.push_back(std::move(ex));
    }
    return corpus;
}

inline ReCorpus generate_synthetic_re(const SynthSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    const auto& templates = synth::re_templates();
    std::set<std::string> relations;
    for (const auto& t : templates) relations.insert(t.relation);
    relations.insert("no_relation");

    ReCorpus corpus;
    corpus.labels = RelationLabelSet::from_labels({relations.begin(), relations.end()});
    for (int s = 0; s < spec.sentences; ++s) {
        const auto& tpl = spec.round_robin
                              ? templates[static_cast<std::size_t>(s) % templates.size()]
                              : templates[rng.uniform_index(templates.size())];
        ReExample ex;
        for (const auto& item : tpl.items) {
            if (item.starts_with('<')) {
                std::string inner = item.substr(1, item.size() - 2);
                std::string role;
                if (auto colon = inner.find(':'); colon != std::string::npos) {
                    role = inner.substr(colon + 1);
                    inner = inner.substr(0, colon);
                }
                auto filler = synth::filler_tokens(
                    inner, static_cast<int>(rng.uniform_index(
                               static_cast<std::size_t>(spec.lexicon_size))));
                const int start = static_cast<int>(ex.tokens.size());
                for (auto& tok : filler) ex.tokens.push_back(std::move(tok));
                const int end = static_cast<int>(ex.tokens.size());
                if (role == "head") ex.head = {start, end};
                if (role == "tail") ex.tail = {start, end};
            } else {
                ex.tokens.push_back(item);
            }
        }
        ex.relation = corpus.labels.index(tpl.relation);
        if (spec.noise > 0.0 && rng.uniform() < spec.noise && corpus.labels.size() > 1) {
            const int shift = 1 + static_cast<int>(rng.uniform_index(
                                  static_cast<std::size_t>(corpus.labels.size() - 1)));
            ex.relation = (ex.relation + shift) % corpus.labels.size();
        }
        corpus.examples.push_back(std::move(ex));
    }
    return corpus;
}

inline EeCorpus generate_synthetic_ee(const SynthSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    const auto& templates = synth::ee_templates();
    std::set<std::string> entity_types, event_types, roles;
    for (const auto& t : templates) {
        for (const auto& item : t.items) {
            if (!item.entity_type.empty()) entity_types.insert(item.entity_type);
            if (!item.event_type.empty()) event_types.insert(item.event_type);
            if (!item.role.empty()) roles.insert(item.role);
        }
    }

    EeCorpus corpus;
    corpus.schema = EeSchema::from_sets({entity_types.begin(), entity_types.end()},
                                        {event_types.begin(), event_types.end()},
                                        {roles.begin(), roles.end()});
    const int n_ent = static_cast<int>(corpus.schema.entity_types.size());
    const int n_evt = static_cast<int>(corpus.schema.event_types.size());
    const int n_real_roles = static_cast<int>(corpus.schema.roles.size()) - 1;
    for (int s = 0; s < spec.sentences; ++s) {
        const auto& tpl = spec.round_robin
                              ? templates[static_cast<std::size_t>(s) % templates.size()]
                              : templates[rng.uniform_index(templates.size())];
        EventExample ex;
        int trigger_index = -1;
        for (const auto& item : tpl.items) {
            if (!item.entity_type.empty()) {
                auto filler = synth::filler_tokens(
                    item.entity_type, static_cast<int>(rng.uniform_index(
                                          static_cast<std::size_t>(spec.lexicon_size))));
                const int start = static_cast<int>(ex.tokens.size());
                for (auto& tok : filler) ex.tokens.push_back(std::move(tok));
                const int end = static_cast<int>(ex.tokens.size());
                const int type_id =
                    EeSchema::index_in(corpus.schema.entity_types, item.entity_type, "entity type");
                ex.graph.entities.push_back({start, end, type_id});
                if (!item.role.empty() && trigger_index >= 0) {
                    ex.graph.arguments.push_back(
                        {trigger_index, static_cast<int>(ex.graph.entities.size()) - 1,
                         EeSchema::index_in(corpus.schema.roles, item.role, "role")});
                } else if (!item.role.empty()) {
                    // Argument slot before the trigger: resolve after the pass.
                    ex.graph.arguments.push_back(
                        {-1, static_cast<int>(ex.graph.entities.size()) - 1,
                         EeSchema::index_in(corpus.schema.roles, item.role, "role")});
                }
            } else if (!item.event_type.empty()) {
                const int start = static_cast<int>(ex.tokens.size());
                ex.tokens.push_back(item.literal);
                trigger_index = static_cast<int>(ex.graph.triggers.size());
                ex.graph.triggers.push_back(
                    {start, start + 1,
                     EeSchema::index_in(corpus.schema.event_types, item.event_type, "event type")});
            } else {
                ex.tokens.push_back(item.literal);
            }
        }
        for (auto& a : ex.graph.arguments) {
            if (a.trigger < 0) a.trigger = trigger_index;
        }
        // Noise: entity types, event types, and roles flip independently.
        for (auto& n : ex.graph.entities) {
            if (spec.noise > 0.0 && rng.uniform() < spec.noise && n_ent > 1)
                n.type = (n.type + 1 +
                          static_cast<int>(rng.uniform_index(static_cast<std::size_t>(n_ent - 1)))) %
                         n_ent;
        }
        for (auto& n : ex.graph.triggers) {
            if (spec.noise > 0.0 && rng.uniform() < spec.noise && n_evt > 1)
                n.type = (n.type + 1 +
                          static_cast<int>(rng.uniform_index(static_cast<std::size_t>(n_evt - 1)))) %
                         n_evt;
        }
        for (auto& a : ex.graph.arguments) {
            if (spec.noise > 0.0 && rng.uniform() < spec.noise && n_real_roles > 1)
                a.role = (a.role + 1 +
                          static_cast<int>(
                              rng.uniform_index(static_cast<std::size_t>(n_real_roles - 1)))) %
                         n_real_roles;
        }
        corpus.examples.push_back(std::move(ex));
    }
    return corpus;
}

// ---------------------------------------------------------------------------
// Pseudo-label quality vs hidden gold
// ---------------------------------------------------------------------------

inline Prf pseudo_label_quality(const std::vector<std::vector<int>>& pseudo_tags,
                                const std::vector<std::vector<int>>& gold_tags,
                                const TagSet& tags) {
    if (pseudo_tags.size() != gold_tags.size())
        throw DataError("pseudo_label_quality: corpus misalignment");
    std::vector<std::vector<SpanPrediction>> p, g;
    for (const auto& t : pseudo_tags) p.push_back(decode_spans(t, tags));
    for (const auto& t : gold_tags) g.push_back(decode_spans(t, tags));
    return span_f1(p, g);
}

inline Prf pseudo_label_quality(const std::vector<int>& pseudo, const std::vector<int>& gold,
                                const RelationLabelSet& labels) {
    if (pseudo.size() != gold.size())
        throw DataError("pseudo_label_quality: corpus misalignment");
    return relation_f1(pseudo, gold, labels);
}

inline Prf pseudo_label_quality(const std::vector<EventGraph>& pseudo,
                                const std::vector<EventGraph>& gold) {
    if (pseudo.size() != gold.size())
        throw DataError("pseudo_label_quality: corpus misalignment");
    return trig_c_f1(pseudo, gold);
}

}  // namespace grail
