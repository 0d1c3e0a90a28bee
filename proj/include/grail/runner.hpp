#pragma once

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "grail/config.hpp"
#include "grail/data.hpp"
#include "grail/finite_diff.hpp"
#include "grail/gradcheck.hpp"
#include "grail/gradient_imitation.hpp"
#include "grail/pca.hpp"

namespace grail::run {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Task traits: everything the generic runner needs per sub-task.
// ---------------------------------------------------------------------------

struct NerTask {
    using Model = NerModel;
    using Corpus = NerCorpus;
    using Example = NerExample;
    using Label = NerModel::Label;
    static constexpr const char* name = "ner";
    static constexpr const char* file_ext = ".conll";

    static Corpus read(const fs::path& p) { return read_conll(p); }
    static void write(const fs::path& p, const Corpus& c) { write_conll(p, c); }
    static Corpus generate(const SynthSpec& s) { return generate_synthetic_ner(s); }
    static std::string class_key(const Corpus& c, int i) { return split_class_key(c, i); }

    static Model build(const Corpus& train, const EncoderConfig& enc, int min_count,
                       std::uint64_t seed) {
        std::vector<std::vector<std::string>> sentences;
        for (const auto& ex : train.examples) sentences.push_back(ex.tokens);
        return Model(Vocabulary::build(sentences, min_count), train.tags, enc, seed);
    }

    // Test gold expressed in the model's tag inventory.
    static std::vector<Example> remap(const Model& m, const Corpus& c) {
        std::vector<Example> out;
        for (const auto& ex : c.examples) {
            Example e = ex;
            for (std::size_t i = 0; i < e.tags.size(); ++i)
                e.tags[i] = m.tags().tag_index(c.tags.tag_name(ex.tags[i]));
            out.push_back(std::move(e));
        }
        return out;
    }

    static ordered_json label_schema(const Model& m) {
        ordered_json j;
        j["entity_types"] = m.tags().types();
        return j;
    }
    static Model restore(Vocabulary vocab, const ordered_json& schema, const EncoderConfig& enc) {
        return Model(std::move(vocab),
                     TagSet::from_types(schema.at("entity_types").get<std::vector<std::string>>()),
                     enc, 0);
    }
};

struct ReTask {
    using Model = ReModel;
    using Corpus = ReCorpus;
    using Example = ReExample;
    using Label = ReModel::Label;
    static constexpr const char* name = "re";
    static constexpr const char* file_ext = ".jsonl";

    static Corpus read(const fs::path& p) { return read_re_jsonl(p); }
    static void write(const fs::path& p, const Corpus& c) { write_re_jsonl(p, c); }
    static Corpus generate(const SynthSpec& s) { return generate_synthetic_re(s); }
    static std::string class_key(const Corpus& c, int i) { return split_class_key(c, i); }

    static Model build(const Corpus& train, const EncoderConfig& enc, int min_count,
                       std::uint64_t seed) {
        std::vector<std::vector<std::string>> sentences;
        for (const auto& ex : train.examples) sentences.push_back(ex.tokens);
        return Model(Vocabulary::build(sentences, min_count), train.labels, enc, seed);
    }

    static std::vector<Example> remap(const Model& m, const Corpus& c) {
        std::vector<Example> out;
        for (const auto& ex : c.examples) {
            Example e = ex;
            e.relation = m.labels().index(c.labels.name(ex.relation));
            out.push_back(std::move(e));
        }
        return out;
    }

    static ordered_json label_schema(const Model& m) {
        ordered_json j;
        j["labels"] = m.labels().labels;
        return j;
    }
    static Model restore(Vocabulary vocab, const ordered_json& schema, const EncoderConfig& enc) {
        return Model(std::move(vocab),
                     RelationLabelSet::from_labels(
                         schema.at("labels").get<std::vector<std::string>>()),
                     enc, 0);
    }
};

struct EeTask {
    using Model = EeModel;
    using Corpus = EeCorpus;
    using Example = EventExample;
    using Label = EeModel::Label;
    static constexpr const char* name = "ee";
    static constexpr const char* file_ext = ".jsonl";

    static Corpus read(const fs::path& p) { return read_ee_jsonl(p); }
    static void write(const fs::path& p, const Corpus& c) { write_ee_jsonl(p, c); }
    static Corpus generate(const SynthSpec& s) { return generate_synthetic_ee(s); }
    static std::string class_key(const Corpus& c, int i) { return split_class_key(c, i); }

    static Model build(const Corpus& train, const EncoderConfig& enc, int min_count,
                       std::uint64_t seed) {
        std::vector<std::vector<std::string>> sentences;
        for (const auto& ex : train.examples) sentences.push_back(ex.tokens);
        return Model(Vocabulary::build(sentences, min_count), train.schema, enc, seed);
    }

    static std::vector<Example> remap(const Model& m, const Corpus& c) {
        std::vector<Example> out;
        for (const auto& ex : c.examples) {
            Example e = ex;
            for (auto& n : e.graph.entities)
                n.type = EeSchema::index_in(
                    m.schema().entity_types,
                    c.schema.entity_types.at(static_cast<std::size_t>(n.type)), "entity type");
            for (auto& n : e.graph.triggers)
                n.type = EeSchema::index_in(
                    m.schema().event_types,
                    c.schema.event_types.at(static_cast<std::size_t>(n.type)), "event type");
            for (auto& a : e.graph.arguments)
                a.role = EeSchema::index_in(m.schema().roles,
                                            c.schema.roles.at(static_cast<std::size_t>(a.role)),
                                            "role");
            out.push_back(std::move(e));
        }
        return out;
    }

    static ordered_json label_schema(const Model& m) {
        ordered_json j;
        j["entity_types"] = m.schema().entity_types;
        j["event_types"] = m.schema().event_types;
        // no_role is appended by the schema builder; persist only data roles.
        std::vector<std::string> roles(m.schema().roles.begin(), m.schema().roles.end() - 1);
        j["roles"] = roles;
        return j;
    }
    static Model restore(Vocabulary vocab, const ordered_json& schema, const EncoderConfig& enc) {
        return Model(std::move(vocab),
                     EeSchema::from_sets(
                         schema.at("entity_types").get<std::vector<std::string>>(),
                         schema.at("event_types").get<std::vector<std::string>>(),
                         schema.at("roles").get<std::vector<std::string>>()),
                     enc, 0);
    }
};

// ---------------------------------------------------------------------------
// Model persistence
// ---------------------------------------------------------------------------

template <class Task>
void save_model(const fs::path& path, const typename Task::Model& model,
                const std::string& method, std::uint64_t seed) {
    ordered_json j;
    j["task"] = Task::name;
    j["method"] = method;
    j["seed"] = seed;
    const auto& enc = model.encoder_config();
    j["encoder"] = {{"embed_dim", enc.embed_dim},
                    {"window", enc.window},
                    {"hidden_dim", enc.hidden_dim},
                    {"max_len", enc.max_len}};
    std::vector<std::string> vocab_tokens;
    for (int i = 0; i < model.vocab().size(); ++i) vocab_tokens.push_back(model.vocab().token(i));
    j["vocab"] = vocab_tokens;
    j["labels"] = Task::label_schema(model);
    j["segments"] = ordered_json::array();
    for (const auto& seg : model.params().layout().segments()) {
        ordered_json s;
        s["name"] = seg.name;
        s["shape"] = seg.shape;
        j["segments"].push_back(std::move(s));
    }
    j["values"] = model.params().values();
    atomic_write_file(path, j.dump() + "\n");
}

inline ordered_json load_model_json(const fs::path& path, const std::string& expected_task) {
    ordered_json j = ordered_json::parse(read_text_file(path), nullptr, false);
    if (j.is_discarded()) throw DataError("model file: malformed JSON: " + path.string());
    if (j.at("task").get<std::string>() != expected_task)
        throw DataError("model file is for task '" + j.at("task").get<std::string>() +
                        "', expected '" + expected_task + "'");
    return j;
}

template <class Task>
typename Task::Model load_model(const fs::path& path) {
    ordered_json j = load_model_json(path, Task::name);
    EncoderConfig enc;
    enc.embed_dim = j.at("encoder").at("embed_dim").get<int>();
    enc.window = j.at("encoder").at("window").get<int>();
    enc.hidden_dim = j.at("encoder").at("hidden_dim").get<int>();
    enc.max_len = j.at("encoder").at("max_len").get<int>();
    std::ostringstream vocab_text;
    for (const auto& t : j.at("vocab")) vocab_text << t.get<std::string>() << '\n';
    auto model = Task::restore(Vocabulary::from_text(vocab_text.str()), j.at("labels"), enc);
    auto values = j.at("values").get<std::vector<double>>();
    if (values.size() != model.params().size())
        throw DataError("model file: parameter count mismatch");
    model.params().values() = std::move(values);
    model.params().check_finite("model file");
    return model;
}

// ---------------------------------------------------------------------------
// Log serialization
// ---------------------------------------------------------------------------

inline ordered_json prf_json(const Prf& m) {
    ordered_json j;
    j["precision"] = m.precision;
    j["recall"] = m.recall;
    j["f1"] = m.f1;
    return j;
}

inline std::string run_log_to_jsonl(const RunLog& log) {
    std::ostringstream out;
    std::size_t step_idx = 0;
    auto emit_steps_for = [&](int segment) {
        while (step_idx < log.steps.size() && log.steps[step_idx].segment == segment) {
            const auto& s = log.steps[step_idx];
            ordered_json j;
            j["segment"] = s.segment;
            j["batch"] = s.batch;
            j["t"] = s.t;
            j["loss"] = s.loss;
            j["reward"] = s.reward;
            j["selected"] = s.selected;
            j["pool_size"] = s.pool_size;
            out << j.dump() << '\n';
            ++step_idx;
        }
    };
    for (const auto& seg : log.segments) {
        emit_steps_for(seg.segment);
        ordered_json j;
        j["segment"] = seg.segment;
        ordered_json summary;
        summary["pool_size"] = seg.pool_size;
        summary["steps"] = seg.step_count;
        summary["selected"] = seg.selected_count;
        if (seg.pseudo_all) summary["pseudo"] = prf_json(*seg.pseudo_all);
        if (seg.pseudo_selected) summary["selected_pseudo"] = prf_json(*seg.pseudo_selected);
        j["summary"] = std::move(summary);
        out << j.dump() << '\n';
    }
    emit_steps_for(-1);  // no-op; steps always belong to an emitted segment
    return out.str();
}

inline std::string snapshots_to_jsonl(const RunLog& log) {
    std::ostringstream out;
    for (const auto& [step, values] : log.snapshots) {
        ordered_json j;
        j["step"] = step;
        j["values"] = values;
        out << j.dump() << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

inline void write_run_manifest(const RunConfig& cfg, const std::string& command) {
    ordered_json j;
    j["command"] = command;
    j["config"] = ordered_json::object();
    for (const auto& [k, v] : cfg.raw.entries()) j["config"][k] = v;
    atomic_write_file(cfg.out_dir / ("manifest-" + command + ".json"), j.dump(2) + "\n");
}

template <class Task>
void cmd_synth_t(const RunConfig& cfg) {
    SynthSpec train_spec = cfg.synth;
    auto train = Task::generate(train_spec);
    SynthSpec test_spec = cfg.synth;
    test_spec.sentences = cfg.synth_test_sentences;
    test_spec.noise = 0.0;
    test_spec.seed = cfg.synth.seed + 1;
    auto test = Task::generate(test_spec);
    Task::write(cfg.out_dir / (std::string("train") + Task::file_ext), train);
    Task::write(cfg.out_dir / (std::string("test") + Task::file_ext), test);
    write_run_manifest(cfg, "synth");
    std::cerr << "synth: wrote " << train.examples.size() << " train / " << test.examples.size()
              << " test sentences under " << cfg.out_dir.string() << "\n";
}

template <class Task>
void cmd_split_t(const RunConfig& cfg) {
    if (cfg.train_path.empty()) throw ConfigError("split: data.train is required");
    auto corpus = Task::read(cfg.train_path);
    auto manifest = stratified_split(
        corpus.examples.size(),
        [&](int i) { return Task::class_key(corpus, i); }, cfg.split);
    atomic_write_file(cfg.split_manifest_path, manifest_to_json(manifest));
    write_run_manifest(cfg, "split");
    std::cerr << "split: " << manifest.labeled.size() << " labeled, "
              << manifest.unlabeled.size() << " unlabeled in " << manifest.segments.size()
              << " segments -> " << cfg.split_manifest_path.string() << "\n";
}

template <class Task>
struct PreparedData {
    typename Task::Corpus train;
    SplitManifest manifest;
    std::vector<typename Task::Example> pool;       // labeled
    std::vector<typename Task::Example> unlabeled;  // labels stripped
    std::vector<typename Task::Label> hidden_gold;  // audit-only
    std::vector<std::vector<int>> segments;         // indices into `unlabeled`
};

template <class Task>
PreparedData<Task> prepare_training_data(const RunConfig& cfg) {
    if (cfg.train_path.empty()) throw ConfigError("train: data.train is required");
    PreparedData<Task> d{Task::read(cfg.train_path), manifest_from_json(read_text_file(
                                                          cfg.split_manifest_path))};
    const auto& examples = d.train.examples;
    auto at = [&](int idx) -> const typename Task::Example& {
        if (idx < 0 || static_cast<std::size_t>(idx) >= examples.size())
            throw DataError("split manifest references example " + std::to_string(idx) +
                            " outside the corpus");
        return examples[static_cast<std::size_t>(idx)];
    };
    for (int idx : d.manifest.labeled) d.pool.push_back(at(idx));

    std::map<int, int> position;  // corpus index -> position in `unlabeled`
    for (int idx : d.manifest.unlabeled) {
        typename Task::Example ex = at(idx);
        d.hidden_gold.push_back(Task::Model::strip_label(ex));
        position[idx] = static_cast<int>(d.unlabeled.size());
        d.unlabeled.push_back(std::move(ex));
    }
    for (const auto& seg : d.manifest.segments) {
        std::vector<int> local;
        for (int idx : seg) {
            auto it = position.find(idx);
            if (it == position.end())
                throw DataError("split manifest: segment entry " + std::to_string(idx) +
                                " is not in the unlabeled set");
            local.push_back(it->second);
        }
        d.segments.push_back(std::move(local));
    }
    return d;
}

template <class Task>
void train_one_seed(const RunConfig& cfg, std::uint64_t seed) {
    auto data = prepare_training_data<Task>(cfg);
    auto model = Task::build(data.train, cfg.encoder, cfg.min_count, seed);
    OptimizerState opt(model.params().size(), cfg.optimizer);
    Rng rng(seed);

    RunLog log;
    if (cfg.method == "girl") {
        log = train_gradient_imitation(model, data.pool, data.unlabeled, data.segments, cfg.girl,
                                       opt, rng, &data.hidden_gold);
    } else if (cfg.method == "pseudo-labeling") {
        log = train_pseudo_labeling(model, data.pool, data.unlabeled, data.segments, cfg.girl,
                                    opt, rng, &data.hidden_gold);
    } else {  // supervised: labeled pool only, snapshot per epoch
        log.snapshots.emplace_back(0, model.params().values());
        for (int e = 0; e < cfg.girl.pretrain_epochs; ++e) {
            supervised_pretrain(model, data.pool, 1, opt, cfg.girl.episode_len, rng);
            log.snapshots.emplace_back(e + 1, model.params().values());
        }
    }

    const fs::path seed_dir = cfg.out_dir / ("seed-" + std::to_string(seed));
    save_model<Task>(seed_dir / "model.json", model, cfg.method, seed);
    atomic_write_file(seed_dir / "run_log.jsonl", run_log_to_jsonl(log));
    atomic_write_file(seed_dir / "snapshots.jsonl", snapshots_to_jsonl(log));
    model.vocab().save(cfg.out_dir / "vocab.txt");  // same across seeds
    std::cerr << "train: seed " << seed << " done, pool " << data.pool.size() << " -> "
              << seed_dir.string() << "\n";
}

template <class Task>
void cmd_pretrain_t(const RunConfig& cfg, const std::vector<std::uint64_t>& seeds) {
    auto data = prepare_training_data<Task>(cfg);
    for (auto seed : seeds) {
        auto model = Task::build(data.train, cfg.encoder, cfg.min_count, seed);
        OptimizerState opt(model.params().size(), cfg.optimizer);
        Rng rng(seed);
        supervised_pretrain(model, data.pool, cfg.girl.pretrain_epochs, opt,
                            cfg.girl.episode_len, rng);
        const fs::path seed_dir = cfg.out_dir / ("seed-" + std::to_string(seed));
        save_model<Task>(seed_dir / "pretrained.json", model, "supervised", seed);
        std::cerr << "pretrain: seed " << seed << " -> " << seed_dir.string() << "\n";
    }
    write_run_manifest(cfg, "pretrain");
}

template <class Task>
Prf evaluate_model(const typename Task::Model& model,
                   const std::vector<typename Task::Example>& test, Prf* trig = nullptr,
                   Prf* arg = nullptr) {
    std::vector<typename Task::Label> preds, golds;
    for (const auto& ex : test) {
        preds.push_back(model.predict(ex));
        golds.push_back(Task::Model::label_of(ex));
    }
    if constexpr (std::is_same_v<Task, EeTask>) {
        const Prf trig_m = trig_c_f1(preds, golds);
        const Prf arg_m = arg_c_f1(preds, golds);
        if (trig) *trig = trig_m;
        if (arg) *arg = arg_m;
        return trig_m;
    } else {
        (void)trig;
        (void)arg;
        return model.quality(preds, golds);
    }
}

template <class Task>
void cmd_eval_t(const RunConfig& cfg, const std::vector<std::uint64_t>& seeds) {
    const fs::path data_path = cfg.eval_split == "valid" ? cfg.valid_path : cfg.test_path;
    if (data_path.empty())
        throw ConfigError("eval: data." + cfg.eval_split + " is required");
    auto corpus = Task::read(data_path);

    std::vector<Prf> results;
    for (auto seed : seeds) {
        const fs::path seed_dir = cfg.out_dir / ("seed-" + std::to_string(seed));
        auto model = load_model<Task>(seed_dir / "model.json");
        auto test = Task::remap(model, corpus);
        Prf trig, arg;
        const Prf primary = evaluate_model<Task>(model, test, &trig, &arg);
        results.push_back(primary);

        ordered_json j;
        j["task"] = Task::name;
        j["method"] = cfg.method;
        j["seed"] = seed;
        j["precision"] = primary.precision;
        j["recall"] = primary.recall;
        j["f1"] = primary.f1;
        if constexpr (std::is_same_v<Task, EeTask>) {
            j["trig_c"] = prf_json(trig);
            j["arg_c"] = prf_json(arg);
        }
        atomic_write_file(seed_dir / "metrics.json", j.dump(2) + "\n");
        std::cerr << "eval: seed " << seed << " f1 " << primary.f1 << "\n";
    }

    // Mean and population standard deviation over the evaluated seeds.
    auto stats = [&](auto field) {
        double mean = 0.0;
        for (const auto& r : results) mean += field(r);
        mean /= static_cast<double>(results.size());
        double var = 0.0;
        for (const auto& r : results) var += (field(r) - mean) * (field(r) - mean);
        var /= static_cast<double>(results.size());
        return std::make_pair(mean, std::sqrt(var));
    };
    const auto [pm, ps] = stats([](const Prf& r) { return r.precision; });
    const auto [rm, rs] = stats([](const Prf& r) { return r.recall; });
    const auto [fm, fsd] = stats([](const Prf& r) { return r.f1; });
    ordered_json agg;
    agg["task"] = Task::name;
    agg["method"] = cfg.method;
    agg["seeds"] = seeds;
    agg["mean"] = {{"precision", pm}, {"recall", rm}, {"f1", fm}};
    agg["std"] = {{"precision", ps}, {"recall", rs}, {"f1", fsd}};
    atomic_write_file(cfg.out_dir / "metrics_aggregate.json", agg.dump(2) + "\n");
}

inline int cmd_gradcheck(const RunConfig& cfg, std::ostream& out) {
    const auto report = gradcheck_suite(cfg.seeds.front(), 10, out);
    out << (report.pass() ? "gradcheck: PASS" : "gradcheck: FAIL") << "\n";
    return report.pass() ? 0 : 2;
}

inline void cmd_export_trajectory(const fs::path& run_dir) {
    const fs::path snap_path = run_dir / "snapshots.jsonl";
    std::istringstream in(read_text_file(snap_path));
    std::string line;
    std::vector<long> steps;
    std::vector<std::vector<double>> values;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        ordered_json j = ordered_json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw DataError("snapshots line " + std::to_string(line_no) + ": malformed JSON");
        steps.push_back(j.at("step").get<long>());
        values.push_back(j.at("values").get<std::vector<double>>());
    }
    auto points = pca_project(values, 2);
    atomic_write_file(run_dir / "trajectory.csv", trajectory_csv(steps, points));
    std::cerr << "export-trajectory: " << points.size() << " snapshots -> "
              << (run_dir / "trajectory.csv").string() << "\n";
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

template <class Fn>
auto with_task(const std::string& task, Fn&& fn) {
    if (task == "ner") return fn(NerTask{});
    if (task == "re") return fn(ReTask{});
    if (task == "ee") return fn(EeTask{});
    throw ConfigError("unknown task: " + task);
}

inline int dispatch(const std::string& command, const RunConfig& cfg,
                    std::optional<std::uint64_t> seed_override) {
    std::vector<std::uint64_t> seeds =
        seed_override ? std::vector<std::uint64_t>{*seed_override} : cfg.seeds;

    if (command == "synth") {
        with_task(cfg.task, [&](auto task) {
            using Task = decltype(task);
            cmd_synth_t<Task>(cfg);
        });
    } else if (command == "split") {
        with_task(cfg.task, [&](auto task) {
            using Task = decltype(task);
            cmd_split_t<Task>(cfg);
        });
    } else if (command == "pretrain") {
        with_task(cfg.task, [&](auto task) {
            using Task = decltype(task);
            cmd_pretrain_t<Task>(cfg, seeds);
        });
    } else if (command == "train") {
        with_task(cfg.task, [&](auto task) {
            using Task = decltype(task);
            for (auto seed : seeds) train_one_seed<Task>(cfg, seed);
            write_run_manifest(cfg, "train");
        });
    } else if (command == "eval") {
        with_task(cfg.task, [&](auto task) {
            using Task = decltype(task);
            cmd_eval_t<Task>(cfg, seeds);
        });
    } else if (command == "gradcheck") {
        return cmd_gradcheck(cfg, std::cout);
    } else {
        throw ConfigError("unknown command: " + command);
    }
    return 0;
}

}  // namespace grail::run
