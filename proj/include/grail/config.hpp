#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "grail/adamw.hpp"
#include "grail/common.hpp"
#include "grail/data.hpp"
#include "grail/encoder.hpp"
#include "grail/gradient_imitation.hpp"

namespace grail {

// Flat INI-style configuration: `[section]` headers, `key = value` lines,
// `#`/`;` comments. Keys are addressed as "section.key".
class Config {
public:
    static Config parse(const std::string& text) {
        Config cfg;
        std::istringstream in(text);
        std::string line, section;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            std::string s = trim(line);
            if (s.empty() || s[0] == '#' || s[0] == ';') continue;
            if (s.front() == '[') {
                if (s.back() != ']')
                    throw ConfigError("config line " + std::to_string(line_no) +
                                      ": malformed section header");
                section = trim(s.substr(1, s.size() - 2));
                continue;
            }
            const auto eq = s.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": expected key = value");
            std::string key = trim(s.substr(0, eq));
            std::string value = trim(s.substr(eq + 1));
            if (key.empty())
                throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
            cfg.kv_[section.empty() ? key : section + "." + key] = value;
        }
        return cfg;
    }

    static Config load(const std::filesystem::path& path) {
        try {
            return parse(read_text_file(path));
        } catch (const DataError& e) {
            throw ConfigError(e.what());
        }
    }

    bool has(const std::string& key) const { return kv_.count(key) != 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        auto it = kv_.find(key);
        return it == kv_.end() ? fallback : it->second;
    }

    std::string require_string(const std::string& key) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) throw ConfigError("config: missing required key '" + key + "'");
        return it->second;
    }

    long get_int(const std::string& key, long fallback) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) return fallback;
        try {
            std::size_t pos = 0;
            const long v = std::stol(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("");
            return v;
        } catch (...) {
            throw ConfigError("config: key '" + key + "' is not an integer: " + it->second);
        }
    }

    double get_double(const std::string& key, double fallback) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) return fallback;
        try {
            std::size_t pos = 0;
            const double v = std::stod(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("");
            return v;
        } catch (...) {
            throw ConfigError("config: key '" + key + "' is not a number: " + it->second);
        }
    }

    bool get_bool(const std::string& key, bool fallback) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) return fallback;
        if (it->second == "true" || it->second == "1" || it->second == "yes") return true;
        if (it->second == "false" || it->second == "0" || it->second == "no") return false;
        throw ConfigError("config: key '" + key + "' is not a boolean: " + it->second);
    }

    std::vector<std::uint64_t> get_seed_list(const std::string& key,
                                             std::vector<std::uint64_t> fallback) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) return fallback;
        std::vector<std::uint64_t> seeds;
        std::istringstream ss(it->second);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item.empty()) continue;
            try {
                seeds.push_back(std::stoull(item));
            } catch (...) {
                throw ConfigError("config: key '" + key + "' has a non-integer seed: " + item);
            }
        }
        if (seeds.empty()) throw ConfigError("config: key '" + key + "' lists no seeds");
        return seeds;
    }

    const std::map<std::string, std::string>& entries() const { return kv_; }

private:
    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return "";
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    }

    std::map<std::string, std::string> kv_;
};

// Fully resolved run configuration with documented defaults.
struct RunConfig {
    std::string task;    // ner | re | ee
    std::string method = "girl";  // supervised | pseudo-labeling | girl
    std::vector<std::uint64_t> seeds{1};
    std::filesystem::path out_dir = "runs/out";

    std::filesystem::path train_path;
    std::filesystem::path valid_path;
    std::filesystem::path test_path;
    std::filesystem::path split_manifest_path;  // defaults to <out>/split.json

    SplitSpec split;
    SynthSpec synth;
    int synth_test_sentences = 500;  // test corpus is generated noise-free
    EncoderConfig encoder;
    int min_count = 1;
    AdamwConfig optimizer;
    GirlConfig girl;
    std::string eval_split = "test";

    Config raw;

    static RunConfig from_config(Config cfg) {
        RunConfig rc;
        rc.task = cfg.require_string("run.task");
        if (rc.task != "ner" && rc.task != "re" && rc.task != "ee")
            throw ConfigError("config: run.task must be ner, re, or ee");
        rc.method = cfg.get_string("run.method", "girl");
        if (rc.method != "supervised" && rc.method != "pseudo-labeling" && rc.method != "girl")
            throw ConfigError("config: run.method must be supervised, pseudo-labeling, or girl");
        rc.seeds = cfg.get_seed_list("run.seeds", {1});
        rc.out_dir = cfg.get_string("run.out", "runs/out");

        rc.train_path = cfg.get_string("data.train", "");
        rc.valid_path = cfg.get_string("data.valid", "");
        rc.test_path = cfg.get_string("data.test", "");
        rc.split_manifest_path =
            cfg.get_string("split.manifest", (rc.out_dir / "split.json").string());

        const std::string mode = cfg.get_string("split.mode", "fraction");
        if (mode == "kshot" || mode == "k-shot") {
            rc.split.mode = SplitSpec::Mode::kshot;
        } else if (mode == "fraction") {
            rc.split.mode = SplitSpec::Mode::fraction;
        } else {
            throw ConfigError("config: split.mode must be kshot or fraction");
        }
        rc.split.k = static_cast<int>(cfg.get_int("split.k", 5));
        rc.split.fraction = cfg.get_double("split.fraction", 0.05);
        rc.split.unlabeled_fraction = cfg.get_double("split.unlabeled_fraction", 0.5);
        rc.split.segments = static_cast<int>(cfg.get_int("split.segments", 10));
        rc.split.seed = static_cast<std::uint64_t>(cfg.get_int("split.seed", 1));

        rc.synth.task = cfg.get_string("synth.task", rc.task);
        if (rc.synth.task != rc.task)
            throw ConfigError("config: synth.task must match run.task");
        rc.synth.template_set = cfg.get_string("synth.template_set", "default");
        rc.synth.lexicon_size = static_cast<int>(cfg.get_int("synth.lexicon_size", 40));
        rc.synth.sentences = static_cast<int>(cfg.get_int("synth.sentences", 1000));
        rc.synth.noise = cfg.get_double("synth.noise", 0.0);
        rc.synth.round_robin = cfg.get_bool("synth.round_robin", false);
        rc.synth.seed = static_cast<std::uint64_t>(cfg.get_int("synth.seed", 7));
        rc.synth_test_sentences = static_cast<int>(cfg.get_int("synth.test_sentences", 500));

        rc.encoder.embed_dim = static_cast<int>(cfg.get_int("encoder.embed_dim", 32));
        rc.encoder.window = static_cast<int>(cfg.get_int("encoder.window", 2));
        rc.encoder.hidden_dim = static_cast<int>(cfg.get_int("encoder.hidden_dim", 64));
        rc.encoder.max_len = static_cast<int>(cfg.get_int("encoder.max_len", 128));
        rc.min_count = static_cast<int>(cfg.get_int("encoder.min_count", 1));

        rc.optimizer.learning_rate = cfg.get_double("optimizer.learning_rate", 1e-3);
        rc.optimizer.beta1 = cfg.get_double("optimizer.beta1", 0.9);
        rc.optimizer.beta2 = cfg.get_double("optimizer.beta2", 0.999);
        rc.optimizer.epsilon = cfg.get_double("optimizer.epsilon", 1e-8);
        rc.optimizer.weight_decay = cfg.get_double("optimizer.weight_decay", 1e-3);
        rc.optimizer.validate();

        rc.girl.lambda = cfg.get_double("girl.lambda", 0.5);
        // Per-task default episode length: 10 for event extraction, 16 otherwise.
        rc.girl.episode_len =
            static_cast<int>(cfg.get_int("girl.episode_len", rc.task == "ee" ? 10 : 16));
        rc.girl.pretrain_epochs = static_cast<int>(cfg.get_int("girl.pretrain_epochs", 20));
        rc.girl.refit_epochs = static_cast<int>(cfg.get_int("girl.refit_epochs", 1));
        const std::string scope = cfg.get_string("girl.scope", "all");
        if (scope == "all") {
            rc.girl.scope = GradientScope::all;
        } else if (scope == "head-only") {
            rc.girl.scope = GradientScope::head_only;
        } else {
            throw ConfigError("config: girl.scope must be all or head-only");
        }
        const std::string refresh = cfg.get_string("girl.refresh", "episode");
        if (refresh == "episode") {
            rc.girl.refresh = GradientRefresh::episode;
        } else if (refresh == "pretrain-only") {
            rc.girl.refresh = GradientRefresh::pretrain_only;
        } else {
            throw ConfigError("config: girl.refresh must be episode or pretrain-only");
        }
        rc.girl.rl_learning_rate = cfg.get_double("girl.rl_learning_rate", 0.0);
        rc.girl.confidence_threshold = cfg.get_double("girl.confidence_threshold", 0.9);
        rc.girl.validate();

        rc.eval_split = cfg.get_string("eval.split", "test");
        if (rc.eval_split != "test" && rc.eval_split != "valid")
            throw ConfigError("config: eval.split must be test or valid");

        rc.raw = std::move(cfg);
        return rc;
    }

    static RunConfig load(const std::filesystem::path& path) {
        return from_config(Config::load(path));
    }
};

}  // namespace grail
