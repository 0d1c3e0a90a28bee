// grail: experiment driver for semi-supervised information extraction with
// gradient-imitation self-training.
//
//   grail <synth|split|pretrain|train|eval|gradcheck|export-trajectory>
//         --config <path> [--seed N] [--out DIR]

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "grail/grail.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required = true) {
    auto* opt = cmd->add_option("--config", args.config_path, "run configuration file");
    if (config_required) opt->required();
    cmd->add_option("--seed", args.seed, "restrict to a single seed");
    cmd->add_option("--out", args.out_dir, "output directory (overrides run.out)");
}

grail::RunConfig load_config(const CommonArgs& args) {
    auto cfg = grail::RunConfig::load(args.config_path);
    if (!args.out_dir.empty()) {
        cfg.out_dir = args.out_dir;
        if (!cfg.raw.has("split.manifest"))
            cfg.split_manifest_path = cfg.out_dir / "split.json";
    }
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"semi-supervised information extraction experiments"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string run_dir;

    auto* synth = app.add_subcommand("synth", "generate a synthetic gold-labeled corpus");
    add_common(synth, args);
    auto* split = app.add_subcommand("split", "produce a low-resource split manifest");
    add_common(split, args);
    auto* pretrain = app.add_subcommand("pretrain", "supervised pretraining on the labeled pool");
    add_common(pretrain, args);
    auto* train = app.add_subcommand("train", "run the configured training method per seed");
    add_common(train, args);
    auto* eval = app.add_subcommand("eval", "evaluate trained models and aggregate metrics");
    add_common(eval, args);
    auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient suite");
    add_common(gradcheck, args);
    auto* export_traj =
        app.add_subcommand("export-trajectory", "PCA-project parameter snapshots to CSV");
    add_common(export_traj, args, /*config_required=*/false);
    export_traj->add_option("--run", run_dir, "run directory containing snapshots.jsonl");

    CLI11_PARSE(app, argc, argv);

    try {
        if (export_traj->parsed()) {
            std::filesystem::path dir;
            if (!run_dir.empty()) {
                dir = run_dir;
            } else if (!args.config_path.empty()) {
                auto cfg = load_config(args);
                const auto seed = args.seed ? *args.seed : cfg.seeds.front();
                dir = cfg.out_dir / ("seed-" + std::to_string(seed));
            } else {
                throw grail::ConfigError("export-trajectory: provide --run or --config");
            }
            grail::run::cmd_export_trajectory(dir);
            return 0;
        }

        auto cfg = load_config(args);
        const std::string command = app.get_subcommands().front()->get_name();
        return grail::run::dispatch(command, cfg, args.seed);
    } catch (const grail::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
