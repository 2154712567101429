// byzfl: run Byzantine-resilient federated learning experiments and compare
// their metrics files.
//
//   byzfl run --config exp.cfg --out runs/a --mode aircomp --byzantine 8
//   byzfl compare runs/a/metrics.csv runs/b/metrics.csv

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "byzfl/config.hpp"
#include "byzfl/metrics_io.hpp"

namespace {

constexpr const char* kMnistEnv = "BYZFL_MNIST_DIR";

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct RunOptions {
    std::string config;
    std::string out = "out";
    std::optional<std::string> seed, mode, attack, byzantine, sigma2, cmult, rounds, dataset;
    std::vector<std::string> sets;
    bool quiet = false;
};

int run(const RunOptions& opt) {
    using byzfl::cli::Override;
    std::vector<Override> overrides;
    if (const char* dir = std::getenv(kMnistEnv); dir && *dir) overrides.emplace_back("mnist_dir", dir);
    for (const auto& kv : opt.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw byzfl::cli::ConfigError(kv, "--set expects key=value");
        overrides.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
    }
    const std::pair<const char*, const std::optional<std::string>*> flags[] = {
        {"seed", &opt.seed},     {"mode", &opt.mode},     {"attack", &opt.attack}, {"B", &opt.byzantine},
        {"sigma2", &opt.sigma2}, {"cmult", &opt.cmult},   {"rounds", &opt.rounds}, {"dataset", &opt.dataset},
    };
    for (const auto& [key, value] : flags)
        if (value->has_value()) overrides.emplace_back(key, **value);

    const auto config = byzfl::cli::parse_config(opt.config, overrides);

    const std::filesystem::path out_dir = opt.out;
    std::filesystem::create_directories(out_dir);
    const auto metrics_path = out_dir / "metrics.csv";
    {
        std::ofstream manifest(out_dir / "manifest.txt", std::ios::trunc);
        manifest << byzfl::cli::write_manifest({config, BYZFL_VERSION, utc_timestamp(), metrics_path});
        if (!manifest) throw std::runtime_error("cannot write manifest in " + out_dir.string());
    }

    byzfl::cli::MetricsWriter writer(metrics_path);
    byzfl::fed::run_experiment(config, [&](const byzfl::fed::RoundMetrics& m) {
        writer.write(m);
        if (!opt.quiet)
            std::cerr << "round " << m.round << "  loss " << m.train_loss << "  acc " << m.test_accuracy << "  iters "
                      << m.weiszfeld_iters << (m.aggregation_failed ? "  [aggregation failed]" : "") << '\n';
    });
    std::cout << metrics_path.string() << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Byzantine-resilient federated learning with smoothed geometric median aggregation"};
    app.require_subcommand(1);

    RunOptions run_opt;
    auto* run_cmd = app.add_subcommand("run", "Run one experiment and write metrics.csv + manifest.txt");
    run_cmd->add_option("--config", run_opt.config, "key = value experiment file");
    run_cmd->add_option("--out", run_opt.out, "output directory")->capture_default_str();
    run_cmd->add_option("--seed", run_opt.seed, "master seed");
    run_cmd->add_option("--mode", run_opt.mode, "ideal | aircomp | mean");
    run_cmd->add_option("--attack", run_opt.attack, "none | classflip | weightflip");
    run_cmd->add_option("--byzantine", run_opt.byzantine, "number of Byzantine devices B");
    run_cmd->add_option("--sigma2", run_opt.sigma2, "receiver noise variance");
    run_cmd->add_option("--cmult", run_opt.cmult, "soft-threshold multiplier (inf: never binds)");
    run_cmd->add_option("--rounds", run_opt.rounds, "number of rounds T");
    run_cmd->add_option("--dataset", run_opt.dataset, "mnist | synthetic");
    run_cmd->add_option("--set", run_opt.sets, "any config key, as key=value (repeatable)");
    run_cmd->add_flag("--quiet", run_opt.quiet, "no per-round progress on stderr");

    std::vector<std::string> csvs;
    double threshold = 0.8;
    auto* cmp_cmd = app.add_subcommand("compare", "Summarize metrics CSV files side by side");
    cmp_cmd->add_option("csv", csvs, "metrics files")->required();
    cmp_cmd->add_option("--threshold", threshold, "accuracy for rounds-to-threshold")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*run_cmd) return run(run_opt);
        std::vector<std::filesystem::path> paths(csvs.begin(), csvs.end());
        byzfl::cli::compare_runs(paths, threshold, std::cout);
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
