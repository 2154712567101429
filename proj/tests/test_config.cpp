#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "byzfl/config.hpp"
#include "byzfl/metrics_io.hpp"

using namespace byzfl;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "byzfl_test_config";
    fs::create_directories(dir);
    return dir / name;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string key_of_error(std::string_view text, const std::vector<cli::Override>& overrides = {}) {
    try {
        cli::parse_config_text(text, overrides);
    } catch (const cli::ConfigError& e) {
        return e.key();
    }
    return "";
}

fed::ExperimentConfig tiny_run() {
    fed::ExperimentConfig c;
    c.dataset = fed::DatasetSource::Synthetic;
    c.synthetic.train_size = 200;
    c.synthetic.test_size = 100;
    c.synthetic.num_features = 4;
    c.num_devices = 4;
    c.batch_size = 10;
    c.rounds = 3;
    return c;
}

void write_csv(const fs::path& path, const std::vector<double>& accuracies) {
    cli::MetricsWriter out(path);
    for (std::size_t t = 0; t < accuracies.size(); ++t) {
        fed::RoundMetrics m;
        m.round = t;
        m.train_loss = 1.0;
        m.test_accuracy = accuracies[t];
        out.write(m);
    }
}

} // namespace

TEST_CASE("empty config gives the defaults") {
    auto c = cli::parse_config_text("");
    CHECK(c == fed::ExperimentConfig{});
    CHECK(c.num_devices == 50);
    CHECK(c.batch_size == 50);
    CHECK(c.learning_rate == 1e-2);
    CHECK(c.nu == 1e-4);
    CHECK(c.tol == 1e-5);
    CHECK(c.max_iter == 1000);
    CHECK(c.air.power == 1.0);
    CHECK(c.air.noise_var == 1e-2);
    CHECK(c.air.threshold_mult == 500.0);
    CHECK(cli::parse_config("") == c);
}

TEST_CASE("parsing") {
    auto c = cli::parse_config_text("# comment\n\nK = 20\n  B=4   # trailing\nattack = weightflip\nmode = aircomp\ncmult = inf\n");
    CHECK(c.num_devices == 20);
    CHECK(c.num_byzantine == 4);
    CHECK(c.attack == attack::AttackKind::WeightFlip);
    CHECK(c.mode == fed::AggregationMode::AirCompGM);
    CHECK(std::isinf(c.air.threshold_mult));
}

TEST_CASE("errors name the key") {
    CHECK(key_of_error("B = 60\n") == "B");
    CHECK(key_of_error("colour = red\n") == "colour");
    CHECK(key_of_error("lr = fast\n") == "lr");
    CHECK(key_of_error("K = -3\n") == "K");
    CHECK(key_of_error("mode = median\n") == "mode");
    CHECK(key_of_error("sigma2 = -1\n") == "sigma2");
    CHECK(key_of_error("", {{"rounds", "0"}}) == "rounds");
    CHECK_THROWS_AS(cli::parse_config_text("just some words\n"), cli::ConfigError);
    CHECK_THROWS_AS(cli::parse_config("/nonexistent/byzfl.cfg"), std::exception);
}

TEST_CASE("flag overrides beat the file") {
    const auto path = scratch("override.cfg");
    std::ofstream(path) << "sigma2 = 1e-2\nseed = 3\n";
    auto c = cli::parse_config(path, {{"sigma2", "0"}});
    CHECK(c.air.noise_var == 0.0);
    CHECK(c.seed == 3);
}

TEST_CASE("manifest round-trip property") {
    std::mt19937_64 gen(31);
    std::uniform_real_distribution<double> u(-6, 1);
    auto real = [&] { return std::pow(10.0, u(gen)) * (1 + 1e-7 * (gen() % 1000)); };
    for (int trial = 0; trial < 200; ++trial) {
        fed::ExperimentConfig c;
        c.num_devices = 1 + gen() % 100;
        c.num_byzantine = gen() % c.num_devices;
        c.attack = static_cast<attack::AttackKind>(gen() % 3);
        c.mode = static_cast<fed::AggregationMode>(gen() % 3);
        c.rounds = 1 + gen() % 1000;
        c.batch_size = 1 + gen() % 500;
        c.learning_rate = real();
        c.nu = real();
        c.max_iter = 1 + gen() % 5000;
        c.tol = real();
        c.air.power = real();
        c.air.noise_var = gen() % 4 == 0 ? 0.0 : real();
        c.air.threshold_mult = gen() % 4 == 0 ? std::numeric_limits<double>::infinity() : real();
        c.air.b_floor = real();
        c.air.norm_floor = real();
        c.dataset = static_cast<fed::DatasetSource>(gen() % 2);
        c.mnist_dir = "data/run_" + std::to_string(gen() % 1000);
        c.synthetic.train_size = 10 + gen() % 10000;
        c.synthetic.test_size = 1 + gen() % 1000;
        c.synthetic.num_features = 1 + gen() % 50;
        c.synthetic.num_classes = 2 + static_cast<int>(gen() % 20);
        c.synthetic.mean_scale = real();
        c.weight_rule = static_cast<fed::WeightRule>(gen() % 2);
        c.seed = gen();
        c.audit_every = gen() % 10;
        REQUIRE_NOTHROW(c.validate());

        cli::RunManifest m{c, "0.1.0", "2026-01-01T00:00:00Z", "out/metrics.csv"};
        CHECK(cli::parse_config_text(cli::write_manifest(m)) == c);
    }
}

TEST_CASE("metrics rows") {
    fed::RoundMetrics m;
    m.round = 7;
    m.train_loss = 2.302585092994046;
    m.test_accuracy = 0.5;
    m.weiszfeld_iters = 12;
    m.distorted_devices = 3;
    m.decode_failures = 1;
    CHECK(cli::format_metrics_row(m) == "7,2.30258509,0.5,12,3,1");
}

TEST_CASE("metrics csv from a short run") {
    auto c = tiny_run();
    const auto a = scratch("a.csv"), b = scratch("b.csv");
    for (const auto& path : {a, b}) {
        cli::MetricsWriter out(path);
        fed::run_experiment(c, [&](const fed::RoundMetrics& m) { out.write(m); });
    }
    const auto text = slurp(a);
    CHECK(text == slurp(b));

    std::istringstream in(text);
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(in, line)) lines.push_back(line);
    REQUIRE(lines.size() == 4);
    CHECK(lines[0] == cli::kMetricsHeader);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        std::vector<std::string> cols;
        std::stringstream row(lines[i]);
        std::string cell;
        while (std::getline(row, cell, ',')) cols.push_back(cell);
        REQUIRE(cols.size() == 6);
        CHECK(std::stoul(cols[0]) == i - 1);
        const double acc = std::stod(cols[2]);
        CHECK(acc >= 0.0);
        CHECK(acc <= 1.0);
    }
}

TEST_CASE("compare runs") {
    const auto a = scratch("cmp_a.csv"), b = scratch("cmp_b.csv"), low = scratch("cmp_low.csv");
    write_csv(a, {0.1, 0.85, 0.9, 0.7});
    write_csv(b, {0.1, 0.85, 0.9, 0.7});
    write_csv(low, {0.1, 0.2, 0.3});

    auto s = cli::summarize_run(a, 0.8);
    CHECK(s.rounds == 4);
    CHECK(s.final_accuracy == 0.7);
    CHECK(s.best_accuracy == 0.9);
    REQUIRE(s.rounds_to_threshold.has_value());
    CHECK(*s.rounds_to_threshold == 1);
    CHECK_FALSE(cli::summarize_run(low, 0.8).rounds_to_threshold.has_value());

    std::ostringstream one;
    std::vector<fs::path> single{a};
    cli::compare_runs(single, 0.8, one);
    CHECK(one.str().find("0.9") != std::string::npos);

    std::ostringstream two;
    std::vector<fs::path> pair{a, b};
    cli::compare_runs(pair, 0.8, two);
    std::vector<std::string> lines;
    std::istringstream in(two.str());
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    REQUIRE(lines.size() >= 2);
    auto strip = [&](std::string l, const fs::path& p) {
        auto pos = l.find(p.string());
        if (pos != std::string::npos) l.erase(pos, p.string().size());
        return l;
    };
    CHECK(strip(lines[lines.size() - 2], a) == strip(lines[lines.size() - 1], b));

    std::ostringstream never;
    std::vector<fs::path> lows{low};
    cli::compare_runs(lows, 0.8, never);
    CHECK(never.str().find("—") != std::string::npos);

    const auto bad = scratch("cmp_bad.csv");
    std::ofstream(bad) << "round,loss\n0,1\n";
    CHECK_THROWS_AS(cli::summarize_run(bad, 0.8), std::runtime_error);
}
