#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <set>

#include "byzfl/federation.hpp"
#include "byzfl/model.hpp"
#include "oracles.hpp"

using namespace byzfl;

namespace {

fed::ExperimentConfig small_synthetic() {
    fed::ExperimentConfig c;
    c.dataset = fed::DatasetSource::Synthetic;
    c.synthetic.train_size = 600;
    c.synthetic.test_size = 200;
    c.synthetic.num_features = 5;
    c.synthetic.num_classes = 10;
    c.synthetic.mean_scale = 10.0;
    c.num_devices = 6;
    c.batch_size = 20;
    c.learning_rate = 0.1;
    c.rounds = 5;
    return c;
}

// Scenario used by the Byzantine resilience checks.
fed::ExperimentConfig desk_scale() {
    fed::ExperimentConfig c;
    c.dataset = fed::DatasetSource::Synthetic;
    c.synthetic.mean_scale = 10.0;
    c.num_devices = 20;
    c.batch_size = 250;
    c.learning_rate = 0.1;
    c.rounds = 150;
    return c;
}

bool same_metrics(const fed::RoundMetrics& a, const fed::RoundMetrics& b) {
    return a.round == b.round && a.train_loss == b.train_loss && a.test_accuracy == b.test_accuracy &&
           a.test_loss == b.test_loss && a.weiszfeld_iters == b.weiszfeld_iters &&
           a.distorted_devices == b.distorted_devices && a.decode_failures == b.decode_failures &&
           a.aggregation_failed == b.aggregation_failed;
}

// K shards that all hold copies of the same labeled sample.
fed::Environment repeated_sample_env(const fed::ExperimentConfig& c, const std::vector<double>& x, int y) {
    data::Dataset train;
    train.num_features = x.size();
    train.num_classes = 10;
    for (std::size_t i = 0; i < c.num_devices * c.batch_size; ++i) {
        train.features.insert(train.features.end(), x.begin(), x.end());
        train.labels.push_back(y);
    }
    return fed::prepare(c, train, data::gen_synthetic(50, x.size(), 10, 1));
}

} // namespace

TEST_CASE("stream seeding") {
    auto a = seed_streams(7, 5), b = seed_streams(7, 5);
    CHECK(a.channel == b.channel);
    CHECK(a.noise == b.noise);
    CHECK(a.devices == b.devices);
    CHECK(a.partition_seed == b.partition_seed);

    for (std::size_t i = 0; i < 5; ++i) {
        for (std::size_t j = i + 1; j < 5; ++j) {
            auto ri = a.devices[i], rj = a.devices[j];
            bool differ = false;
            for (int n = 0; n < 100; ++n) differ = differ || ri() != rj();
            CHECK(differ);
        }
    }

    auto wide = seed_streams(7, 50);
    CHECK(wide.channel == a.channel);
    CHECK(wide.noise == a.noise);
    for (std::size_t i = 0; i < 5; ++i) CHECK(wide.devices[i] == a.devices[i]);
    CHECK(seed_streams(8, 5).channel != a.channel);
    CHECK(a.channel != a.noise);
}

TEST_CASE("mode and rule names round-trip") {
    for (auto m : {fed::AggregationMode::IdealGM, fed::AggregationMode::AirCompGM, fed::AggregationMode::Mean})
        CHECK(fed::parse_mode(fed::to_string(m)) == m);
    for (auto d : {fed::DatasetSource::Mnist, fed::DatasetSource::Synthetic})
        CHECK(fed::parse_dataset(fed::to_string(d)) == d);
    for (auto r : {fed::WeightRule::Uniform, fed::WeightRule::SampleCount})
        CHECK(fed::parse_weight_rule(fed::to_string(r)) == r);
    CHECK_THROWS_AS(fed::parse_mode("median"), std::invalid_argument);
}

TEST_CASE("config validation") {
    auto c = small_synthetic();
    CHECK_NOTHROW(c.validate());
    c.num_byzantine = 6;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = small_synthetic();
    c.rounds = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = small_synthetic();
    c.air.noise_var = -1;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = small_synthetic();
    c.batch_size = 101;
    CHECK_THROWS(fed::prepare(c));
}

TEST_CASE("byzantine devices are the first B ids") {
    auto c = small_synthetic();
    auto clean = fed::prepare(c);
    c.num_byzantine = 2;
    c.attack = attack::AttackKind::ClassFlip;
    auto env = fed::prepare(c);
    REQUIRE(env.devices.size() == 6);
    for (std::size_t k = 0; k < 6; ++k) {
        CHECK(env.devices[k].id == k);
        CHECK(env.devices[k].byzantine == (k < 2));
        const auto& got = env.devices[k].shard.data;
        const auto& ref = clean.devices[k].shard.data;
        CHECK(got.features == ref.features);
        for (std::size_t i = 0; i < got.size(); ++i)
            CHECK(got.labels[i] == (k < 2 ? 9 - ref.labels[i] : ref.labels[i]));
    }
    CHECK(env.train == clean.train);
    CHECK(env.alphas == std::vector<double>(6, 1.0 / 6));
}

TEST_CASE("mean of identical devices is a single SGD step") {
    auto c = small_synthetic();
    c.mode = fed::AggregationMode::Mean;
    const std::vector<double> x{0.2, 0.9, 0.1, 0.5, 0.7};
    auto env = repeated_sample_env(c, x, 4);
    ModelParams w(env.dim(), 0.0);
    auto r = fed::run_round(0, w, env, c);

    data::Dataset one;
    one.num_features = x.size();
    one.num_classes = 10;
    one.features = x;
    one.labels = {4};
    std::vector<std::size_t> idx{0};
    auto g = model::gradient(w, model::Batch{one, idx});
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(r.next[i] == doctest::Approx(-c.learning_rate * g[i]).epsilon(1e-13));

    c.mode = fed::AggregationMode::IdealGM;
    auto env2 = repeated_sample_env(c, x, 4);
    auto r2 = fed::run_round(0, w, env2, c);
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(r2.next[i] == doctest::Approx(r.next[i]).epsilon(1e-13));
}

TEST_CASE("runs are deterministic and T = 1 is one round") {
    for (auto mode : {fed::AggregationMode::IdealGM, fed::AggregationMode::AirCompGM, fed::AggregationMode::Mean}) {
        auto c = small_synthetic();
        c.mode = mode;
        c.num_byzantine = 2;
        c.attack = attack::AttackKind::WeightFlip;
        auto a = fed::run_experiment(c);
        auto b = fed::run_experiment(c);
        REQUIRE(a.rounds.size() == 5);
        for (std::size_t t = 0; t < 5; ++t) {
            CHECK(same_metrics(a.rounds[t], b.rounds[t]));
            CHECK(a.rounds[t].round == t);
            CHECK(a.rounds[t].test_accuracy >= 0.0);
            CHECK(a.rounds[t].test_accuracy <= 1.0);
        }
        CHECK(a.final_model == b.final_model);

        c.rounds = 1;
        auto one = fed::run_experiment(c);
        auto env = fed::prepare(c);
        auto r = fed::run_round(0, ModelParams(env.dim(), 0.0), env, c);
        CHECK(same_metrics(one.rounds[0], r.metrics));
        CHECK(one.final_model == r.next);
    }
}

TEST_CASE("round zero loss of the zero model") {
    auto c = small_synthetic();
    auto res = fed::run_experiment(c);
    CHECK(std::abs(res.rounds[0].train_loss - std::log(10.0)) < 1e-9);
}

TEST_CASE("noiseless aligned AirComp tracks the ideal trajectory") {
    auto c = small_synthetic();
    c.rounds = 10;
    auto ideal_env = fed::prepare(c);
    auto air_cfg = c;
    air_cfg.mode = fed::AggregationMode::AirCompGM;
    air_cfg.air.noise_var = 0.0;
    air_cfg.air.threshold_mult = std::numeric_limits<double>::infinity();
    auto air_env = fed::prepare(air_cfg);

    ModelParams wi(ideal_env.dim(), 0.0), wa = wi;
    for (std::size_t t = 0; t < c.rounds; ++t) {
        wi = fed::run_round(t, wi, ideal_env, c).next;
        auto r = fed::run_round(t, wa, air_env, air_cfg);
        wa = r.next;
        CHECK(r.metrics.distorted_devices == 0);
        CHECK(distance(wa, wi) <= 1e-9 * norm(wi));
    }
}

TEST_CASE("a failed aggregation carries the model forward") {
    auto c = small_synthetic();
    c.mode = fed::AggregationMode::AirCompGM;
    c.air.b_floor = 1e300;
    auto env = fed::prepare(c);
    std::mt19937_64 gen(3);
    auto w = oracle::random_vector(env.dim(), 0.1, gen);
    auto r = fed::run_round(3, w, env, c);
    CHECK(r.metrics.aggregation_failed);
    CHECK(r.metrics.decode_failures == 2);
    CHECK(r.metrics.round == 3);
    CHECK(r.next == w);
}

TEST_CASE("audited ideal rounds never increase the objective") {
    auto c = small_synthetic();
    c.audit_every = 1;
    c.rounds = 10;
    c.num_byzantine = 2;
    c.attack = attack::AttackKind::WeightFlip;
    for (const auto& m : fed::run_experiment(c).rounds) CHECK(m.descent_violations == 0);
}

TEST_CASE("sample-count weights") {
    auto c = small_synthetic();
    c.weight_rule = fed::WeightRule::SampleCount;
    auto env = fed::prepare(c);
    long double s = 0;
    for (double a : env.alphas) s += a;
    CHECK(std::abs(static_cast<double>(s) - 1.0) < 1e-12);
    CHECK(env.alphas[0] == doctest::Approx(1.0 / 6));
}

TEST_CASE("mean and geometric median learn alike without attackers" * doctest::may_fail()) {
    auto c = desk_scale();
    auto gm_run = fed::run_experiment(c);
    c.mode = fed::AggregationMode::Mean;
    auto mean_run = fed::run_experiment(c);
    double worst = 0;
    for (std::size_t t = 0; t < c.rounds; ++t)
        worst = std::max(worst, std::abs(gm_run.rounds[t].test_accuracy - mean_run.rounds[t].test_accuracy));
    CHECK(worst <= 0.005);
}
