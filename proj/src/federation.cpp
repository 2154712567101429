#include "byzfl/federation.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "byzfl/model.hpp"
#include "byzfl/robust_agg.hpp"

namespace byzfl::fed {

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& why) {
    throw std::invalid_argument(key + ": " + why);
}

} // namespace

void ExperimentConfig::validate() const {
    if (num_devices < 1) bad("K", "must be at least 1");
    if (num_byzantine >= num_devices) bad("B", "must be smaller than K = " + std::to_string(num_devices));
    if (rounds < 1) bad("rounds", "must be at least 1");
    if (batch_size < 1) bad("batch", "must be at least 1");
    if (!(learning_rate >= 0.0) || std::isinf(learning_rate)) bad("lr", "must be finite and >= 0");
    if (!(nu > 0.0)) bad("nu", "must be positive");
    if (max_iter < 1) bad("max_iter", "must be at least 1");
    if (!(tol > 0.0)) bad("tol", "must be positive");
    if (!(air.power > 0.0)) bad("power", "must be positive");
    if (!(air.noise_var >= 0.0) || std::isinf(air.noise_var)) bad("sigma2", "must be finite and >= 0");
    if (!(air.threshold_mult > 0.0)) bad("cmult", "must be positive");
    if (!(air.b_floor >= 0.0)) bad("b_floor", "must be >= 0");
    if (!(air.norm_floor >= 0.0)) bad("znorm_floor", "must be >= 0");
    if (dataset == DatasetSource::Synthetic) {
        if (synthetic.num_classes < 1) bad("synthetic_classes", "must be at least 1");
        if (synthetic.num_features < 1) bad("synthetic_features", "must be at least 1");
        if (synthetic.train_size < static_cast<std::size_t>(synthetic.num_classes))
            bad("synthetic_train", "must be at least the class count");
        if (synthetic.test_size < 1) bad("synthetic_test", "must be at least 1");
        if (!(synthetic.mean_scale > 0.0)) bad("synthetic_scale", "must be positive");
    }
}

std::string_view to_string(AggregationMode mode) {
    switch (mode) {
        case AggregationMode::IdealGM: return "ideal";
        case AggregationMode::AirCompGM: return "aircomp";
        case AggregationMode::Mean: return "mean";
    }
    return "ideal";
}

std::string_view to_string(DatasetSource source) {
    return source == DatasetSource::Mnist ? "mnist" : "synthetic";
}

std::string_view to_string(WeightRule rule) { return rule == WeightRule::Uniform ? "uniform" : "samples"; }

AggregationMode parse_mode(std::string_view name) {
    if (name == "ideal") return AggregationMode::IdealGM;
    if (name == "aircomp") return AggregationMode::AirCompGM;
    if (name == "mean") return AggregationMode::Mean;
    throw std::invalid_argument("unknown aggregation mode '" + std::string(name) + "'");
}

DatasetSource parse_dataset(std::string_view name) {
    if (name == "mnist") return DatasetSource::Mnist;
    if (name == "synthetic") return DatasetSource::Synthetic;
    throw std::invalid_argument("unknown dataset '" + std::string(name) + "'");
}

WeightRule parse_weight_rule(std::string_view name) {
    if (name == "uniform") return WeightRule::Uniform;
    if (name == "samples") return WeightRule::SampleCount;
    throw std::invalid_argument("unknown weight rule '" + std::string(name) + "'");
}

Environment prepare(const ExperimentConfig& config, const data::Dataset& train, data::Dataset test) {
    config.validate();
    train.validate();
    test.validate();
    if (train.num_features != test.num_features || train.num_classes != test.num_classes)
        throw std::invalid_argument("train and test sets disagree on shape");

    Environment env;
    env.streams = seed_streams(config.seed, config.num_devices);
    auto shards = data::partition_iid(train, config.num_devices, env.streams.partition_seed);
    for (const auto& s : shards)
        if (s.data.size() < config.batch_size)
            throw std::invalid_argument("batch: shards hold " + std::to_string(s.data.size()) +
                                        " samples, fewer than the batch size");
    env.train = data::concat(shards);
    env.test = std::move(test);

    double total = 0.0;
    for (const auto& s : shards) total += static_cast<double>(s.data.size());
    for (auto& s : shards) {
        const double alpha = config.weight_rule == WeightRule::Uniform
                                 ? 1.0 / static_cast<double>(config.num_devices)
                                 : static_cast<double>(s.data.size()) / total;
        env.alphas.push_back(alpha);

        const std::size_t id = s.owner;
        Device dev{id, std::move(s), id < config.num_byzantine, attack::AttackKind::None};
        if (dev.byzantine) {
            dev.attack = config.attack;
            if (dev.attack == attack::AttackKind::ClassFlip)
                dev.shard = attack::class_flip(std::move(dev.shard), train.num_classes);
        }
        env.devices.push_back(std::move(dev));
    }
    return env;
}

Environment prepare(const ExperimentConfig& config) {
    config.validate();
    if (config.dataset == DatasetSource::Synthetic) {
        const auto& spec = config.synthetic;
        const auto seed = derive_seed(config.seed, StreamRole::Synthetic);
        auto all = data::gen_synthetic(spec.train_size + spec.test_size, spec.num_features, spec.num_classes, seed,
                                       spec.mean_scale);
        std::vector<std::size_t> train_idx(spec.train_size), test_idx(spec.test_size);
        for (std::size_t i = 0; i < spec.train_size; ++i) train_idx[i] = i;
        for (std::size_t i = 0; i < spec.test_size; ++i) test_idx[i] = spec.train_size + i;
        return prepare(config, all.select(train_idx), all.select(test_idx));
    }
    const std::filesystem::path dir = config.mnist_dir;
    auto train = data::load_mnist_idx(dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte");
    auto test = data::load_mnist_idx(dir / "t10k-images-idx3-ubyte", dir / "t10k-labels-idx1-ubyte");
    return prepare(config, train, std::move(test));
}

RoundResult run_round(std::size_t t, std::span<const double> w_t, Environment& env, const ExperimentConfig& config) {
    const auto started = std::chrono::steady_clock::now();
    RoundMetrics metrics;
    metrics.round = t;
    metrics.train_loss = model::loss(w_t, env.train);

    const std::size_t num_devices = env.devices.size();
    std::vector<ModelParams> locals;
    locals.reserve(num_devices);
    for (std::size_t k = 0; k < num_devices; ++k)
        locals.push_back(model::local_comp(w_t, env.devices[k].shard, config.batch_size, config.learning_rate,
                                           env.streams.devices[k]));

    if (config.attack == attack::AttackKind::WeightFlip && config.num_byzantine > 0) {
        std::vector<std::size_t> byz;
        for (const auto& dev : env.devices)
            if (dev.byzantine) byz.push_back(dev.id);
        locals = attack::weight_flip(locals, byz);
    }

    ModelParams next;
    if (config.mode == AggregationMode::Mean) {
        next = gm::mean_aggregate(locals, env.alphas);
    } else {
        gm::AggregationProblem problem{std::move(locals), env.alphas, config.nu, config.max_iter, config.tol};
        ModelParams init(w_t.begin(), w_t.end());

        if (config.mode == AggregationMode::IdealGM) {
            gm::IterateObserver audit;
            double previous = 0.0;
            if (config.audit_every > 0 && t % config.audit_every == 0) {
                previous = gm::gm_objective(init, problem);
                audit = [&](std::span<const double> z) {
                    const double g = gm::gm_objective(z, problem);
                    if (g > previous + 1e-12) ++metrics.descent_violations;
                    previous = g;
                };
            }
            auto state = gm::weiszfeld_ideal(std::move(init), problem, audit);
            metrics.weiszfeld_iters = state.iterations_used;
            next = std::move(state.z);
        } else {
            try {
                auto state = air::weiszfeld_aircomp(std::move(init), problem, config.air, env.streams.channel,
                                                    env.streams.noise);
                metrics.weiszfeld_iters = state.iterations_used;
                metrics.distorted_devices = state.distorted_devices();
                metrics.decode_failures = state.decode_failures;
                metrics.peak_power_ratio = state.peak_power_ratio;
                next = std::move(state.z);
            } catch (const air::DecodeFailure& failure) {
                const auto& state = failure.state();
                metrics.weiszfeld_iters = state.iterations_used;
                metrics.distorted_devices = state.distorted_devices();
                metrics.decode_failures = state.decode_failures;
                metrics.peak_power_ratio = state.peak_power_ratio;
                metrics.aggregation_failed = true;
                next.assign(w_t.begin(), w_t.end());
            }
        }
    }

    const auto eval = model::evaluate(next, env.test);
    metrics.test_accuracy = eval.accuracy;
    metrics.test_loss = eval.loss;
    metrics.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return {std::move(next), metrics};
}

ExperimentResult run_experiment(const ExperimentConfig& config, Environment env, const RoundCallback& on_round) {
    ExperimentResult result;
    ModelParams w(env.dim(), 0.0);
    result.rounds.reserve(config.rounds);
    for (std::size_t t = 0; t < config.rounds; ++t) {
        auto [next, metrics] = run_round(t, w, env, config);
        w = std::move(next);
        if (on_round) on_round(metrics);
        result.rounds.push_back(metrics);
    }
    result.final_model = std::move(w);
    return result;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const RoundCallback& on_round) {
    return run_experiment(config, prepare(config), on_round);
}

} // namespace byzfl::fed
