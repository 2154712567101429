#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "byzfl/aircomp.hpp"
#include "byzfl/attacks.hpp"
#include "byzfl/data.hpp"
#include "byzfl/rng.hpp"
#include "byzfl/types.hpp"

namespace byzfl::fed {

enum class AggregationMode { IdealGM, AirCompGM, Mean };
enum class DatasetSource { Mnist, Synthetic };
/// alpha_k = 1/K, or alpha_k = n_k / n.
enum class WeightRule { Uniform, SampleCount };

struct SyntheticSpec {
    std::size_t train_size = 5000;
    std::size_t test_size = 1000;
    std::size_t num_features = 20;
    int num_classes = 10;
    double mean_scale = 1.0;

    bool operator==(const SyntheticSpec&) const = default;
};

struct ExperimentConfig {
    std::size_t num_devices = 50;
    std::size_t num_byzantine = 0;
    attack::AttackKind attack = attack::AttackKind::None;
    AggregationMode mode = AggregationMode::IdealGM;
    std::size_t rounds = 150;
    std::size_t batch_size = 50;
    double learning_rate = 1e-2;
    double nu = 1e-4;
    std::size_t max_iter = 1000;
    double tol = 1e-5;
    air::AirConfig air;
    DatasetSource dataset = DatasetSource::Mnist;
    std::string mnist_dir = "data/mnist";
    SyntheticSpec synthetic;
    WeightRule weight_rule = WeightRule::Uniform;
    std::uint64_t seed = 1;
    /// Every audit_every-th round (0 = never) the ideal Weiszfeld objective
    /// is tracked and any increase is counted in RoundMetrics.
    std::size_t audit_every = 0;

    /// Throws std::invalid_argument naming the offending setting.
    void validate() const;
    bool operator==(const ExperimentConfig&) const = default;
};

std::string_view to_string(AggregationMode mode);
std::string_view to_string(DatasetSource source);
std::string_view to_string(WeightRule rule);
AggregationMode parse_mode(std::string_view name);
DatasetSource parse_dataset(std::string_view name);
WeightRule parse_weight_rule(std::string_view name);

struct RoundMetrics {
    std::size_t round = 0;
    double train_loss = 0.0;    // at the model broadcast in this round
    double test_accuracy = 0.0; // at the aggregated model
    double test_loss = 0.0;
    std::size_t weiszfeld_iters = 0;
    std::size_t distorted_devices = 0;
    std::size_t decode_failures = 0;
    bool aggregation_failed = false;
    double peak_power_ratio = 0.0;
    std::size_t descent_violations = 0;
    double wall_seconds = 0.0;
};

struct Device {
    std::size_t id = 0;
    data::Shard shard;
    bool byzantine = false;
    attack::AttackKind attack = attack::AttackKind::None;
};

/// Everything a run needs besides the global model: poisoned device shards,
/// the pooled clean training set, the test set and the random streams.
struct Environment {
    std::vector<Device> devices;
    data::Dataset train;
    data::Dataset test;
    Streams streams;
    std::vector<double> alphas;

    std::size_t dim() const { return static_cast<std::size_t>(test.num_classes) * (test.num_features + 1); }
};

/// Loads or generates the data named by the config and sets up devices.
/// Devices 0..B-1 are Byzantine.
Environment prepare(const ExperimentConfig& config);

/// Same, with caller-supplied train and test sets.
Environment prepare(const ExperimentConfig& config, const data::Dataset& train, data::Dataset test);

struct RoundResult {
    ModelParams next;
    RoundMetrics metrics;
};

/// Dissemination, local computation, attack, aggregation from z = w_t,
/// global update. A decode failure that survives the retry leaves w_t in
/// place and sets aggregation_failed.
RoundResult run_round(std::size_t t, std::span<const double> w_t, Environment& env, const ExperimentConfig& config);

struct ExperimentResult {
    std::vector<RoundMetrics> rounds;
    ModelParams final_model;
};

using RoundCallback = std::function<void(const RoundMetrics&)>;

/// w^(0) = 0, then config.rounds rounds; on_round sees every record as soon
/// as it is complete.
ExperimentResult run_experiment(const ExperimentConfig& config, const RoundCallback& on_round = {});
ExperimentResult run_experiment(const ExperimentConfig& config, Environment env, const RoundCallback& on_round = {});

} // namespace byzfl::fed
