#pragma once

#include <span>
#include <vector>

#include "byzfl/data.hpp"
#include "byzfl/types.hpp"

// Multi-class logistic regression. Parameters are stored class-major: class c
// owns the slice [c * (p + 1), (c + 1) * (p + 1)) holding p weights followed
// by its bias, so d = L * (p + 1).
namespace byzfl::model {

constexpr std::size_t param_count(std::size_t num_features, int num_classes) {
    return static_cast<std::size_t>(num_classes) * (num_features + 1);
}

/// A view of b samples of one dataset.
struct Batch {
    const data::Dataset& data;
    std::span<const std::size_t> indices;

    std::size_t size() const { return indices.size(); }
};

/// Throws std::invalid_argument on a dimension mismatch.
std::vector<double> logits(std::span<const double> w, std::span<const double> x, int num_classes);

/// Mean cross entropy over the batch (log-sum-exp with max subtraction).
double loss(std::span<const double> w, const Batch& batch);

/// Mean cross entropy over every sample of ds.
double loss(std::span<const double> w, const data::Dataset& ds);

/// Exact gradient of loss(w, batch).
ModelParams gradient(std::span<const double> w, const Batch& batch);

/// One batch-SGD step from the broadcast model: b indices drawn uniformly
/// without replacement from the shard using the device's stream.
ModelParams local_comp(std::span<const double> w_global, const data::Shard& shard, std::size_t batch_size,
                       double learning_rate, Rng& rng);

/// b distinct indices in [0, n), drawn by a partial Fisher-Yates shuffle.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t b, Rng& rng);

struct Evaluation {
    double accuracy = 0.0;
    double loss = 0.0;
};

/// Argmax ties resolve to the smallest class index.
int predict(std::span<const double> w, std::span<const double> x, int num_classes);

Evaluation evaluate(std::span<const double> w, const data::Dataset& test);

} // namespace byzfl::model
