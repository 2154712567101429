#include "byzfl/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace byzfl::model {

namespace {

void check_dims(std::size_t w_size, std::size_t p, int num_classes) {
    if (w_size != param_count(p, num_classes))
        throw std::invalid_argument("model: parameter vector has " + std::to_string(w_size) +
                                    " entries, expected " + std::to_string(param_count(p, num_classes)));
}

void fill_logits(std::span<const double> w, std::span<const double> x, std::span<double> out) {
    const std::size_t stride = x.size() + 1;
    for (std::size_t c = 0; c < out.size(); ++c) {
        const auto wc = w.subspan(c * stride, x.size());
        out[c] = dot(wc, x) + w[c * stride + x.size()];
    }
}

// -log softmax(z)[y], stable for large margins.
double cross_entropy(std::span<const double> z, int y) {
    const auto top = static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin());
    double tail = 0.0;
    for (std::size_t c = 0; c < z.size(); ++c)
        if (c != top) tail += std::exp(z[c] - z[top]);
    return std::log1p(tail) + (z[top] - z[static_cast<std::size_t>(y)]);
}

template <typename IndexFn>
double mean_loss(std::span<const double> w, const data::Dataset& ds, std::size_t count, IndexFn index_of) {
    check_dims(w.size(), ds.num_features, ds.num_classes);
    std::vector<double> z(static_cast<std::size_t>(ds.num_classes));
    double total = 0.0;
    for (std::size_t s = 0; s < count; ++s) {
        const std::size_t i = index_of(s);
        fill_logits(w, ds.row(i), z);
        total += cross_entropy(z, ds.labels[i]);
    }
    return total / static_cast<double>(count);
}

} // namespace

std::vector<double> logits(std::span<const double> w, std::span<const double> x, int num_classes) {
    check_dims(w.size(), x.size(), num_classes);
    std::vector<double> out(static_cast<std::size_t>(num_classes));
    fill_logits(w, x, out);
    return out;
}

double loss(std::span<const double> w, const Batch& batch) {
    if (batch.size() == 0) throw std::invalid_argument("loss: empty batch");
    return mean_loss(w, batch.data, batch.size(), [&](std::size_t s) { return batch.indices[s]; });
}

double loss(std::span<const double> w, const data::Dataset& ds) {
    if (ds.empty()) throw std::invalid_argument("loss: empty dataset");
    return mean_loss(w, ds, ds.size(), [](std::size_t s) { return s; });
}

ModelParams gradient(std::span<const double> w, const Batch& batch) {
    if (batch.size() == 0) throw std::invalid_argument("gradient: empty batch");
    const auto& ds = batch.data;
    check_dims(w.size(), ds.num_features, ds.num_classes);

    const std::size_t p = ds.num_features;
    const std::size_t stride = p + 1;
    const auto L = static_cast<std::size_t>(ds.num_classes);
    ModelParams grad(w.size(), 0.0);
    std::vector<double> prob(L);

    for (std::size_t i : batch.indices) {
        const auto x = ds.row(i);
        fill_logits(w, x, prob);
        const double top = *std::max_element(prob.begin(), prob.end());
        double sum = 0.0;
        for (double& v : prob) sum += (v = std::exp(v - top));
        for (double& v : prob) v /= sum;
        prob[static_cast<std::size_t>(ds.labels[i])] -= 1.0;

        for (std::size_t c = 0; c < L; ++c) {
            double* g = grad.data() + c * stride;
            for (std::size_t j = 0; j < p; ++j) g[j] += prob[c] * x[j];
            g[p] += prob[c];
        }
    }
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    for (double& g : grad) g *= inv_b;
    return grad;
}

std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t b, Rng& rng) {
    if (b > n) throw std::invalid_argument("sample_without_replacement: b exceeds population");
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < b; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(pool[i], pool[pick(rng)]);
    }
    pool.resize(b);
    return pool;
}

ModelParams local_comp(std::span<const double> w_global, const data::Shard& shard, std::size_t batch_size,
                       double learning_rate, Rng& rng) {
    if (batch_size < 1 || shard.data.size() < batch_size)
        throw std::invalid_argument("local_comp: device " + std::to_string(shard.owner) + " holds " +
                                    std::to_string(shard.data.size()) + " samples, batch needs " +
                                    std::to_string(batch_size));
    const auto idx = sample_without_replacement(shard.data.size(), batch_size, rng);
    const auto grad = gradient(w_global, Batch{shard.data, idx});
    ModelParams out(w_global.begin(), w_global.end());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= learning_rate * grad[i];
    return out;
}

int predict(std::span<const double> w, std::span<const double> x, int num_classes) {
    const auto z = logits(w, x, num_classes);
    return static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
}

Evaluation evaluate(std::span<const double> w, const data::Dataset& test) {
    if (test.empty()) throw std::invalid_argument("evaluate: empty test set");
    check_dims(w.size(), test.num_features, test.num_classes);
    std::vector<double> z(static_cast<std::size_t>(test.num_classes));
    std::size_t correct = 0;
    double total = 0.0;
    for (std::size_t i = 0; i < test.size(); ++i) {
        fill_logits(w, test.row(i), z);
        // max_element returns the first maximum: ties go to the lowest class.
        const auto pred = std::max_element(z.begin(), z.end()) - z.begin();
        if (pred == test.labels[i]) ++correct;
        total += cross_entropy(z, test.labels[i]);
    }
    const auto n = static_cast<double>(test.size());
    return {static_cast<double>(correct) / n, total / n};
}

} // namespace byzfl::model
