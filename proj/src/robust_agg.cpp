#include "byzfl/robust_agg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace byzfl::gm {

void AggregationProblem::validate() const {
    if (points.empty()) throw std::invalid_argument("aggregation: no points");
    if (weights.size() != points.size()) throw std::invalid_argument("aggregation: weight count mismatch");
    const std::size_t d = points.front().size();
    for (const auto& p : points)
        if (p.size() != d) throw std::invalid_argument("aggregation: points differ in dimension");
    double sum = 0.0;
    for (double a : weights) {
        if (!(a > 0.0)) throw std::invalid_argument("aggregation: weights must be positive");
        sum += a;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("aggregation: weights must sum to 1");
    if (!(nu > 0.0)) throw std::invalid_argument("aggregation: nu must be positive");
    if (max_iter < 1) throw std::invalid_argument("aggregation: max_iter must be at least 1");
    if (!(tol > 0.0)) throw std::invalid_argument("aggregation: tol must be positive");
}

AggregationProblem AggregationProblem::uniform(std::vector<ModelParams> points, double nu,
                                               std::size_t max_iter, double tol) {
    const std::size_t k = points.size();
    std::vector<double> weights(k, k ? 1.0 / static_cast<double>(k) : 0.0);
    return {std::move(points), std::move(weights), nu, max_iter, tol};
}

double smoothed_norm(std::span<const double> z, double nu) {
    const double sq = squared_norm(z);
    const double r = std::sqrt(sq);
    return r <= nu ? sq / (2.0 * nu) + nu / 2.0 : r;
}

std::vector<double> smoothed_norm_gradient(std::span<const double> z, double nu) {
    const double r = norm(z);
    const double scale = r <= nu ? 1.0 / nu : 1.0 / r;
    std::vector<double> g(z.begin(), z.end());
    for (double& v : g) v *= scale;
    return g;
}

double gm_objective(std::span<const double> z, const AggregationProblem& problem) {
    std::vector<double> diff(z.size());
    double total = 0.0;
    for (std::size_t k = 0; k < problem.size(); ++k) {
        const auto& w = problem.points[k];
        for (std::size_t i = 0; i < z.size(); ++i) diff[i] = z[i] - w[i];
        total += problem.weights[k] * smoothed_norm(diff, problem.nu);
    }
    return total;
}

double weiszfeld_weight(std::span<const double> z, std::span<const double> w_k, double alpha_k, double nu) {
    return alpha_k / std::max(nu, distance(z, w_k));
}

ModelParams weiszfeld_step(std::span<const double> z, const AggregationProblem& problem) {
    ModelParams next(z.size(), 0.0);
    double beta_sum = 0.0;
    for (std::size_t k = 0; k < problem.size(); ++k) {
        const auto& w = problem.points[k];
        const double beta = weiszfeld_weight(z, w, problem.weights[k], problem.nu);
        beta_sum += beta;
        for (std::size_t i = 0; i < next.size(); ++i) next[i] += beta * w[i];
    }
    for (double& v : next) v /= beta_sum;
    return next;
}

WeiszfeldState weiszfeld_ideal(ModelParams init, const AggregationProblem& problem, const IterateObserver& observe) {
    problem.validate();
    if (init.size() != problem.dim()) throw std::invalid_argument("weiszfeld: init dimension mismatch");

    WeiszfeldState state{std::move(init), 0, false};
    while (state.iterations_used < problem.max_iter) {
        auto next = weiszfeld_step(state.z, problem);
        const double moved = distance(next, state.z);
        state.z = std::move(next);
        ++state.iterations_used;
        if (observe) observe(state.z);
        if (moved <= problem.tol) {
            state.converged = true;
            break;
        }
    }
    return state;
}

ModelParams mean_aggregate(std::span<const ModelParams> points, std::span<const double> weights) {
    if (points.empty() || points.size() != weights.size())
        throw std::invalid_argument("mean_aggregate: need one weight per point");
    ModelParams out(points.front().size(), 0.0);
    for (std::size_t k = 0; k < points.size(); ++k) {
        if (points[k].size() != out.size()) throw std::invalid_argument("mean_aggregate: dimension mismatch");
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += weights[k] * points[k][i];
    }
    return out;
}

} // namespace byzfl::gm
