#pragma once

#include <functional>
#include <span>
#include <vector>

#include "byzfl/types.hpp"

// Smoothed geometric median aggregation.
//
// The smoothed norm replaces ||z|| by the quadratic ||z||^2 / (2 nu) + nu / 2
// inside the ball of radius nu, which makes the objective
//
//     g_nu(z) = sum_k alpha_k ||z - w_k||_(nu)
//
// a 1/nu-smooth upper bound of the geometric median objective with
// g <= g_nu <= g + nu / 2. Weiszfeld's reweighted average with the weights
// alpha_k / max(nu, ||z - w_k||) is a majorize-minimize step for g_nu, so the
// objective never increases along the iterates.
namespace byzfl::gm {

struct AggregationProblem {
    std::vector<ModelParams> points;
    std::vector<double> weights; // alpha_k > 0, summing to 1
    double nu = 1e-4;
    std::size_t max_iter = 1000;
    double tol = 1e-5;

    std::size_t size() const { return points.size(); }
    std::size_t dim() const { return points.empty() ? 0 : points.front().size(); }

    /// Throws std::invalid_argument naming the broken invariant.
    void validate() const;

    /// alpha_k = 1/K for every point.
    static AggregationProblem uniform(std::vector<ModelParams> points, double nu, std::size_t max_iter,
                                      double tol);
};

struct WeiszfeldState {
    ModelParams z;
    std::size_t iterations_used = 0;
    bool converged = false;
};

/// Called with every new iterate (not with the initial point).
using IterateObserver = std::function<void(std::span<const double>)>;

double smoothed_norm(std::span<const double> z, double nu);

/// z / nu inside the smoothing ball, z / ||z|| outside.
std::vector<double> smoothed_norm_gradient(std::span<const double> z, double nu);

double gm_objective(std::span<const double> z, const AggregationProblem& problem);

/// beta_k = alpha_k / max(nu, ||z - w_k||).
double weiszfeld_weight(std::span<const double> z, std::span<const double> w_k, double alpha_k, double nu);

/// One reweighted average z <- sum beta_k w_k / sum beta_k, summed in
/// ascending k.
ModelParams weiszfeld_step(std::span<const double> z, const AggregationProblem& problem);

/// Iterates weiszfeld_step until ||z_new - z_old|| <= tol or max_iter steps.
WeiszfeldState weiszfeld_ideal(ModelParams init, const AggregationProblem& problem,
                               const IterateObserver& observe = {});

/// Baseline: sum alpha_k w_k.
ModelParams mean_aggregate(std::span<const ModelParams> points, std::span<const double> weights);

} // namespace byzfl::gm
