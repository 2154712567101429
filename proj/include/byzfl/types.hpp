#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace byzfl {

/// Flat parameter vector of a model (global or local). Class-major layout,
/// see model.hpp.
using ModelParams = std::vector<double>;

/// Every random stream in the simulator is a 64-bit Mersenne twister seeded
/// through std::seed_seq, so the draws are reproducible across runs.
using Rng = std::mt19937_64;

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double squared_norm(std::span<const double> v) { return dot(v, v); }

inline double norm(std::span<const double> v) { return std::sqrt(squared_norm(v)); }

inline double distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        s += diff * diff;
    }
    return std::sqrt(s);
}

} // namespace byzfl
