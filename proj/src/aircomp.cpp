#include "byzfl/aircomp.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace byzfl::air {

double energy(std::span<const Complex> v) {
    double e = 0.0;
    for (const auto& c : v) e += abs2(c);
    return e;
}

void AirConfig::validate() const {
    if (!(power > 0.0)) throw std::invalid_argument("air: power must be positive");
    if (!(noise_var >= 0.0) || std::isinf(noise_var)) throw std::invalid_argument("air: noise variance must be finite and >= 0");
    if (!(threshold_mult > 0.0)) throw std::invalid_argument("air: threshold multiplier must be positive");
    if (!(b_floor >= 0.0)) throw std::invalid_argument("air: b_floor must be >= 0");
    if (!(norm_floor >= 0.0)) throw std::invalid_argument("air: norm_floor must be >= 0");
}

DecodeError::DecodeError(double b)
    : std::runtime_error("decode failure: received denominator " + std::to_string(b) + " below floor"), b_(b) {}

DecodeFailure::DecodeFailure(AirWeiszfeldState state, double b)
    : std::runtime_error("decode failed twice in one block (|b| = " + std::to_string(std::abs(b)) +
                         ") after " + std::to_string(state.iterations_used) + " iterations"),
      state_(std::move(state)) {}

std::vector<Complex> draw_channels(std::size_t num_devices, Rng& rng) {
    // CN(0, 1): independent real and imaginary parts with variance 1/2.
    std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
    std::vector<Complex> h(num_devices);
    for (auto& c : h) {
        c.re = gauss(rng);
        c.im = gauss(rng);
    }
    return h;
}

std::vector<Complex> draw_noise(std::size_t length, double noise_var, Rng& rng) {
    std::vector<Complex> n(length);
    if (noise_var == 0.0) return n;
    std::normal_distribution<double> gauss(0.0, std::sqrt(noise_var / 2.0));
    for (auto& c : n) {
        c.re = gauss(rng);
        c.im = gauss(rng);
    }
    return n;
}

double broadcast_scale(std::span<const double> z) {
    if (z.empty()) throw DegenerateBroadcast();
    const double s = std::sqrt(squared_norm(z) / static_cast<double>(z.size()));
    if (!(s > 0.0)) throw DegenerateBroadcast();
    return s;
}

std::vector<double> build_message_scaled(double beta, std::span<const double> w, double scale) {
    std::vector<double> msg(w.size() + 1);
    for (std::size_t i = 0; i < w.size(); ++i) msg[i] = beta * w[i];
    msg.back() = beta * scale;
    return msg;
}

std::vector<double> build_message(double beta, std::span<const double> w, std::span<const double> z) {
    return build_message_scaled(beta, w, broadcast_scale(z));
}

std::vector<Complex> channel_invert(std::span<const double> message, Complex h) {
    const double gain = abs2(h);
    if (!(gain > 0.0)) throw ChannelSingularity();
    const Complex pre = (1.0 / gain) * conj(h);
    std::vector<Complex> x(message.size());
    for (std::size_t i = 0; i < message.size(); ++i) x[i] = message[i] * pre;
    return x;
}

PowerControl power_scale(std::vector<Complex> x_prime, double power, double threshold) {
    const double per_symbol = energy(x_prime) / static_cast<double>(x_prime.size());
    const double rho = std::sqrt(power / std::max(threshold, per_symbol));
    for (auto& c : x_prime) c = rho * c;
    return {rho, std::move(x_prime), per_symbol > threshold};
}

std::vector<Complex> superpose(std::span<const std::vector<Complex>> xs, std::span<const Complex> hs,
                               std::span<const Complex> noise) {
    if (xs.size() != hs.size()) throw std::invalid_argument("superpose: one channel per transmitter required");
    for (const auto& x : xs)
        if (x.size() != noise.size()) throw std::invalid_argument("superpose: signal length mismatch");
    std::vector<Complex> y(noise.size());
    for (std::size_t k = 0; k < xs.size(); ++k)
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = y[i] + hs[k] * xs[k][i];
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = y[i] + noise[i];
    return y;
}

ModelParams receiver_decode_scaled(std::span<const Complex> y, double scale, double b_floor) {
    if (y.size() < 2) throw std::invalid_argument("receiver_decode: signal too short");
    const double b = y.back().re;
    if (!(std::abs(b) >= b_floor) || b == 0.0) throw DecodeError(b);
    const double factor = scale / b;
    ModelParams z(y.size() - 1);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = y[i].re * factor;
    return z;
}

ModelParams receiver_decode(std::span<const Complex> y, std::span<const double> z_prev, double b_floor) {
    if (z_prev.size() + 1 != y.size()) throw std::invalid_argument("receiver_decode: length mismatch");
    return receiver_decode_scaled(y, broadcast_scale(z_prev), b_floor);
}

std::size_t AirWeiszfeldState::distorted_devices() const {
    return static_cast<std::size_t>(std::count(device_distorted.begin(), device_distorted.end(), true));
}

double soft_threshold(const AirConfig& air, double scale, std::size_t dim, std::span<const double> per_symbol_energy) {
    if (std::isinf(air.threshold_mult))
        return *std::max_element(per_symbol_energy.begin(), per_symbol_energy.end());
    const double m = static_cast<double>(dim + 1);
    return air.threshold_mult * scale * scale * static_cast<double>(dim) / m;
}

double message_scale(std::span<const double> z, double floor) {
    const double s = std::max(norm(z), floor) / std::sqrt(static_cast<double>(z.size()));
    if (z.empty() || !(s > 0.0)) throw DegenerateBroadcast();
    return s;
}

namespace {

struct Block {
    ModelParams z;
    std::size_t distorted = 0;
};

// One uplink transmission of all devices followed by the receiver decode.
Block transmit_block(std::span<const double> z, double scale, std::span<const double> betas,
                     const gm::AggregationProblem& problem, const AirConfig& air, Rng& channel_rng,
                     Rng& noise_rng, AirWeiszfeldState& state) {
    const std::size_t num_devices = problem.size();
    const std::size_t d = z.size();
    const std::size_t m = d + 1;

    const auto hs = draw_channels(num_devices, channel_rng);
    const auto noise = draw_noise(m, air.noise_var, noise_rng);

    std::vector<std::vector<Complex>> inverted(num_devices);
    std::vector<double> per_symbol(num_devices);
    for (std::size_t k = 0; k < num_devices; ++k) {
        const auto msg = build_message_scaled(betas[k], problem.points[k], scale);
        inverted[k] = channel_invert(msg, hs[k]);
        per_symbol[k] = energy(inverted[k]) / static_cast<double>(m);
    }
    const double threshold = soft_threshold(air, scale, d, per_symbol);

    Block block;
    std::vector<std::vector<Complex>> xs(num_devices);
    for (std::size_t k = 0; k < num_devices; ++k) {
        auto pc = power_scale(std::move(inverted[k]), air.power, threshold);
        if (pc.distorted) {
            ++block.distorted;
            state.device_distorted[k] = true;
        }
        state.peak_power_ratio =
            std::max(state.peak_power_ratio, energy(pc.x) / (static_cast<double>(m) * air.power));
        ++state.transmissions;
        xs[k] = std::move(pc.x);
    }

    const auto y = superpose(xs, hs, noise);
    block.z = receiver_decode_scaled(y, scale, air.b_floor);
    return block;
}

} // namespace

AirWeiszfeldState weiszfeld_aircomp(ModelParams init, const gm::AggregationProblem& problem, const AirConfig& air,
                                    Rng& channel_rng, Rng& noise_rng, const gm::IterateObserver& observe) {
    problem.validate();
    air.validate();
    if (init.size() != problem.dim()) throw std::invalid_argument("weiszfeld_aircomp: init dimension mismatch");

    AirWeiszfeldState state;
    state.z = std::move(init);
    state.device_distorted.assign(problem.size(), false);

    std::vector<double> betas(problem.size());
    while (state.iterations_used < problem.max_iter) {
        const double scale = message_scale(state.z, air.norm_floor);
        for (std::size_t k = 0; k < problem.size(); ++k)
            betas[k] = gm::weiszfeld_weight(state.z, problem.points[k], problem.weights[k], problem.nu);

        Block block;
        for (int attempt = 0;; ++attempt) {
            try {
                block = transmit_block(state.z, scale, betas, problem, air, channel_rng, noise_rng, state);
                break;
            } catch (const DecodeError& e) {
                ++state.decode_failures;
                if (attempt == 1) throw DecodeFailure(std::move(state), e.denominator());
            }
        }

        const double moved = distance(block.z, state.z);
        state.z = std::move(block.z);
        state.distorted_per_iteration.push_back(block.distorted);
        ++state.iterations_used;
        if (observe) observe(state.z);
        if (moved <= problem.tol) {
            state.converged = true;
            break;
        }
    }
    return state;
}

} // namespace byzfl::air
