#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "byzfl/robust_agg.hpp"
#include "byzfl/types.hpp"

// Over-the-air evaluation of the smoothed Weiszfeld step on a SISO fading
// multiple-access channel.
//
// Every inner iteration is one uplink block. Device k sends the length
// m = d + 1 message m_k = [beta_k w_k, beta_k s] with s = sqrt(||z||^2 / d),
// pre-multiplied by conj(h_k) / |h_k|^2 and scaled by
// rho_k = sqrt(P / max(C, ||x'_k||^2 / m)). The receiver sees
// y = sum_k h_k x_k + n = sum_k rho_k m_k + n, keeps the real part [a, b] and
// decodes z = a / b * s. When every rho_k is equal the decode is exactly one
// Weiszfeld step.
namespace byzfl::air {

struct Complex {
    double re = 0.0;
    double im = 0.0;

    friend Complex operator+(Complex a, Complex b) { return {a.re + b.re, a.im + b.im}; }
    friend Complex operator*(Complex a, Complex b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    friend Complex operator*(double s, Complex a) { return {s * a.re, s * a.im}; }
    friend bool operator==(Complex, Complex) = default;
};

inline Complex conj(Complex a) { return {a.re, -a.im}; }
inline double abs2(Complex a) { return a.re * a.re + a.im * a.im; }
double energy(std::span<const Complex> v);

struct AirConfig {
    double power = 1.0;          // P, per-symbol transmit budget
    double noise_var = 1e-2;     // sigma^2 of the CN(0, sigma^2 I) receiver noise
    double threshold_mult = 500; // C = threshold_mult * ||z||^2 / m; +inf means "never binds"
    double b_floor = 1e-12;      // smallest |b| the receiver accepts
    double norm_floor = 1e-2;    // lower bound on ||z|| when forming the message scale

    void validate() const;
    bool operator==(const AirConfig&) const = default;
};

class DegenerateBroadcast : public std::domain_error {
public:
    DegenerateBroadcast() : std::domain_error("broadcast model is zero: message scale sqrt(|z|^2/d) vanishes") {}
};

class ChannelSingularity : public std::domain_error {
public:
    ChannelSingularity() : std::domain_error("channel coefficient is zero, cannot invert") {}
};

/// |b| below the receiver floor.
class DecodeError : public std::runtime_error {
public:
    explicit DecodeError(double b);
    double denominator() const { return b_; }

private:
    double b_;
};

/// K i.i.d. CN(0, 1) coefficients.
std::vector<Complex> draw_channels(std::size_t num_devices, Rng& rng);

/// m i.i.d. CN(0, noise_var) samples; all zero when noise_var == 0 (no draws).
std::vector<Complex> draw_noise(std::size_t length, double noise_var, Rng& rng);

/// sqrt(||z||^2 / d); throws DegenerateBroadcast for z == 0.
double broadcast_scale(std::span<const double> z);

/// Scale used inside the AirComp loop: max(||z||, floor) / sqrt(d). Equals
/// broadcast_scale(z) unless ||z|| < floor; the floor keeps the first block of
/// a run started from z = 0 decodable.
double message_scale(std::span<const double> z, double floor);

/// [beta w, beta sqrt(||z||^2 / d)].
std::vector<double> build_message(double beta, std::span<const double> w, std::span<const double> z);

/// [beta w, beta scale] for an explicit scale > 0.
std::vector<double> build_message_scaled(double beta, std::span<const double> w, double scale);

/// x' = conj(h) / |h|^2 * m, so that h x' = m.
std::vector<Complex> channel_invert(std::span<const double> message, Complex h);

struct PowerControl {
    double rho = 0.0;
    std::vector<Complex> x;
    bool distorted = false; // ||x'||^2 / m exceeded the threshold
};

/// rho = sqrt(P / max(C, ||x'||^2 / m)); guarantees ||x||^2 <= m P.
PowerControl power_scale(std::vector<Complex> x_prime, double power, double threshold);

/// y = sum_k h_k x_k + n, summed in ascending k.
std::vector<Complex> superpose(std::span<const std::vector<Complex>> xs, std::span<const Complex> hs,
                               std::span<const Complex> noise);

/// [a, b] = Re(y), z = a / b * sqrt(||z_prev||^2 / d) with d = |y| - 1.
ModelParams receiver_decode(std::span<const Complex> y, std::span<const double> z_prev, double b_floor);

ModelParams receiver_decode_scaled(std::span<const Complex> y, double scale, double b_floor);

struct AirWeiszfeldState : gm::WeiszfeldState {
    std::vector<std::size_t> distorted_per_iteration;
    std::vector<bool> device_distorted; // flagged in at least one block
    std::size_t decode_failures = 0;    // failed blocks, including recovered ones
    std::size_t transmissions = 0;
    double peak_power_ratio = 0.0;      // max ||x_k||^2 / (m P) over all transmissions

    std::size_t distorted_devices() const;
};

/// Decode failed on a block and on its retry; carries the state up to the
/// last valid iterate.
class DecodeFailure : public std::runtime_error {
public:
    DecodeFailure(AirWeiszfeldState state, double b);
    const AirWeiszfeldState& state() const { return state_; }

private:
    AirWeiszfeldState state_;
};

/// Soft threshold for one block. A finite multiplier gives
/// C = threshold_mult * scale^2 * d / m, i.e. threshold_mult * ||z||^2 / m.
/// An infinite multiplier gives the smallest C that leaves every device
/// undistorted, max_k ||x'_k||^2 / m.
double soft_threshold(const AirConfig& air, double scale, std::size_t dim, std::span<const double> per_symbol_energy);

/// The smoothed Weiszfeld loop with every weighted sum computed over the air.
/// Channels and noise are redrawn per iteration from their own streams; a
/// failed decode is retried once with fresh draws, then DecodeFailure is
/// thrown.
AirWeiszfeldState weiszfeld_aircomp(ModelParams init, const gm::AggregationProblem& problem, const AirConfig& air,
                                    Rng& channel_rng, Rng& noise_rng, const gm::IterateObserver& observe = {});

} // namespace byzfl::air
