#pragma once

// Synthesis of the digitized photodiode outputs. The signal channel carries
// the Doppler-shifted beat f_rest - 2 v / lambda, the reference channel the
// rest frequency itself.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "lmm/core_model.hpp"
#include "lmm/dynamics.hpp"
#include "lmm/random.hpp"

namespace lmm {

enum class Channel { signal_beat, rest_reference };

inline const char* to_string(Channel c) {
    return c == Channel::signal_beat ? "signal_beat" : "rest_reference";
}

inline Channel channel_from_string(const std::string& s) {
    if (s == "signal_beat") return Channel::signal_beat;
    if (s == "rest_reference") return Channel::rest_reference;
    throw InvalidArgument("unknown channel '" + s + "'");
}

/// Quantized digitizer record. Codes are signed and centred at zero; for the
/// default 8-bit converter they span [-128, 127].
struct Waveform {
    std::vector<std::int16_t> codes;
    double sample_rate = 30.0e6;
    int adc_bits = 8;
    Channel channel = Channel::signal_beat;
    std::size_t trigger_index = 0;
    std::map<std::string, std::string> meta;

    std::size_t size() const { return codes.size(); }
    double duration() const { return double(codes.size()) / sample_rate; }
};

struct NoiseModel {
    double additive_sigma = 0.02;  // fraction of full scale
    double amplitude = 0.9;        // fraction of full scale
    double phase0 = 0.0;           // rad
    std::uint64_t rng_seed = 1;
    /// Optical path velocity noise (m/s rms) with knots at the nominal ZFM
    /// window spacing, standing in for interferometer vibration.
    double velocity_jitter = 0.0;

    void validate() const {
        detail::require(amplitude > 0.0 && amplitude <= 1.0, "amplitude must be in (0, 1]");
        detail::require(additive_sigma >= 0.0, "additive_sigma must be non-negative");
        detail::require(velocity_jitter >= 0.0, "velocity_jitter must be non-negative");
    }
};

namespace detail {

inline std::int16_t quantize(double s, int bits) {
    const double full = double((1 << (bits - 1)) - 1);
    const double lo = -double(1 << (bits - 1));
    return static_cast<std::int16_t>(std::clamp(std::round(s * full), lo, full));
}

inline std::size_t capture_samples(double duration, double rate) {
    return static_cast<std::size_t>(std::floor(duration * rate + 1e-6));
}

// Tone synthesis from a per-sample frequency callback.
template <typename FreqAt>
Waveform synthesize_tone(std::size_t n, const ApparatusSpec& app, const NoiseModel& noise,
                         Channel channel, FreqAt&& freq_at) {
    Waveform w;
    w.sample_rate = app.sample_rate;
    w.adc_bits = app.adc_bits;
    w.channel = channel;
    w.codes.resize(n);
    GaussianSource gauss(noise.rng_seed);
    const double inv_rate = 1.0 / app.sample_rate;
    const double two_pi = 2.0 * std::numbers::pi;

    // Phase is carried in cycles, reduced to [0, 1) to keep full precision.
    double cycles = 0.0;
    double f_prev = n ? freq_at(std::size_t{0}) : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) {
            const double f = freq_at(i);
            cycles += 0.5 * (f_prev + f) * inv_rate;
            cycles -= std::floor(cycles);
            f_prev = f;
        }
        double s = noise.amplitude * std::sin(noise.phase0 + two_pi * cycles);
        if (noise.additive_sigma > 0.0) s += noise.additive_sigma * gauss();
        w.codes[i] = quantize(s, app.adc_bits);
    }
    w.meta["seed"] = std::to_string(noise.rng_seed);
    return w;
}

} // namespace detail

/// Beat-channel record for the capture window of `apparatus`.
inline Waveform synthesize_beat(const MotionTrace& motion, const ApparatusSpec& apparatus,
                                const NoiseModel& noise) {
    apparatus.validate();
    noise.validate();
    if (motion.size() < 2 || !motion.aligned())
        throw InvalidArgument("motion trace needs at least two aligned samples");
    if (!motion.uniform()) throw InvalidArgument("motion trace grid must be uniform");

    const std::size_t n = detail::capture_samples(apparatus.capture_duration, apparatus.sample_rate);
    const double t0 = motion.t.front();
    const double h = motion.step();
    const double t_end = double(n ? n - 1 : 0) / apparatus.sample_rate;
    if (t0 > 1e-12 || motion.t.back() < t_end - 1e-9 * h)
        throw InvalidArgument("motion trace does not cover the capture window");

    // Optional vibration: piecewise-linear velocity noise on a coarse grid.
    std::vector<double> jitter;
    const double knot = apparatus.nominal_window();
    if (noise.velocity_jitter > 0.0) {
        GaussianSource g(noise.rng_seed ^ 0x9e3779b97f4a7c15ULL);
        jitter.resize(static_cast<std::size_t>(t_end / knot) + 2);
        for (auto& j : jitter) j = noise.velocity_jitter * g();
    }
    auto velocity_at = [&](double t) {
        const double pos = (t - t0) / h;
        auto idx = static_cast<std::size_t>(pos);
        if (idx >= motion.size() - 1) idx = motion.size() - 2;
        const double frac = pos - double(idx);
        double v = motion.v[idx] + frac * (motion.v[idx + 1] - motion.v[idx]);
        if (!jitter.empty()) {
            const double kp = t / knot;
            const auto ki = std::min(static_cast<std::size_t>(kp), jitter.size() - 2);
            const double kf = kp - double(ki);
            v += jitter[ki] + kf * (jitter[ki + 1] - jitter[ki]);
        }
        return v;
    };

    const double scale = 2.0 / apparatus.wavelength_air;
    double f_min = INFINITY;
    for (double v : motion.v) f_min = std::min(f_min, apparatus.f_rest - scale * v);
    if (!(f_min - scale * 6.0 * noise.velocity_jitter > 0.0))
        throw InvalidArgument("negative beat: f_rest - 2 v / lambda must stay positive");

    const double inv_rate = 1.0 / apparatus.sample_rate;
    Waveform w = detail::synthesize_tone(n, apparatus, noise, Channel::signal_beat,
        [&](std::size_t i) {
            return apparatus.f_rest - scale * velocity_at(double(i) * inv_rate);
        });
    w.meta["source"] = "synthesize_beat";
    return w;
}

/// Constant tone at the rest frequency.
inline Waveform synthesize_reference(const ApparatusSpec& apparatus, double duration,
                                     const NoiseModel& noise) {
    apparatus.validate();
    noise.validate();
    const std::size_t n = detail::capture_samples(duration, apparatus.sample_rate);
    if (!(duration > 0.0) || n == 0) throw InvalidArgument("empty waveform: duration must be positive");
    Waveform w = detail::synthesize_tone(n, apparatus, noise, Channel::rest_reference,
                                         [&](std::size_t) { return apparatus.f_rest; });
    w.meta["source"] = "synthesize_reference";
    return w;
}

} // namespace lmm
