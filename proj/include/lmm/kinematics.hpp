#pragma once

// Frequency series -> velocity -> displacement, acceleration and force.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "lmm/core_model.hpp"
#include "lmm/dynamics.hpp"
#include "lmm/zfm.hpp"

namespace lmm {

/// Samples y(t) of one quantity.
struct TimeSeries {
    std::vector<double> t;
    std::vector<double> y;

    std::size_t size() const { return t.size(); }
};

inline constexpr int default_diff_halfwin = 3;

/// v = lambda * f_Doppler / 2 with f_Doppler = -(f_beat - f_rest).
inline TimeSeries beat_to_velocity(const FrequencySeries& f_beat, double f_rest, double wavelength) {
    detail::require(f_rest > 0.0, "rest frequency must be positive");
    TimeSeries v;
    v.t = f_beat.t_mid;
    v.y.resize(f_beat.size());
    for (std::size_t i = 0; i < f_beat.size(); ++i) {
        const double doppler = -(f_beat.f[i] - f_rest);
        v.y[i] = wavelength * doppler / 2.0;
    }
    return v;
}

namespace detail {

inline double uniform_step(const std::vector<double>& t) {
    if (t.size() < 2) return 0.0;
    const double h = (t.back() - t.front()) / double(t.size() - 1);
    for (std::size_t i = 1; i < t.size(); ++i)
        if (std::abs((t[i] - t[i - 1]) - h) > 1e-9 * h + 4e-16 * std::abs(t[i]))
            throw InvalidArgument("non-uniform time grid");
    return h;
}

} // namespace detail

/// Cumulative trapezoidal integral with x[0] = 0.
inline std::vector<double> integrate_velocity(const TimeSeries& v) {
    const double h = detail::uniform_step(v.t);
    std::vector<double> x(v.size(), 0.0);
    for (std::size_t i = 1; i < v.size(); ++i) x[i] = x[i - 1] + 0.5 * h * (v.y[i - 1] + v.y[i]);
    return x;
}

/// Central difference over +-k samples; the first and last k points use a
/// one-sided difference over the same 2k span.
inline std::vector<double> differentiate_velocity(const TimeSeries& v, int k = default_diff_halfwin) {
    detail::require(k >= 1, "differentiation half-window must be >= 1");
    const auto n = v.size();
    const auto kk = static_cast<std::size_t>(k);
    if (n <= 2 * kk) throw AnalysisError("series too short for the differentiation window");
    const double h = detail::uniform_step(v.t);
    const double span = 2.0 * double(k) * h;
    std::vector<double> a(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (i < kk) a[i] = (v.y[i + 2 * kk] - v.y[i]) / span;
        else if (i + kk >= n) a[i] = (v.y[i] - v.y[i - 2 * kk]) / span;
        else a[i] = (v.y[i + kk] - v.y[i - kk]) / span;
    }
    return a;
}

/// F = m a, the force acting on the moving mass; the wire feels -F.
inline std::vector<double> inertial_force(const std::vector<double>& a, double mass) {
    std::vector<double> F(a.size());
    std::transform(a.begin(), a.end(), F.begin(), [mass](double ai) { return mass * ai; });
    return F;
}

/// Four-point Lagrange interpolation of (t, y) at the uniform grid
/// t0 + j h. Nodes may be non-uniform but must be increasing.
inline TimeSeries resample_uniform(const TimeSeries& s, double h) {
    detail::require(h > 0.0, "resampling step must be positive");
    TimeSeries out;
    const auto n = s.size();
    if (n == 0) return out;
    const double t0 = s.t.front();
    const auto m = static_cast<std::size_t>(std::floor((s.t.back() - t0) / h * (1.0 + 1e-12))) + 1;
    out.t.resize(m);
    out.y.resize(m);
    std::size_t seg = 0;
    for (std::size_t j = 0; j < m; ++j) {
        const double t = t0 + double(j) * h;
        out.t[j] = t;
        while (seg + 2 < n && s.t[seg + 1] <= t) ++seg;
        if (n < 4) {
            // Too few nodes for a cubic; fall back to linear.
            const std::size_t i = std::min(seg, n >= 2 ? n - 2 : 0);
            if (n == 1) { out.y[j] = s.y[0]; continue; }
            const double w = (t - s.t[i]) / (s.t[i + 1] - s.t[i]);
            out.y[j] = s.y[i] + w * (s.y[i + 1] - s.y[i]);
            continue;
        }
        std::size_t lo = seg == 0 ? 0 : seg - 1;
        lo = std::min(lo, n - 4);
        double y = 0.0;
        for (std::size_t p = lo; p < lo + 4; ++p) {
            double w = 1.0;
            for (std::size_t q = lo; q < lo + 4; ++q)
                if (q != p) w *= (t - s.t[q]) / (s.t[p] - s.t[q]);
            y += w * s.y[p];
        }
        out.y[j] = y;
    }
    return out;
}

/// Full trace on a uniform grid whose step is the window cadence at the rest
/// frequency (stride / f_rest). Window centres drift with the Doppler shift,
/// so the per-window velocities are resampled onto that grid first.
inline MotionTrace build_motion_trace(const FrequencySeries& f_beat, double f_rest,
                                      const ApparatusSpec& apparatus,
                                      int k = default_diff_halfwin) {
    detail::require(f_rest > 0.0, "rest frequency must be positive");
    for (double f : f_beat.f)
        if (!(f > 0.0)) throw InvalidArgument("beat frequency must be positive");
    const TimeSeries raw = beat_to_velocity(f_beat, f_rest, apparatus.wavelength_air);
    const double h = double(f_beat.window_stride) / f_rest;
    const TimeSeries v = resample_uniform(raw, h);

    MotionTrace trace;
    trace.t = v.t;
    trace.v = v.y;
    trace.x = integrate_velocity(v);
    trace.a = differentiate_velocity(v, k);
    trace.F = inertial_force(trace.a, apparatus.moving_mass);
    trace.meta = {{"source", "build_motion_trace"},
                  {"diff_halfwin", std::to_string(k)},
                  {"window_periods", std::to_string(f_beat.window_periods)}};
    return trace;
}

} // namespace lmm
