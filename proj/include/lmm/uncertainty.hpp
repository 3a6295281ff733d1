#pragma once

// Standard uncertainty of the measured impact force.
//
//   U1  interferometer vibration: velocity scatter in free flight, carried
//       through the differentiator to acceleration and force
//   U2  mass calibration
//   U3  beam inclination (cosine error)
//   U4  rest-frequency stability
//   U5  bearing friction, F_af = A v

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>

#include "lmm/core_model.hpp"
#include "lmm/dynamics.hpp"
#include "lmm/event_analysis.hpp"

namespace lmm {

struct VelocityJitter {
    double pre = 0.0;   // m/s
    double post = 0.0;  // m/s
};

struct BudgetParams {
    std::size_t n = 20;         // free-flight windows per side
    int k = 3;                  // differentiation half-window
    double delta_m = 1.0e-5;    // kg (0.01 g balance uncertainty)
    double theta = 1.0e-3;      // rad
    double delta_f = 10.0;      // Hz
    double v_ref = 0.06;        // m/s
    double window_step = 0.0;   // s; 0 selects the trace step or the nominal window
};

struct UncertaintyBudget {
    struct {
        double sigma_v_pre = 0, sigma_v_post = 0, sigma_a = 0, sigma_F = 0;
    } u1_vibration;
    struct {
        double delta_m = 0, delta_F_at_Fmax = 0;
    } u2_mass;
    struct {
        double theta = 0, relative_v_error = 0;
    } u3_alignment;
    struct {
        double delta_f = 0, delta_v = 0, delta_F = 0;
    } u4_frequency;
    struct {
        double F_af_at_vref = 0;
    } u5_friction;
    double F_max_abs = 0.0;
    double combined_sigma_F = 0.0;
    double combined_relative = 0.0;
    double dominant_sigma_F = 0.0;
};

inline double bearing_friction(double v, double A) { return A * v; }

namespace detail {

inline double sample_stddev(std::span<const double> y) {
    if (y.size() < 2) return 0.0;
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= double(y.size());
    double ss = 0.0;
    for (double v : y) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / double(y.size() - 1));
}

} // namespace detail

/// Sample standard deviation of the n free-flight velocities on each side of
/// the event; the segments are the ones used for v1 and v2.
inline VelocityJitter velocity_jitter(const MotionTrace& trace, std::size_t n = 20,
                                      const OriginOptions& origin = {}) {
    EventOptions opt;
    opt.pre_n = n;
    opt.origin = origin;
    opt.origin.method = OriginMethod::threshold;
    const auto [o, rezeroed] = detect_event_origin(trace, opt.origin);
    std::size_t r = o.peak_index;
    while (r + 1 < trace.size() && std::abs(trace.F[r]) >= o.threshold) ++r;
    if (o.threshold_index < n || r + 1 + n > trace.size())
        throw AnalysisError("insufficient free-flight segment for velocity jitter");
    const std::span<const double> v(trace.v);
    return {detail::sample_stddev(v.subspan(o.threshold_index - n, n)),
            detail::sample_stddev(v.subspan(r + 1, n))};
}

/// Root mean square of per-run jitters, the campaign-level figure.
inline VelocityJitter pooled_jitter(std::span<const VelocityJitter> runs) {
    VelocityJitter out;
    if (runs.empty()) return out;
    for (const auto& j : runs) {
        out.pre += j.pre * j.pre;
        out.post += j.post * j.post;
    }
    out.pre = std::sqrt(out.pre / double(runs.size()));
    out.post = std::sqrt(out.post / double(runs.size()));
    return out;
}

/// Budget from an already measured jitter and peak force.
inline UncertaintyBudget budget_from_jitter(const VelocityJitter& jitter, double F_max,
                                            const ApparatusSpec& apparatus,
                                            const BudgetParams& p) {
    detail::require(p.k >= 1, "differentiation half-window must be >= 1");
    const double step = p.window_step > 0.0 ? p.window_step : apparatus.nominal_window();
    const double m = apparatus.moving_mass;
    const double gain = std::sqrt(2.0) / (2.0 * double(p.k) * step);

    UncertaintyBudget b;
    b.F_max_abs = std::abs(F_max);
    b.u1_vibration.sigma_v_pre = jitter.pre;
    b.u1_vibration.sigma_v_post = jitter.post;
    b.u1_vibration.sigma_a = std::max(jitter.pre, jitter.post) * gain;
    b.u1_vibration.sigma_F = m * b.u1_vibration.sigma_a;

    b.u2_mass.delta_m = p.delta_m;
    b.u2_mass.delta_F_at_Fmax = p.delta_m / m * b.F_max_abs;

    b.u3_alignment.theta = p.theta;
    b.u3_alignment.relative_v_error = 1.0 - std::cos(p.theta);

    b.u4_frequency.delta_f = p.delta_f;
    b.u4_frequency.delta_v = apparatus.wavelength_air * p.delta_f / 2.0;
    b.u4_frequency.delta_F = m * b.u4_frequency.delta_v * gain;

    b.u5_friction.F_af_at_vref = std::abs(bearing_friction(p.v_ref, apparatus.bearing_coefficient));

    const double u1 = b.u1_vibration.sigma_F * (1.0 + b.u3_alignment.relative_v_error);
    b.combined_sigma_F = std::sqrt(u1 * u1 + b.u2_mass.delta_F_at_Fmax * b.u2_mass.delta_F_at_Fmax +
                                   b.u4_frequency.delta_F * b.u4_frequency.delta_F +
                                   b.u5_friction.F_af_at_vref * b.u5_friction.F_af_at_vref);
    b.combined_relative = b.F_max_abs > 0.0 ? b.combined_sigma_F / b.F_max_abs : 0.0;
    b.dominant_sigma_F = std::max({b.u1_vibration.sigma_F, b.u2_mass.delta_F_at_Fmax,
                                   b.u4_frequency.delta_F, b.u5_friction.F_af_at_vref});
    return b;
}

/// Budget for one measured trace; the window step defaults to the trace grid.
inline UncertaintyBudget evaluate_budget(const MotionTrace& trace, const ApparatusSpec& apparatus,
                                         BudgetParams p = {}) {
    const auto jitter = velocity_jitter(trace, p.n);
    if (p.window_step <= 0.0) p.window_step = trace.step();
    const double F_max = *std::min_element(trace.F.begin(), trace.F.end());
    return budget_from_jitter(jitter, F_max, apparatus, p);
}

} // namespace lmm
