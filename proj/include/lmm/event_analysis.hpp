#pragma once

// Scalar results of one impact: event origin, peak force, pulse width,
// stress/strain traces and the energy ledger.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "lmm/core_model.hpp"
#include "lmm/dynamics.hpp"

namespace lmm {

/// How the event origin is placed.
///
/// `threshold` walks back from the force peak to the first sample whose
/// magnitude is below 0.1% of |F_max| and takes that sample as the origin.
/// `linear_extrapolation` starts from the same bracket, fits F against x
/// over the linear part of the loading limb and takes the displacement where
/// that line reaches zero force, interpolated in time. The differentiator
/// spreads the force onset over +-k windows, which the threshold rule alone
/// turns into an early origin.
enum class OriginMethod { threshold, linear_extrapolation };

struct OriginOptions {
    OriginMethod method = OriginMethod::linear_extrapolation;
    double threshold_fraction = 1e-3;
    /// Events with |F_max| below ten times this floor are rejected.
    double noise_floor = 5e-3;  // N
    double fit_lo = 0.25;       // fraction of |F_max|
    double fit_hi = 0.75;
};

struct EventOrigin {
    std::size_t index = 0;            // last sample at or before the origin
    std::size_t threshold_index = 0;  // first sub-threshold sample before the peak
    std::size_t peak_index = 0;
    double time = 0.0;                // origin in the input trace's clock
    double displacement = 0.0;
    double threshold = 0.0;           // N
    double F_max = 0.0;               // N, signed
    OriginMethod method = OriginMethod::threshold;
};

struct OriginResult {
    EventOrigin origin;
    MotionTrace trace;  // t and x shifted so the origin is at zero
};

namespace detail {

inline std::size_t argmin(const std::vector<double>& y) {
    return static_cast<std::size_t>(std::min_element(y.begin(), y.end()) - y.begin());
}

} // namespace detail

inline OriginResult detect_event_origin(const MotionTrace& trace, const OriginOptions& opt = {}) {
    if (trace.empty() || !trace.aligned()) throw InvalidArgument("empty or misaligned trace");
    EventOrigin o;
    o.peak_index = detail::argmin(trace.F);
    o.F_max = trace.F[o.peak_index];
    const double peak = std::abs(o.F_max);
    if (!(o.F_max < 0.0) || peak < 10.0 * opt.noise_floor)
        throw AnalysisError("no event: peak tensile force is within the noise floor");
    o.threshold = opt.threshold_fraction * peak;

    std::size_t j = o.peak_index;
    while (j > 0 && std::abs(trace.F[j]) >= o.threshold) --j;
    if (std::abs(trace.F[j]) >= o.threshold)
        throw AnalysisError("event origin not found: force never drops below threshold");
    o.threshold_index = j;
    o.index = j;
    o.time = trace.t[j];
    o.displacement = trace.x[j];
    o.method = OriginMethod::threshold;

    if (opt.method == OriginMethod::linear_extrapolation) {
        double sx = 0, sf = 0, sxx = 0, sxf = 0;
        std::size_t n = 0;
        for (std::size_t i = j; i <= o.peak_index; ++i) {
            const double f = std::abs(trace.F[i]);
            if (f < opt.fit_lo * peak || f > opt.fit_hi * peak) continue;
            sx += trace.x[i]; sf += trace.F[i];
            sxx += trace.x[i] * trace.x[i]; sxf += trace.x[i] * trace.F[i];
            ++n;
        }
        if (n >= 2) {
            const double dn = double(n);
            const double var = sxx - sx * sx / dn;
            const double slope = var > 0.0 ? (sxf - sx * sf / dn) / var : 0.0;
            if (slope < 0.0) {
                const double x0 = sx / dn - (sf / dn) / slope;
                // Locate x0 on the loading side of the peak.
                std::size_t i = o.peak_index;
                while (i > 0 && trace.x[i - 1] > x0) --i;
                double t0;
                if (i == 0) {
                    t0 = trace.v[0] != 0.0 ? trace.t[0] + (x0 - trace.x[0]) / trace.v[0] : trace.t[0];
                } else {
                    const double w = (x0 - trace.x[i - 1]) / (trace.x[i] - trace.x[i - 1]);
                    t0 = trace.t[i - 1] + w * (trace.t[i] - trace.t[i - 1]);
                }
                o.time = t0;
                o.displacement = x0;
                std::size_t idx = 0;
                while (idx + 1 < trace.size() && trace.t[idx + 1] <= t0) ++idx;
                o.index = idx;
                o.method = OriginMethod::linear_extrapolation;
            }
        }
    }

    OriginResult r{o, trace};
    for (auto& t : r.trace.t) t -= o.time;
    for (auto& x : r.trace.x) x -= o.displacement;
    return r;
}

/// Width of the force pulse at half its peak magnitude, with both half-level
/// crossings linearly interpolated.
inline double fwhm(const MotionTrace& trace) {
    if (trace.empty()) throw InvalidArgument("empty trace");
    const std::size_t p = detail::argmin(trace.F);
    const double half = 0.5 * trace.F[p];
    if (!(half < 0.0)) throw AnalysisError("half level not crossed: no tensile pulse");
    const auto& F = trace.F;
    const auto& t = trace.t;

    std::size_t i = p;
    while (i > 0 && F[i] <= half) --i;
    if (F[i] <= half) throw AnalysisError("half level not crossed before the peak");
    const double t_left = t[i] + (half - F[i]) / (F[i + 1] - F[i]) * (t[i + 1] - t[i]);

    std::size_t k = p;
    while (k + 1 < F.size() && F[k] <= half) ++k;
    if (F[k] <= half) throw AnalysisError("half level not crossed after the peak");
    const double t_right = t[k - 1] + (half - F[k - 1]) / (F[k] - F[k - 1]) * (t[k] - t[k - 1]);
    return t_right - t_left;
}

struct StressStrainTrace {
    std::vector<double> t;
    std::vector<double> stress;       // Pa, negative in tension
    std::vector<double> strain;
    std::vector<double> strain_rate;  // 1/s
    double volume = 0.0;              // m^3

    std::size_t size() const { return t.size(); }
};

inline StressStrainTrace stress_strain_trace(const MotionTrace& trace, const SpecimenSpec& specimen) {
    const double area = cross_section_area(specimen);
    const double L0 = specimen.natural_length;
    StressStrainTrace s;
    s.t = trace.t;
    s.volume = wire_volume(specimen);
    s.stress.resize(trace.size());
    s.strain.resize(trace.size());
    s.strain_rate.resize(trace.size());
    for (std::size_t i = 0; i < trace.size(); ++i) {
        s.stress[i] = trace.F[i] / area;
        s.strain[i] = trace.x[i] / L0;
        s.strain_rate[i] = trace.v[i] / L0;
    }
    return s;
}

/// Strain energy density form 1/2 V sigma eps, pointwise.
inline std::vector<double> strain_energy(const StressStrainTrace& s) {
    std::vector<double> U(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) U[i] = 0.5 * s.volume * s.stress[i] * s.strain[i];
    return U;
}

struct EventSummary {
    double F_max = 0.0;            // N, most negative force on the mass
    double x_max = 0.0;            // m
    double t_Fmax = 0.0;           // s after origin
    double T_FWHM = 0.0;           // s
    double v1 = 0.0;               // m/s before the event
    double v2 = 0.0;               // m/s after the event
    double delta_KE = 0.0;         // J, 1/2 m (v1^2 - v2^2)
    double work = 0.0;             // J, signed integral of F dx over the event
    double U_max = 0.0;            // J, 1/2 V sigma eps at maximum strain
    double spring_constant = 0.0;  // N/m, |F_max| / x_max
    double Strain_max = 0.0;
    double Stress_max = 0.0;       // Pa, signed
};

struct EventOptions {
    std::size_t pre_n = 20;
    OriginOptions origin;
};

/// Everything derived from one event, kept together for report emission.
struct EventAnalysis {
    EventOrigin origin;
    MotionTrace trace;             // re-zeroed
    StressStrainTrace stress_strain;
    std::size_t release_index = 0; // first sub-threshold sample after the peak
    std::size_t max_strain_index = 0;
    EventSummary summary;
};

inline EventAnalysis analyze_event(const MotionTrace& input, const SpecimenSpec& specimen,
                                   double mass, const EventOptions& opt = {}) {
    auto [origin, trace] = detect_event_origin(input, opt.origin);
    const auto n = trace.size();
    const std::size_t p = origin.peak_index;
    const std::size_t first = origin.threshold_index;

    std::size_t r = p;
    while (r + 1 < n && std::abs(trace.F[r]) >= origin.threshold) ++r;
    if (std::abs(trace.F[r]) >= origin.threshold)
        throw AnalysisError("event does not decay below threshold inside the trace");
    if (first < opt.pre_n || r + 1 + opt.pre_n > n)
        throw AnalysisError("insufficient free flight around the event");

    EventAnalysis ev;
    ev.origin = origin;
    ev.release_index = r;
    auto& s = ev.summary;

    double v1 = 0.0, v2 = 0.0;
    for (std::size_t i = first - opt.pre_n; i < first; ++i) v1 += trace.v[i];
    for (std::size_t i = r + 1; i < r + 1 + opt.pre_n; ++i) v2 += trace.v[i];
    s.v1 = v1 / double(opt.pre_n);
    s.v2 = v2 / double(opt.pre_n);
    s.delta_KE = 0.5 * mass * (s.v1 * s.v1 - s.v2 * s.v2);

    double work = 0.0;
    for (std::size_t i = first; i < r; ++i)
        work += 0.5 * (trace.F[i] + trace.F[i + 1]) * (trace.x[i + 1] - trace.x[i]);
    s.work = work;

    std::size_t e = std::max(origin.index, first);
    for (std::size_t i = e; i <= r; ++i)
        if (trace.x[i] > trace.x[e]) e = i;
    ev.max_strain_index = e;

    s.F_max = origin.F_max;
    s.t_Fmax = trace.t[p];
    s.x_max = trace.x[e];
    s.T_FWHM = fwhm(trace);
    ev.stress_strain = stress_strain_trace(trace, specimen);
    s.Strain_max = ev.stress_strain.strain[e];
    s.Stress_max = ev.stress_strain.stress[p];
    s.U_max = 0.5 * ev.stress_strain.volume * ev.stress_strain.stress[e] * ev.stress_strain.strain[e];
    s.spring_constant = s.x_max > 0.0 ? -s.F_max / s.x_max : 0.0;
    ev.trace = std::move(trace);
    return ev;
}

inline EventSummary event_summary(const MotionTrace& trace, const SpecimenSpec& specimen,
                                  double mass, std::size_t pre_n = 20) {
    EventOptions opt;
    opt.pre_n = pre_n;
    return analyze_event(trace, specimen, mass, opt).summary;
}

} // namespace lmm
