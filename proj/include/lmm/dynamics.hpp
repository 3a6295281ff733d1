#pragma once

// Forward model: a rigid mass on a frictionless bearing pulls a
// Kelvin-Voigt wire that transmits tension only.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lmm/core_model.hpp"

namespace lmm {

struct SimConfig {
    SpecimenSpec specimen;
    MaterialKV material;
    ApparatusSpec apparatus;
    double v0 = 4.18e-2;      // m/s
    double slack_gap = 0.0;   // m of loose travel before the wire is taut
    double dt = 1.0e-6;       // s
    double duration = 0.1;    // s
    std::uint64_t rng_seed = 1;

    void validate() const {
        specimen.validate();
        apparatus.validate();
        detail::require(std::isfinite(v0) && v0 >= 0.0, "v0 must be non-negative");
        detail::require(dt > 0.0, "dt must be positive");
        detail::require(duration > 0.0, "duration must be positive");
        detail::require(slack_gap >= 0.0, "slack_gap must be non-negative");
    }
};

/// Sampled motion of the moving mass. F is the force acting on the mass.
struct MotionTrace {
    std::vector<double> t;
    std::vector<double> v;
    std::vector<double> x;
    std::vector<double> a;
    std::vector<double> F;
    std::map<std::string, std::string> meta;

    std::size_t size() const { return t.size(); }
    bool empty() const { return t.empty(); }

    void reserve(std::size_t n) {
        t.reserve(n); v.reserve(n); x.reserve(n); a.reserve(n); F.reserve(n);
    }

    void push_back(double ti, double vi, double xi, double ai, double Fi) {
        t.push_back(ti); v.push_back(vi); x.push_back(xi); a.push_back(ai); F.push_back(Fi);
    }

    bool aligned() const {
        const auto n = t.size();
        return v.size() == n && x.size() == n && a.size() == n && F.size() == n;
    }

    /// Grid step, or 0 for traces shorter than two samples.
    double step() const { return t.size() < 2 ? 0.0 : (t.back() - t.front()) / double(t.size() - 1); }

    bool uniform(double rel_tol = 1e-9) const {
        if (t.size() < 3) return true;
        const double h = step();
        if (!(h > 0.0)) return false;
        for (std::size_t i = 1; i < t.size(); ++i)
            if (std::abs((t[i] - t[i - 1]) - h) > rel_tol * h + 4e-16 * std::abs(t[i])) return false;
        return true;
    }
};

/// Linear spring and dashpot stiffness of the wire as seen by the mass.
struct WireLumped {
    double k; // N/m, positive for E < 0
    double b; // N s/m, positive for eta < 0
};

inline WireLumped lumped_wire(const MaterialKV& material, const SpecimenSpec& specimen) {
    const double area = cross_section_area(specimen);
    return {-area * material.E / specimen.natural_length,
            -area * material.eta / specimen.natural_length};
}

namespace detail {

// Constitutive force without the slack and tension-only clamps.
inline double taut_force(double x, double v, const MaterialKV& m, const SpecimenSpec& s,
                         double area) {
    return area * (m.E * x / s.natural_length + m.eta * v / s.natural_length);
}

} // namespace detail

/// Force on the mass from the wire: zero while slack, never compressive.
inline double contact_force(double x, double v, const MaterialKV& material,
                            const SpecimenSpec& specimen) {
    if (!(x > 0.0)) return 0.0;
    const double f = detail::taut_force(x, v, material, specimen, cross_section_area(specimen));
    return f > 0.0 ? 0.0 : f;
}

/// Largest step that still resolves the contact oscillation.
inline double max_stable_step(const SimConfig& cfg) {
    const double area = cross_section_area(cfg.specimen);
    if (cfg.material.E == 0.0) return INFINITY;
    return 1e-2 * std::sqrt(cfg.apparatus.moving_mass * cfg.specimen.natural_length /
                            (area * std::abs(cfg.material.E)));
}

/// Fixed-step RK4 integration of m x'' = contact_force(x - slack_gap, x').
///
/// The grid is t_i = i*dt. Steps that contain the instant the wire goes taut
/// or releases are split at that instant, so the integrand is smooth inside
/// every RK4 stage and the recorded grid stays uniform.
inline MotionTrace simulate_impact(const SimConfig& cfg) {
    cfg.validate();
    if (cfg.dt > max_stable_step(cfg))
        throw InvalidArgument("unstable step: dt exceeds 1e-2 of the contact time scale");

    const double m = cfg.apparatus.moving_mass;
    const double gap = cfg.slack_gap;
    const double area = cross_section_area(cfg.specimen);
    const auto& mat = cfg.material;
    const auto& spec = cfg.specimen;

    auto accel_taut = [&](double x, double v) {
        return detail::taut_force(x - gap, v, mat, spec, area) / m;
    };
    struct State { double x, v; };
    auto rk4 = [&](State s, double h) {
        const double k1x = s.v, k1v = accel_taut(s.x, s.v);
        const double k2x = s.v + 0.5 * h * k1v, k2v = accel_taut(s.x + 0.5 * h * k1x, k2x);
        const double k3x = s.v + 0.5 * h * k2v, k3v = accel_taut(s.x + 0.5 * h * k2x, k3x);
        const double k4x = s.v + h * k3v, k4v = accel_taut(s.x + h * k3x, k4x);
        return State{s.x + h / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x),
                     s.v + h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)};
    };

    // Contact integration over [0, h] that stops at release; returns the
    // unused remainder of the step (0 if still in contact).
    bool in_contact = false;
    auto contact_step = [&](State& s, double h) -> double {
        const State next = rk4(s, h);
        if (detail::taut_force(next.x - gap, next.v, mat, spec, area) <= 0.0) {
            s = next;
            return 0.0;
        }
        double lo = 0.0, hi = h;
        for (int it = 0; it < 200 && hi - lo > 1e-15 * h; ++it) {
            const double mid = 0.5 * (lo + hi);
            const State trial = rk4(s, mid);
            if (detail::taut_force(trial.x - gap, trial.v, mat, spec, area) <= 0.0) lo = mid;
            else hi = mid;
        }
        s = rk4(s, lo);
        in_contact = false;
        return h - lo;
    };

    const auto n = static_cast<std::size_t>(std::floor(cfg.duration / cfg.dt + 1e-9)) + 1;
    MotionTrace trace;
    trace.reserve(n);
    State s{0.0, cfg.v0};

    auto record = [&](std::size_t i) {
        const double acc = contact_force(s.x - gap, s.v, mat, spec) / m;
        trace.push_back(double(i) * cfg.dt, s.v, s.x, acc, m * acc);
    };

    record(0);
    for (std::size_t i = 1; i < n; ++i) {
        double remaining = cfg.dt;
        while (remaining > 0.0) {
            if (in_contact) {
                remaining = contact_step(s, remaining);
                continue;
            }
            // Free flight is exact; detect the taut instant inside the step.
            if (s.v > 0.0 && s.x + s.v * remaining > gap && s.x <= gap) {
                const double tau = (gap - s.x) / s.v;
                s.x = gap;
                remaining -= tau;
                in_contact = true;
                continue;
            }
            s.x += s.v * remaining;
            remaining = 0.0;
        }
        record(i);
    }
    trace.meta = {{"source", "simulate_impact"}, {"dt_s", std::to_string(cfg.dt)}};
    return trace;
}

/// Closed-form underdamped contact solution on the simulator's grid, for use
/// as an oracle. Free flight before the taut instant; truncated at release.
inline MotionTrace analytic_contact_trace(const SimConfig& cfg) {
    cfg.validate();
    const double m = cfg.apparatus.moving_mass;
    const auto [k, b] = lumped_wire(cfg.material, cfg.specimen);
    detail::require(k > 0.0, "analytic oracle needs a restoring wire (E < 0)");
    if (!(b * b < 4.0 * m * k))
        throw InvalidArgument("overdamped parameters: analytic oracle is underdamped only");
    detail::require(cfg.v0 > 0.0, "analytic oracle needs v0 > 0");

    const double w0 = std::sqrt(k / m);
    const double zeta = b / (2.0 * std::sqrt(m * k));
    const double wd = w0 * std::sqrt(1.0 - zeta * zeta);
    const double decay = zeta * w0;
    const double v0 = cfg.v0;
    const double t_touch = cfg.slack_gap / v0;

    auto x_of = [&](double tau) { return v0 / wd * std::exp(-decay * tau) * std::sin(wd * tau); };
    auto v_of = [&](double tau) {
        return v0 * std::exp(-decay * tau) *
               (std::cos(wd * tau) - decay / wd * std::sin(wd * tau));
    };
    auto tension = [&](double tau) { return k * x_of(tau) + b * v_of(tau); };

    double lo = 0.5 * std::numbers::pi / wd, hi = std::numbers::pi / wd;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (tension(mid) > 0.0) lo = mid; else hi = mid;
    }
    const double t_release = t_touch + lo;

    const auto n = static_cast<std::size_t>(std::floor(cfg.duration / cfg.dt + 1e-9)) + 1;
    MotionTrace trace;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = double(i) * cfg.dt;
        if (t > t_release) break;
        if (t < t_touch) {
            trace.push_back(t, v0, v0 * t, 0.0, 0.0);
            continue;
        }
        const double tau = t - t_touch;
        const double x = x_of(tau), v = v_of(tau);
        const double acc = -(k * x + b * v) / m;
        trace.push_back(t, v, cfg.slack_gap + x, acc, m * acc);
    }
    trace.meta = {{"source", "analytic_contact_trace"}};
    return trace;
}

} // namespace lmm
