#pragma once

// Kelvin-Voigt regression: sigma = c + E eps + eta deps/dt by ordinary least
// squares over pooled loading-limb samples.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lmm/core_model.hpp"
#include "lmm/event_analysis.hpp"

namespace lmm {

struct LoadingSample {
    double stress;       // Pa
    double strain;
    double strain_rate;  // 1/s
    std::size_t run;
};

struct LoadingSampleSet {
    std::vector<LoadingSample> samples;
    std::vector<std::string> warnings;

    std::size_t size() const { return samples.size(); }
};

/// Index range [begin, end) of the loading limb in a re-zeroed trace: from
/// the first sample at or after the origin to the maximum strain. With
/// `include_unloading` the range runs on while the wire is in tension.
struct LimbRange {
    std::size_t begin = 0, end = 0;
    bool empty() const { return end <= begin; }
};

inline LimbRange loading_limb(const StressStrainTrace& s, bool include_unloading = false) {
    LimbRange r;
    const auto n = s.size();
    std::size_t start = 0;
    while (start < n && s.t[start] < 0.0) ++start;
    if (start == n) return r;
    std::size_t e = start;
    for (std::size_t i = start; i < n; ++i)
        if (s.strain[i] > s.strain[e]) e = i;
    if (!(s.strain[e] > 0.0)) return r;
    std::size_t end = e + 1;
    if (include_unloading)
        while (end < n && s.stress[end] < 0.0) ++end;
    r.begin = start;
    r.end = end;
    return r;
}

inline LoadingSampleSet select_loading_samples(std::span<const StressStrainTrace> runs,
                                               bool include_unloading = false) {
    LoadingSampleSet set;
    for (std::size_t run = 0; run < runs.size(); ++run) {
        const auto& s = runs[run];
        const auto limb = loading_limb(s, include_unloading);
        if (limb.empty()) {
            set.warnings.push_back("run " + std::to_string(run) + ": no event, excluded");
            continue;
        }
        for (std::size_t i = limb.begin; i < limb.end; ++i)
            set.samples.push_back({s.stress[i], s.strain[i], s.strain_rate[i], run});
    }
    if (set.samples.empty()) throw AnalysisError("empty selection: no loading samples in any run");
    return set;
}

struct KVFit {
    double c = 0.0;    // Pa
    double E = 0.0;    // Pa
    double eta = 0.0;  // Pa s
    double r_squared = 0.0;
    std::size_t n_samples = 0;
    double residual_rms = 0.0;  // Pa

    MaterialKV material() const { return {c, E, eta}; }
};

struct FitOptions {
    bool include_viscosity = true;
    double max_condition = 1e10;
};

inline double predict_stress(const KVFit& fit, double strain, double strain_rate) {
    return fit.c + fit.E * strain + fit.eta * strain_rate;
}

/// Least squares via Householder QR of the column-scaled design [1, eps, deps].
/// eps and deps are divided by their largest magnitude before factorization;
/// E and eta differ by some eleven decades otherwise.
inline KVFit fit_kelvin_voigt(std::span<const LoadingSample> samples, const FitOptions& opt = {}) {
    const auto n = static_cast<Eigen::Index>(samples.size());
    const Eigen::Index p = opt.include_viscosity ? 3 : 2;
    if (n < 4) throw AnalysisError("Kelvin-Voigt fit needs at least 4 samples");

    double eps_scale = 0.0, rate_scale = 0.0;
    for (const auto& s : samples) {
        eps_scale = std::max(eps_scale, std::abs(s.strain));
        rate_scale = std::max(rate_scale, std::abs(s.strain_rate));
    }
    if (eps_scale == 0.0 || (opt.include_viscosity && rate_scale == 0.0))
        throw AnalysisError("rank deficiency: a design column is identically zero");

    Eigen::MatrixXd X(n, p);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& s = samples[static_cast<std::size_t>(i)];
        X(i, 0) = 1.0;
        X(i, 1) = s.strain / eps_scale;
        if (opt.include_viscosity) X(i, 2) = s.strain_rate / rate_scale;
        y(i) = s.stress;
    }

    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(X);
    const auto& sv = svd.singularValues();
    const double cond = sv(p - 1) > 0.0 ? sv(0) / sv(p - 1) : INFINITY;
    if (!(cond <= opt.max_condition))
        throw AnalysisError("rank deficiency: scaled design condition number exceeds limit");

    const Eigen::VectorXd beta = X.householderQr().solve(y);
    const Eigen::VectorXd resid = y - X * beta;

    KVFit fit;
    fit.c = beta(0);
    fit.E = beta(1) / eps_scale;
    fit.eta = opt.include_viscosity ? beta(2) / rate_scale : 0.0;
    fit.n_samples = samples.size();
    const double ss_res = resid.squaredNorm();
    const double ss_tot = (y.array() - y.mean()).matrix().squaredNorm();
    fit.r_squared = ss_tot > 0.0 ? std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0)
                                 : (ss_res == 0.0 ? 1.0 : 0.0);
    fit.residual_rms = std::sqrt(ss_res / double(n));
    return fit;
}

inline KVFit fit_kelvin_voigt(const LoadingSampleSet& set, const FitOptions& opt = {}) {
    return fit_kelvin_voigt(std::span<const LoadingSample>(set.samples), opt);
}

struct ResidualRow {
    double t, sigma_mea, sigma_cal, residual;
};

struct RunDiagnostics {
    std::size_t run = 0;
    double rms = 0.0;            // Pa
    double stress_max = 0.0;     // Pa, signed peak of the run
    double percent_of_max = 0.0; // rms / |stress_max| * 100
    std::vector<ResidualRow> rows;
};

/// Measured-versus-model residuals over each run's tension lobe.
inline std::vector<RunDiagnostics> fit_diagnostics(const KVFit& fit,
                                                   std::span<const StressStrainTrace> runs) {
    std::vector<RunDiagnostics> out;
    for (std::size_t run = 0; run < runs.size(); ++run) {
        const auto& s = runs[run];
        const auto limb = loading_limb(s, true);
        if (limb.empty()) continue;
        RunDiagnostics d;
        d.run = run;
        double ss = 0.0;
        for (std::size_t i = limb.begin; i < limb.end; ++i) {
            const double cal = predict_stress(fit, s.strain[i], s.strain_rate[i]);
            const double res = s.stress[i] - cal;
            d.rows.push_back({s.t[i], s.stress[i], cal, res});
            ss += res * res;
            d.stress_max = std::min(d.stress_max, s.stress[i]);
        }
        d.rms = std::sqrt(ss / double(d.rows.size()));
        d.percent_of_max = d.stress_max != 0.0 ? 100.0 * d.rms / std::abs(d.stress_max) : 0.0;
        out.push_back(std::move(d));
    }
    return out;
}

} // namespace lmm
