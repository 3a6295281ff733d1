// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on failure.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "lmm/lmm.hpp"

using namespace lmm;
namespace fs = std::filesystem;

namespace {

struct Criterion {
    int id;
    std::string name;
    bool ok = true;
    std::vector<std::string> notes;

    void check(bool cond, const char* fmt, auto... args) {
        char buf[512];
        std::snprintf(buf, sizeof buf, fmt, args...);
        notes.push_back(std::string(cond ? "ok   " : "FAIL ") + buf);
        ok = ok && cond;
    }
};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

void report(const Criterion& c) {
    for (const auto& n : c.notes) std::printf("    %s\n", n.c_str());
    std::printf("%s criterion %d: %s\n", c.ok ? "PASS" : "FAIL", c.id, c.name.c_str());
    std::fflush(stdout);
}

NoiseModel noise_free() {
    NoiseModel n;
    n.additive_sigma = 0.0;
    return n;
}

fs::path work_dir() {
    auto p = fs::temp_directory_path() / "lmm_acceptance";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

Criterion criterion1() {
    Criterion c{1, "Doppler velocity arithmetic"};
    const double lambda = 632.8e-9, f_rest = 3.13e6, v = 4.18e-2;
    FrequencySeries f;
    f.t_mid = {0.0, 0.0};
    f.f = {f_rest - 2.0 * v / lambda, f_rest - 132.12e3};
    const auto out = beat_to_velocity(f, f_rest, lambda);
    c.check(rel(out.y[0], v) <= 1e-12, "inverse of the synthesis law: v = %.15g (rel %.2e)", out.y[0],
            rel(out.y[0], v));
    // 2v/lambda is 132.111 kHz; the quoted 132.12 kHz is rounded.
    c.check(rel(2.0 * v / lambda, 132.12e3) < 1e-4, "offset 2v/lambda = %.6g Hz", 2.0 * v / lambda);
    c.check(std::abs(out.y[1] - v) < 0.5e-5, "132.12 kHz offset gives v = %.6g m/s (3 s.f. 4.18e-2)", out.y[1]);
    return c;
}

Criterion criterion2() {
    Criterion c{2, "ZFM accuracy on a noise-free tone"};
    ApparatusSpec app;
    const auto w = synthesize_reference(app, app.capture_duration, noise_free());
    const auto s = estimate_frequency_series(detect_zero_crossings(w), 2000);
    double worst = 0.0;
    for (double f : s.f) worst = std::max(worst, std::abs(f - app.f_rest));
    c.check(worst < 1.0, "%zu windows, worst |f - 3.13 MHz| = %.3g Hz", s.size(), worst);
    double wmin = INFINITY, wmax = 0.0;
    for (std::size_t i = 1; i < s.size(); ++i) {
        const double d = s.t_mid[i] - s.t_mid[i - 1];
        wmin = std::min(wmin, d);
        wmax = std::max(wmax, d);
    }
    const double sample = 1.0 / app.sample_rate;
    c.check(wmin >= 0.639e-3 - sample && wmax <= 0.639e-3 + sample,
            "window duration %.6g..%.6g ms (0.639 ms +- 1 sample)", wmin * 1e3, wmax * 1e3);
    return c;
}

Criterion criterion3() {
    Criterion c{3, "self-consistency arithmetic"};
    SpecimenSpec sp;
    const double area = cross_section_area(sp);
    const double sigma = -12.30 / area;
    c.check(rel(sigma, -1.566e9) < 0.01 && rel(sigma, -1.57e9) < 0.01, "sigma_max = %.4g Pa", sigma);

    const double m = 2.897, v1 = 4.18e-2, v2 = -4.14e-2;
    const double dke = 0.5 * m * (v1 * v1 - v2 * v2);
    c.check(rel(dke, 4.82e-5) < 0.01, "delta KE = %.4g J", dke);

    MotionTrace point;
    point.push_back(0.0, 0.0, 0.4283e-3, 0.0, -12.30);
    const auto ss = stress_strain_trace(point, sp);
    const double U = strain_energy(ss)[0];
    c.check(rel(U, -2.634e-3) < 0.01 && rel(U, -2.63e-3) < 0.01, "U_max = %.4g J", U);

    const double faf = bearing_friction(0.06, ApparatusSpec{}.bearing_coefficient);
    c.check(rel(faf, 4.8e-3) < 0.01, "F_af(0.06) = %.4g N", faf);

    FrequencySeries f;
    f.t_mid = {0.0};
    f.f = {3.13e6 - 10.0};
    const double dv = beat_to_velocity(f, 3.13e6, 632.8e-9).y[0];
    c.check(rel(dv, 3.16e-6) < 0.01, "dv(10 Hz) = %.4g m/s", dv);
    c.notes.push_back(std::string("info ") + "dv(10 Hz) vs quoted 3e-6: " +
                      std::to_string(100.0 * (dv - 3e-6) / 3e-6) + "% (quoted to one significant figure)");
    c.check(rel(ss.strain[0], 0.004283) < 0.01, "eps_max = %.4g%%", 100.0 * ss.strain[0]);
    return c;
}

struct TruthScalars {
    double F_max, x_max, T_FWHM;
};

TruthScalars truth_of(const MotionTrace& m, double gap) {
    TruthScalars t{};
    t.F_max = *std::min_element(m.F.begin(), m.F.end());
    t.x_max = *std::max_element(m.x.begin(), m.x.end()) - gap;
    t.T_FWHM = fwhm(m);
    return t;
}

Criterion criterion4(const fs::path& dir) {
    Criterion c{4, "round-trip closure"};
    RunConfig cfg;
    cfg.sim.v0 = 4.18e-2;
    cfg.sim.slack_gap = cfg.sim.v0 * 0.05;
    cfg.noise = noise_free();
    cfg.reference_noise = noise_free();
    cfg.reference_noise.rng_seed = 2;
    const auto out = run_pipeline(cfg);
    if (!out.event) {
        c.check(false, "pipeline failed: %s", out.error.c_str());
        return c;
    }
    const auto truth = truth_of(out.motion, cfg.sim.slack_gap);
    const auto& s = out.event->summary;
    c.check(rel(s.F_max, truth.F_max) <= 0.015, "F_max %.5g vs %.5g N (%.2f%%)", s.F_max, truth.F_max,
            100.0 * rel(s.F_max, truth.F_max));
    c.check(rel(s.x_max, truth.x_max) <= 0.015, "x_max %.5g vs %.5g m (%.2f%%)", s.x_max, truth.x_max,
            100.0 * rel(s.x_max, truth.x_max));
    c.check(rel(s.T_FWHM, truth.T_FWHM) <= 0.05, "T_FWHM %.5g vs %.5g s (%.2f%%)", s.T_FWHM, truth.T_FWHM,
            100.0 * rel(s.T_FWHM, truth.T_FWHM));

    CampaignConfig camp;
    camp.v0_schedule = default_v0_schedule(10);
    camp.output_dir = dir / "campaign10";
    const auto result = run_campaign(camp);
    c.check(result.completed() == 10, "%zu of 10 campaign runs completed", result.completed());
    const auto rep = build_report(camp.output_dir);
    if (!rep.fit) {
        c.check(false, "no pooled fit");
        return c;
    }
    const auto& f = *rep.fit;
    const MaterialKV nominal;
    double sigma_max = 0.0;
    for (const auto& r : rep.runs) sigma_max = std::min(sigma_max, r.event.summary.Stress_max);
    c.check(rel(f.E, nominal.E) <= 0.02, "E %.5g vs %.5g Pa (%.2f%%)", f.E, nominal.E, 100.0 * rel(f.E, nominal.E));
    c.check(std::abs(f.c) <= 0.02 * std::abs(sigma_max), "c %.4g Pa vs bound %.4g Pa", f.c,
            0.02 * std::abs(sigma_max));
    c.check(std::abs(f.eta) < 1e9, "eta %.4g Pa s (|eta| < 1e9)", f.eta);
    return c;
}

std::vector<StressStrainTrace> kv_runs(const MaterialKV& m, double noise, std::uint64_t seed) {
    // Harmonic contacts with peak stress 0.8 to 1.6 GPa.
    const double w = 100.94, T = std::numbers::pi / w;
    GaussianSource g(seed);
    std::vector<StressStrainTrace> runs;
    for (int r = 0; r < 30; ++r) {
        const double eps_max = (0.8e9 + 0.8e9 * r / 29.0) / std::abs(m.E);
        StressStrainTrace s;
        s.volume = 7.854e-10;
        for (int i = 0; i < 49; ++i) {
            const double t = T * i / 48.0;
            const double eps = eps_max * std::sin(w * t), rate = eps_max * w * std::cos(w * t);
            s.t.push_back(t);
            s.strain.push_back(eps);
            s.strain_rate.push_back(rate);
            s.stress.push_back(m.c + m.E * eps + m.eta * rate + noise * g());
        }
        runs.push_back(std::move(s));
    }
    return runs;
}

Criterion criterion5() {
    Criterion c{5, "Kelvin-Voigt regression exactness"};
    const MaterialKV nominal{4.960e7, -3.758e11, -2.432e7};
    const auto clean = kv_runs(nominal, 0.0, 1);
    const auto f = fit_kelvin_voigt(select_loading_samples(clean));
    c.check(rel(f.c, nominal.c) <= 1e-8 && rel(f.E, nominal.E) <= 1e-8 && rel(f.eta, nominal.eta) <= 1e-8,
            "noise-free rel errors c %.1e E %.1e eta %.1e", rel(f.c, nominal.c), rel(f.E, nominal.E),
            rel(f.eta, nominal.eta));
    c.check(std::abs(f.r_squared - 1.0) < 1e-12, "noise-free R^2 = %.15g", f.r_squared);

    const auto noisy = kv_runs(nominal, 0.01e9, 7);
    const auto fn = fit_kelvin_voigt(select_loading_samples(noisy));
    c.check(fn.r_squared >= 0.998, "noisy R^2 = %.6f over %zu samples", fn.r_squared, fn.n_samples);
    const auto diag = fit_diagnostics(fn, noisy);
    double lo = INFINITY, hi = 0.0;
    for (const auto& d : diag) {
        lo = std::min(lo, d.percent_of_max);
        hi = std::max(hi, d.percent_of_max);
    }
    c.check(lo >= 0.5 && hi <= 2.0, "per-run rms/|sigma_max| %.3f%%..%.3f%%", lo, hi);
    return c;
}

Criterion criterion6(const fs::path& campaign_dir) {
    Criterion c{6, "uncertainty budget under injected velocity jitter"};
    const double sigma_v = 3.29e-5;
    const auto cj = nlohmann::json::parse(io::read_text(campaign_dir / "campaign.json"));
    GaussianSource g(6);
    std::vector<VelocityJitter> jit;
    double free_F_ss = 0.0, predicted_ss = 0.0;
    std::size_t free_F_n = 0;
    ApparatusSpec app;
    double step = 0.0;
    for (const auto& r : cj.at("runs")) {
        if (r.at("status") != "completed") continue;
        auto tr = io::read_motion_csv(campaign_dir / r.at("dir").get<std::string>() / "trace.csv");
        step = tr.step();
        const auto clean = tr;
        for (auto& v : tr.v) v += sigma_v * g();
        tr.a = differentiate_velocity({tr.t, tr.v}, 3);
        tr.F = inertial_force(tr.a, app.moving_mass);
        jit.push_back(velocity_jitter(tr, 20));
        // Empirical force scatter on the free flight before the event.
        const auto o = detect_event_origin(clean, {OriginMethod::threshold});
        for (std::size_t i = 3; i + 3 < o.origin.threshold_index; ++i) {
            const double d = tr.F[i] - clean.F[i];
            free_F_ss += d * d;
            ++free_F_n;
        }
    }
    BudgetParams p;
    p.window_step = step;
    const auto pooled = pooled_jitter(jit);
    const auto b = budget_from_jitter(pooled, -16.30, app, p);
    const double sf = b.u1_vibration.sigma_F;
    predicted_ss = app.moving_mass * sigma_v * std::sqrt(2.0) / (6.0 * step);
    c.check(jit.size() == 30, "%zu runs with injected jitter", jit.size());
    c.check(std::abs(pooled.pre / sigma_v - 1.0) < 0.1 && std::abs(pooled.post / sigma_v - 1.0) < 0.1,
            "pooled sigma_v pre %.4g post %.4g m/s", pooled.pre, pooled.post);
    c.check(sf >= 30e-3 && sf <= 37e-3, "sigma_F = %.4g mN (band 30..37, reference 33.5)", sf * 1e3);
    const double empirical = std::sqrt(free_F_ss / double(free_F_n));
    c.check(rel(empirical, predicted_ss) < 0.05, "free-flight force scatter %.4g mN vs analytic %.4g mN",
            empirical * 1e3, predicted_ss * 1e3);
    c.check(std::abs(b.combined_relative / 2e-3 - 1.0) <= 0.2, "combined %.4g mN = %.4f%% of 16.30 N",
            b.combined_sigma_F * 1e3, 100.0 * b.combined_relative);
    return c;
}

Criterion criterion7(const fs::path& dir) {
    Criterion c{7, "oracle and property suites"};
    SimConfig sim;
    sim.duration = 0.06;
    const auto num = simulate_impact(sim);
    const auto ref = analytic_contact_trace(sim);
    double dx = 0.0, dv = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        dx = std::max(dx, std::abs(num.x[i] - ref.x[i]));
        dv = std::max(dv, std::abs(num.v[i] - ref.v[i]));
    }
    c.check(dx < 1e-9, "RK4 vs closed form max |dx| = %.3g m at dt = 1e-6", dx);
    c.check(dv < 1e-7, "RK4 vs closed form max |dv| = %.3g m/s", dv);

    auto coarse = sim;
    coarse.duration = 0.02;
    auto err = [&](double dt) {
        coarse.dt = dt;
        const auto a = simulate_impact(coarse), b = analytic_contact_trace(coarse);
        double e = 0.0;
        for (std::size_t i = 0; i < b.size(); ++i) e = std::max(e, std::abs(a.x[i] - b.x[i]));
        return e;
    };
    const double ratio = err(8e-5) / err(4e-5);
    c.check(ratio >= 8.0, "halving dt reduces error %.2fx", ratio);

    const auto ss = stress_strain_trace(num, sim.specimen);
    const auto U = strain_energy(ss);
    double worst = 0.0;
    for (std::size_t i = 0; i < num.size(); ++i) {
        const double direct = 0.5 * num.F[i] * (num.x[i]);
        if (direct != 0.0) worst = std::max(worst, rel(U[i], direct));
    }
    c.check(worst <= 1e-12, "1/2 F x = 1/2 V sigma eps, worst rel %.2e", worst);

    MotionTrace pulse;
    const double T = 0.031, h = 1e-5;
    for (std::size_t i = 0; i * h <= 0.05; ++i) {
        const double t = double(i) * h, tau = t - 0.01;
        pulse.push_back(t, 0, 0, 0, tau > 0 && tau < T ? -std::sin(std::numbers::pi * tau / T) : 0.0);
    }
    const double fw = fwhm(pulse);
    c.check(std::abs(fw - 2.0 * T / 3.0) < 1e-3 * T, "half-sine FWHM %.8g vs 2T/3 = %.8g", fw, 2.0 * T / 3.0);

    std::vector<LoadingSample> samples;
    GaussianSource g(8);
    for (int i = 0; i < 200; ++i) {
        const double e = 0.005 * g.uniform(), r = 0.5 * g();
        samples.push_back({4.96e7 - 3.758e11 * e - 2.432e7 * r + 1e7 * g(), e, r, 0});
    }
    const auto fit = fit_kelvin_voigt(samples);
    double s1 = 0, se = 0, sr = 0, ny = 0, n1 = 0, ne = 0, nr = 0;
    for (const auto& s : samples) {
        const double res = s.stress - predict_stress(fit, s.strain, s.strain_rate);
        s1 += res; se += res * s.strain; sr += res * s.strain_rate;
        ny += s.stress * s.stress; n1 += 1; ne += s.strain * s.strain; nr += s.strain_rate * s.strain_rate;
    }
    const double orth = std::max({std::abs(s1) / std::sqrt(ny * n1), std::abs(se) / std::sqrt(ny * ne),
                                  std::abs(sr) / std::sqrt(ny * nr)});
    c.check(orth <= 1e-6, "residual orthogonality %.2e (<= 1e-6)", orth);

    setenv("SOURCE_DATE_EPOCH", "1700000000", 1);
    RunConfig rc;
    rc.sim.v0 = 3e-2;
    rc.sim.slack_gap = rc.sim.v0 * 0.05;
    execute_run(dir / "det_a", rc);
    execute_run(dir / "det_b", rc);
    bool same = true;
    for (const char* f : {"trace.csv", "summary.json", "manifest.json", "beat.raw", "reference.raw"})
        same = same && io::read_text(dir / "det_a" / f) == io::read_text(dir / "det_b" / f);
    unsetenv("SOURCE_DATE_EPOCH");
    c.check(same, "reruns bit-identical (trace, summary, manifest, raw waveforms)");
    return c;
}

Criterion criterion8(const fs::path& campaign_dir) {
    Criterion c{8, "campaign trends"};
    CampaignConfig camp;
    camp.v0_schedule = default_v0_schedule(30);
    camp.output_dir = campaign_dir;
    const auto result = run_campaign(camp);
    c.check(result.completed() == 30, "%zu of 30 runs completed", result.completed());
    const auto rep = emit_report(campaign_dir);
    double ke_lo = INFINITY, ke_hi = 0.0;
    for (const auto& r : rep.runs) {
        ke_lo = std::min(ke_lo, r.KE0);
        ke_hi = std::max(ke_hi, r.KE0);
    }
    c.check(rel(rep.F_max_min, -2.40) < 0.1 && rel(rep.F_max_max, -16.28) < 0.1,
            "F_max spans %.3f..%.3f N (reference -2.40..-16.28), KE0 %.3g..%.3g mJ", rep.F_max_min, rep.F_max_max,
            ke_lo * 1e3, ke_hi * 1e3);
    c.check(rep.spring_constant_spread < 0.05, "spring constant relative spread %.3f%%",
            100.0 * rep.spring_constant_spread);
    c.check(rep.fwhm_spread < 0.10, "FWHM relative spread %.3f%%", 100.0 * rep.fwhm_spread);
    c.check(rep.dissipation_rank_correlation > 0.9, "rank correlation of dKE with KE0 = %.4f",
            rep.dissipation_rank_correlation);
    return c;
}

} // namespace

int main() {
    const auto dir = work_dir();
    std::vector<Criterion> results;
    auto run = [&](auto&& f) {
        try {
            results.push_back(f());
        } catch (const std::exception& e) {
            Criterion c{int(results.size()) + 1, "exception"};
            c.check(false, "%s", e.what());
            results.push_back(c);
        }
        report(results.back());
    };
    run(criterion1);
    run(criterion2);
    run(criterion3);
    run([&] { return criterion4(dir); });
    run(criterion5);
    // Criterion 6 reuses the 30-run campaign of criterion 8.
    Criterion c8;
    try {
        c8 = criterion8(dir / "campaign30");
    } catch (const std::exception& e) {
        c8 = Criterion{8, "campaign trends"};
        c8.check(false, "%s", e.what());
    }
    run([&] { return criterion6(dir / "campaign30"); });
    run([&] { return criterion7(dir); });
    results.push_back(c8);
    report(c8);

    const auto failed = std::count_if(results.begin(), results.end(), [](const auto& c) { return !c.ok; });
    std::printf("%zu of %zu acceptance criteria passed\n", results.size() - std::size_t(failed), results.size());
    return failed ? 1 : 0;
}
