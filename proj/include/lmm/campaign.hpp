#pragma once

// Multi-run campaigns and the aggregate report.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "lmm/config.hpp"
#include "lmm/kv_fit.hpp"
#include "lmm/pipeline.hpp"
#include "lmm/uncertainty.hpp"

namespace lmm {

struct CampaignRun {
    std::size_t index = 0;
    double v0 = 0.0;
    std::string dir;
    RunManifest manifest;
};

struct CampaignResult {
    std::filesystem::path dir;
    std::vector<CampaignRun> runs;

    std::size_t completed() const {
        return static_cast<std::size_t>(std::count_if(runs.begin(), runs.end(), [](const auto& r) {
            return r.manifest.status == RunStatus::completed;
        }));
    }
};

inline std::string run_dir_name(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "run_%03zu", index);
    return buf;
}

/// Runs are independent and go to a bounded worker pool; per-run failures
/// are recorded in that run's manifest and the campaign continues.
inline CampaignResult run_campaign(const CampaignConfig& cfg) {
    if (cfg.output_dir.empty()) throw InvalidArgument("campaign output directory not set");
    std::error_code ec;
    std::filesystem::create_directories(cfg.output_dir, ec);
    if (ec) throw IoError("cannot create '" + cfg.output_dir.string() + "': " + ec.message());

    const auto n = cfg.n_runs();
    CampaignResult result;
    result.dir = cfg.output_dir;
    result.runs.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        result.runs[i].index = i;
        result.runs[i].v0 = cfg.v0_schedule[i];
        result.runs[i].dir = run_dir_name(i);
    }

    unsigned workers = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(n, 1)));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            const WriteOptions w{cfg.write_raw, cfg.write_motion};
            result.runs[i].manifest =
                execute_run(cfg.output_dir / result.runs[i].dir, campaign_run_config(cfg, i), w);
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
    }

    nlohmann::json runs = nlohmann::json::array();
    for (const auto& r : result.runs)
        runs.push_back({{"index", r.index}, {"v0_mps", r.v0}, {"dir", r.dir},
                        {"status", to_string(r.manifest.status)}, {"error", r.manifest.error}});
    nlohmann::json manifest{{"config", to_json(cfg)}, {"runs", runs},
                            {"n_runs", n}, {"completed", result.completed()}};
    io::write_text(cfg.output_dir / "campaign.json", manifest.dump(2) + "\n");
    return result;
}

namespace detail {

inline std::vector<double> ranks(const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double avg = 0.5 * double(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}

inline double relative_spread(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
    return mean != 0.0 ? (*hi - *lo) / std::abs(mean) : 0.0;
}

} // namespace detail

/// Spearman rank correlation (Pearson on average ranks).
inline double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    const auto n = a.size();
    if (n < 2 || b.size() != n) return 0.0;
    const auto ra = detail::ranks(a), rb = detail::ranks(b);
    const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / double(n);
    const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / double(n);
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sab += (ra[i] - ma) * (rb[i] - mb);
        saa += (ra[i] - ma) * (ra[i] - ma);
        sbb += (rb[i] - mb) * (rb[i] - mb);
    }
    return saa > 0 && sbb > 0 ? sab / std::sqrt(saa * sbb) : 0.0;
}

struct ReportRun {
    std::size_t index = 0;
    double v0 = 0.0;
    double KE0 = 0.0;
    EventAnalysis event;
    VelocityJitter jitter;
};

struct Report {
    std::vector<ReportRun> runs;
    std::optional<KVFit> fit;
    std::vector<RunDiagnostics> diagnostics;
    std::optional<UncertaintyBudget> budget;
    double spring_constant_spread = 0.0;
    double fwhm_spread = 0.0;
    double dissipation_rank_correlation = 0.0;
    double F_max_min = 0.0, F_max_max = 0.0;
    std::vector<std::string> warnings;
};

inline nlohmann::json to_json(const Report& r) {
    nlohmann::json runs = nlohmann::json::array();
    for (const auto& run : r.runs) {
        const auto& s = run.event.summary;
        runs.push_back({{"index", run.index}, {"v0", run.v0}, {"F_max", s.F_max},
                        {"x_max", s.x_max}, {"T_FWHM", s.T_FWHM}, {"KE0", run.KE0},
                        {"delta_KE", s.delta_KE}, {"work_abs", std::abs(s.work)},
                        {"spring_constant", s.spring_constant},
                        {"sigma_v_pre", run.jitter.pre}, {"sigma_v_post", run.jitter.post},
                        {"summary", io::to_json(s)}});
    }
    nlohmann::json diag = nlohmann::json::array();
    for (const auto& d : r.diagnostics)
        diag.push_back({{"run", r.runs[d.run].index}, {"rms_pa", d.rms}, {"stress_max_pa", d.stress_max},
                        {"percent_of_max", d.percent_of_max}});
    return {{"runs", runs},
            {"kv_fit", r.fit ? io::to_json(*r.fit) : nlohmann::json(nullptr)},
            {"fit_diagnostics", diag},
            {"uncertainty", r.budget ? io::to_json(*r.budget) : nlohmann::json(nullptr)},
            {"trends", {{"spring_constant_relative_spread", r.spring_constant_spread},
                        {"fwhm_relative_spread", r.fwhm_spread},
                        {"dissipation_rank_correlation", r.dissipation_rank_correlation},
                        {"F_max_min", r.F_max_min}, {"F_max_max", r.F_max_max}}},
            {"warnings", r.warnings}};
}

/// Aggregate tables from the per-run trace CSVs. Nothing else from the run
/// directories is read besides each run's configuration.
inline Report build_report(const std::filesystem::path& campaign_dir) {
    nlohmann::json cj;
    try {
        cj = nlohmann::json::parse(io::read_text(campaign_dir / "campaign.json"));
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("bad campaign manifest: ") + e.what());
    }
    Report rep;
    std::vector<StressStrainTrace> ss;
    std::vector<MotionTrace> traces;
    std::optional<RunConfig> first_cfg;
    for (const auto& r : cj.at("runs")) {
        if (r.at("status").get<std::string>() != "completed") continue;
        const auto dir = campaign_dir / r.at("dir").get<std::string>();
        const auto m = read_run_manifest(dir / "manifest.json");
        const auto trace = io::read_motion_csv(dir / "trace.csv");
        const auto& sim = m.config.sim;
        try {
            ReportRun run;
            run.index = r.at("index").get<std::size_t>();
            run.v0 = r.at("v0_mps").get<double>();
            run.event = analyze_event(trace, sim.specimen, sim.apparatus.moving_mass,
                                      m.config.analysis.event_options());
            run.jitter = velocity_jitter(trace, m.config.analysis.pre_n);
            run.KE0 = 0.5 * sim.apparatus.moving_mass * run.event.summary.v1 * run.event.summary.v1;
            ss.push_back(run.event.stress_strain);
            traces.push_back(trace);
            rep.runs.push_back(std::move(run));
            if (!first_cfg) first_cfg = m.config;
        } catch (const AnalysisError& e) {
            rep.warnings.push_back(dir.filename().string() + ": " + e.what());
        }
    }
    if (rep.runs.empty()) throw AnalysisError("no completed runs to report");

    try {
        const auto samples = select_loading_samples(ss);
        for (const auto& w : samples.warnings) rep.warnings.push_back(w);
        rep.fit = fit_kelvin_voigt(samples);
        rep.diagnostics = fit_diagnostics(*rep.fit, ss);
    } catch (const AnalysisError& e) {
        rep.warnings.push_back(std::string("kv fit: ") + e.what());
    }

    std::vector<VelocityJitter> jit;
    std::vector<double> k, fw, ke0, dke, fmax;
    for (const auto& r : rep.runs) {
        jit.push_back(r.jitter);
        k.push_back(r.event.summary.spring_constant);
        fw.push_back(r.event.summary.T_FWHM);
        ke0.push_back(r.KE0);
        dke.push_back(r.event.summary.delta_KE);
        fmax.push_back(r.event.summary.F_max);
    }
    const double peak = -*std::min_element(fmax.begin(), fmax.end());
    BudgetParams bp = budget_params(first_cfg->analysis);
    bp.window_step = traces.front().step();
    rep.budget = budget_from_jitter(pooled_jitter(jit), peak, first_cfg->sim.apparatus, bp);
    rep.spring_constant_spread = detail::relative_spread(k);
    rep.fwhm_spread = detail::relative_spread(fw);
    rep.dissipation_rank_correlation = spearman(ke0, dke);
    rep.F_max_min = *std::max_element(fmax.begin(), fmax.end());
    rep.F_max_max = *std::min_element(fmax.begin(), fmax.end());
    return rep;
}

/// Writes report.json and the figure-data CSVs under `campaign_dir/report`.
inline Report emit_report(const std::filesystem::path& campaign_dir) {
    const auto rep = build_report(campaign_dir);
    const auto out = campaign_dir / "report";
    io::write_text(out / "report.json", to_json(rep).dump(2) + "\n");
    if (rep.budget) io::write_text(out / "budget.txt", io::budget_table(*rep.budget));

    io::Table fig6{{"run", "t_s", "F_N"}, std::vector<std::vector<double>>(3)};
    io::Table fig7{{"run", "x_m", "F_N"}, std::vector<std::vector<double>>(3)};
    io::Table fig8{{"run", "F_max_N", "T_FWHM_s"}, std::vector<std::vector<double>>(3)};
    io::Table fig9{{"run", "KE0_J", "delta_KE_J", "dissipation_ratio"}, std::vector<std::vector<double>>(4)};
    for (const auto& r : rep.runs) {
        const auto& ev = r.event;
        const double id = double(r.index);
        for (std::size_t i = ev.origin.index; i <= ev.release_index; ++i) {
            fig6.columns[0].push_back(id);
            fig6.columns[1].push_back(ev.trace.t[i]);
            fig6.columns[2].push_back(ev.trace.F[i]);
            fig7.columns[0].push_back(id);
            fig7.columns[1].push_back(ev.trace.x[i]);
            fig7.columns[2].push_back(ev.trace.F[i]);
        }
        fig8.columns[0].push_back(id);
        fig8.columns[1].push_back(ev.summary.F_max);
        fig8.columns[2].push_back(ev.summary.T_FWHM);
        fig9.columns[0].push_back(id);
        fig9.columns[1].push_back(r.KE0);
        fig9.columns[2].push_back(ev.summary.delta_KE);
        fig9.columns[3].push_back(r.KE0 > 0 ? ev.summary.delta_KE / r.KE0 : 0.0);
        const auto rdir = out / "figures" / run_dir_name(r.index);
        io::write_motion_csv(rdir / "fig3_trace.csv", ev.trace);
        write_event_figures(rdir, ev);
    }
    io::write_csv(out / "figures" / "fig6_force_time.csv", fig6);
    io::write_csv(out / "figures" / "fig7_force_displacement.csv", fig7);
    io::write_csv(out / "figures" / "fig8_fwhm_vs_fmax.csv", fig8);
    io::write_csv(out / "figures" / "fig9_energy_dissipation.csv", fig9);

    if (rep.fit) {
        io::write_text(out / "kv_fit.json", io::to_json(*rep.fit).dump(2) + "\n");
        io::Table fig11{{"run", "strain", "strain_rate_per_s", "sigma_mea_pa", "sigma_cal_pa"},
                        std::vector<std::vector<double>>(5)};
        for (std::size_t i = 0; i < rep.runs.size(); ++i) {
            const auto& s = rep.runs[i].event.stress_strain;
            const auto limb = loading_limb(s);
            for (std::size_t j = limb.begin; j < limb.end; ++j) {
                fig11.columns[0].push_back(double(rep.runs[i].index));
                fig11.columns[1].push_back(s.strain[j]);
                fig11.columns[2].push_back(s.strain_rate[j]);
                fig11.columns[3].push_back(s.stress[j]);
                fig11.columns[4].push_back(predict_stress(*rep.fit, s.strain[j], s.strain_rate[j]));
            }
        }
        io::write_csv(out / "figures" / "fig11_regression.csv", fig11);
        for (const auto& d : rep.diagnostics)
            io::write_residual_csv(out / "figures" / ("fig12_13_residual_" + run_dir_name(rep.runs[d.run].index) + ".csv"), d);
    }
    return rep;
}

} // namespace lmm
