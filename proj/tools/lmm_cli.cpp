// lmm_cli: simulate, synthesize and analyze levitation-mass impact runs.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lmm/lmm.hpp"

namespace {

using namespace lmm;
namespace fs = std::filesystem;

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_analysis = 3;
constexpr int exit_io = 4;

int exit_code(ErrorKind k) {
    switch (k) {
    case ErrorKind::invalid_config: return exit_config;
    case ErrorKind::analysis_failure: return exit_analysis;
    case ErrorKind::io_failure: return exit_io;
    }
    return exit_analysis;
}

nlohmann::json read_json(const fs::path& p) {
    try {
        return nlohmann::json::parse(io::read_text(p));
    } catch (const nlohmann::json::parse_error& e) {
        throw InvalidArgument("'" + p.string() + "' is not valid JSON: " + e.what());
    }
}

struct Common {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<int> zfm_periods;
    std::optional<int> diff_halfwin;
    std::optional<double> frest;
};

RunConfig load_run_config(const Common& c) {
    RunConfig cfg = c.config.empty() ? RunConfig{} : run_config_from_json(read_json(c.config));
    if (c.seed) {
        cfg.sim.rng_seed = *c.seed;
        cfg.noise.rng_seed = detail::splitmix64(*c.seed + 1);
        cfg.reference_noise.rng_seed = detail::splitmix64(*c.seed + 2);
    }
    if (c.zfm_periods) {
        detail::require(*c.zfm_periods > 0, "--zfm-periods must be positive");
        cfg.analysis.zfm_periods = *c.zfm_periods;
    }
    if (c.diff_halfwin) {
        detail::require(*c.diff_halfwin >= 1, "--diff-halfwin must be >= 1");
        cfg.analysis.diff_halfwin = *c.diff_halfwin;
    }
    if (c.frest) {
        detail::require(*c.frest > 0.0, "--frest must be positive");
        cfg.analysis.f_rest = *c.frest;
    }
    return cfg;
}

void add_common(CLI::App* sub, Common& c, bool analysis_flags) {
    sub->add_option("--config", c.config, "JSON configuration");
    sub->add_option("--seed", c.seed, "RNG seed override");
    if (analysis_flags) {
        sub->add_option("--zfm-periods", c.zfm_periods, "periods per ZFM window (default 2000)");
        sub->add_option("--diff-halfwin", c.diff_halfwin, "central-difference half window (default 3)");
        sub->add_option("--frest", c.frest, "constant rest frequency in Hz instead of a reference channel");
    }
}

void print_summary(const EventSummary& s) {
    std::printf("F_max %.6g N  x_max %.6g m  T_FWHM %.6g s  dKE %.6g J  k %.6g N/m\n", s.F_max, s.x_max,
                s.T_FWHM, s.delta_KE, s.spring_constant);
}

std::vector<StressStrainTrace> stress_strain_from(const std::vector<std::string>& traces,
                                                  const RunConfig& cfg, std::vector<std::string>& warn) {
    std::vector<StressStrainTrace> out;
    for (const auto& p : traces) {
        const auto trace = io::read_motion_csv(p);
        try {
            out.push_back(analyze_event(trace, cfg.sim.specimen, cfg.sim.apparatus.moving_mass,
                                        cfg.analysis.event_options())
                              .stress_strain);
        } catch (const AnalysisError& e) {
            warn.push_back(p + ": " + e.what());
            out.push_back(stress_strain_trace(trace, cfg.sim.specimen));
        }
    }
    return out;
}

std::vector<std::string> campaign_traces(const fs::path& dir) {
    const auto cj = read_json(dir / "campaign.json");
    std::vector<std::string> traces;
    for (const auto& r : cj.at("runs"))
        if (r.at("status").get<std::string>() == "completed")
            traces.push_back((dir / r.at("dir").get<std::string>() / "trace.csv").string());
    return traces;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Levitation-mass impact test bench"};
    app.require_subcommand(1);

    Common c;
    std::string motion, beat, reference, trace, campaign_dir;
    std::vector<std::string> traces;
    bool keep_raw = false, keep_motion = false;

    auto* sim = app.add_subcommand("simulate", "integrate the mass/wire motion");
    add_common(sim, c, false);
    sim->add_option("--out", c.out, "motion CSV")->required();

    auto* syn = app.add_subcommand("synthesize", "digitized beat waveform from a motion trace");
    add_common(syn, c, false);
    syn->add_option("--motion", motion, "motion CSV (simulated when omitted)");
    syn->add_option("--out", c.out, "beat raw file")->required();
    syn->add_option("--reference", reference, "also write the reference channel here");

    auto* ana = app.add_subcommand("analyze", "beat waveform to trace, summary and budget");
    add_common(ana, c, true);
    ana->add_option("--beat", beat, "beat raw file")->required();
    ana->add_option("--reference", reference, "reference raw file");
    ana->add_option("--out", c.out, "output directory")->required();

    auto* fit = app.add_subcommand("fit", "pooled Kelvin-Voigt regression");
    add_common(fit, c, false);
    fit->add_option("--traces", traces, "trace CSVs");
    fit->add_option("--campaign", campaign_dir, "campaign directory");
    fit->add_option("--out", c.out, "fit JSON");

    auto* unc = app.add_subcommand("uncertainty", "force uncertainty budget of one trace");
    add_common(unc, c, true);
    unc->add_option("--trace", trace, "trace CSV")->required();
    unc->add_option("--out", c.out, "budget JSON");

    auto* camp = app.add_subcommand("campaign", "run a multi-velocity campaign");
    add_common(camp, c, true);
    camp->add_option("--out", c.out, "campaign directory")->required();
    camp->add_flag("--keep-raw", keep_raw, "write raw waveforms for every run");
    camp->add_flag("--keep-motion", keep_motion, "write simulated motion for every run");

    auto* rep = app.add_subcommand("report", "aggregate report of a campaign");
    rep->add_option("--campaign", campaign_dir, "campaign directory")->required();

    auto* pipe = app.add_subcommand("pipeline", "end-to-end single run");
    add_common(pipe, c, true);
    pipe->add_option("--out", c.out, "run directory")->required();
    pipe->add_flag("--keep-raw,!--no-raw", keep_raw, "write raw waveforms");
    pipe->add_flag("--keep-motion,!--no-motion", keep_motion, "write the simulated motion");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_config;
    }

    try {
        if (*sim) {
            const auto cfg = load_run_config(c);
            io::write_motion_csv(c.out, simulate_impact(cfg.sim));
        } else if (*syn) {
            const auto cfg = load_run_config(c);
            const auto m = motion.empty() ? simulate_impact(cfg.sim) : io::read_motion_csv(motion);
            const auto hash = config_hash(cfg);
            io::write_waveform(c.out, synthesize_beat(m, cfg.sim.apparatus, cfg.noise), hash);
            if (!reference.empty())
                io::write_waveform(reference,
                                   synthesize_reference(cfg.sim.apparatus, cfg.sim.apparatus.capture_duration,
                                                        cfg.reference_noise),
                                   hash);
        } else if (*ana) {
            const auto cfg = load_run_config(c);
            const auto w = io::read_waveform(beat);
            std::optional<Waveform> ref;
            if (!reference.empty()) ref = io::read_waveform(reference);
            const auto an = analyze_waveforms(w, ref ? &*ref : nullptr, cfg);
            const auto ev = analyze_event(an.trace, cfg.sim.specimen, cfg.sim.apparatus.moving_mass,
                                          cfg.analysis.event_options());
            const auto budget = evaluate_budget(an.trace, cfg.sim.apparatus, budget_params(cfg.analysis));
            write_analysis_outputs(c.out, an, ev, budget);
            print_summary(ev.summary);
        } else if (*fit) {
            const auto cfg = load_run_config(c);
            if (!campaign_dir.empty())
                for (auto& t : campaign_traces(campaign_dir)) traces.push_back(t);
            detail::require(!traces.empty(), "fit needs --traces or --campaign");
            std::vector<std::string> warn;
            const auto ss = stress_strain_from(traces, cfg, warn);
            auto samples = select_loading_samples(ss);
            for (auto& w : warn) samples.warnings.push_back(w);
            for (const auto& w : samples.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
            const auto f = fit_kelvin_voigt(samples);
            const auto j = io::to_json(f).dump(2) + "\n";
            if (c.out.empty()) std::fputs(j.c_str(), stdout);
            else io::write_text(c.out, j);
        } else if (*unc) {
            const auto cfg = load_run_config(c);
            const auto b = evaluate_budget(io::read_motion_csv(trace), cfg.sim.apparatus,
                                           budget_params(cfg.analysis));
            if (!c.out.empty()) io::write_text(c.out, io::to_json(b).dump(2) + "\n");
            std::fputs(io::budget_table(b).c_str(), stdout);
        } else if (*camp) {
            CampaignConfig cc = c.config.empty() ? CampaignConfig{} : campaign_config_from_json(read_json(c.config));
            if (c.config.empty()) cc.v0_schedule = default_v0_schedule(30);
            if (c.zfm_periods) cc.base.analysis.zfm_periods = *c.zfm_periods;
            if (c.diff_halfwin) cc.base.analysis.diff_halfwin = *c.diff_halfwin;
            if (c.frest) cc.base.analysis.f_rest = *c.frest;
            if (c.seed) cc.seed = *c.seed;
            cc.output_dir = c.out;
            cc.write_raw = cc.write_raw || keep_raw;
            cc.write_motion = cc.write_motion || keep_motion;
            const auto r = run_campaign(cc);
            std::printf("%zu of %zu runs completed\n", r.completed(), r.runs.size());
        } else if (*rep) {
            const auto r = emit_report(campaign_dir);
            std::printf("report over %zu runs written to %s\n", r.runs.size(),
                        (fs::path(campaign_dir) / "report").string().c_str());
        } else if (*pipe) {
            const auto cfg = load_run_config(c);
            cfg.sim.validate();
            const auto m = execute_run(c.out, cfg, {keep_raw, keep_motion});
            if (m.status != RunStatus::completed) {
                std::fprintf(stderr, "error: %s\n", m.error.c_str());
                return exit_code(m.error_kind);
            }
            print_summary(io::summary_from_json(read_json(fs::path(c.out) / "summary.json")));
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_io;
    }
    return exit_ok;
}
