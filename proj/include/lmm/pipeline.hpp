#pragma once

// One run end to end: simulate, synthesize both channels, run the analysis
// chain, and write the run directory.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "lmm/config.hpp"
#include "lmm/event_analysis.hpp"
#include "lmm/io/csv.hpp"
#include "lmm/io/results_json.hpp"
#include "lmm/io/waveform_file.hpp"
#include "lmm/kinematics.hpp"
#include "lmm/uncertainty.hpp"
#include "lmm/zfm.hpp"

namespace lmm {

struct WaveformAnalysis {
    FrequencySeries beat;
    double f_rest = 0.0;
    MotionTrace trace;
};

/// Rest frequency as the mean over the reference channel's ZFM windows.
inline double measure_rest_frequency(const Waveform& reference, const AnalysisConfig& an) {
    const auto crossings = detect_zero_crossings(reference, an.hysteresis_codes(reference.adc_bits));
    const auto series = estimate_frequency_series(crossings, an.zfm_periods, an.zfm_stride);
    double sum = 0.0;
    for (double f : series.f) sum += f;
    return sum / double(series.size());
}

/// Beat waveform (plus the reference channel, or a configured f_rest) to a
/// motion trace on the window grid.
inline WaveformAnalysis analyze_waveforms(const Waveform& beat, const Waveform* reference,
                                          const RunConfig& cfg) {
    const auto& an = cfg.analysis;
    WaveformAnalysis out;
    if (an.f_rest) out.f_rest = *an.f_rest;
    else if (reference) out.f_rest = measure_rest_frequency(*reference, an);
    else throw InvalidArgument("need a reference channel or an explicit rest frequency");

    ApparatusSpec app = cfg.sim.apparatus;
    app.sample_rate = beat.sample_rate;
    app.adc_bits = beat.adc_bits;
    const auto crossings = detect_zero_crossings(beat, an.hysteresis_codes(beat.adc_bits));
    out.beat = estimate_frequency_series(crossings, an.zfm_periods, an.zfm_stride);
    out.trace = build_motion_trace(out.beat, out.f_rest, app, an.diff_halfwin);
    return out;
}

inline BudgetParams budget_params(const AnalysisConfig& an) {
    BudgetParams p;
    p.n = an.pre_n;
    p.k = an.diff_halfwin;
    return p;
}

struct RunOutputs {
    MotionTrace motion;
    Waveform beat;
    Waveform reference;
    WaveformAnalysis analysis;
    std::optional<EventAnalysis> event;
    std::optional<UncertaintyBudget> budget;
    std::string error;  // analysis failure message, empty on success
};

/// Simulation and synthesis always complete; analysis failures (no event,
/// short free flight) are reported in `error` rather than thrown.
inline RunOutputs run_pipeline(const RunConfig& cfg) {
    RunOutputs out;
    out.motion = simulate_impact(cfg.sim);
    out.beat = synthesize_beat(out.motion, cfg.sim.apparatus, cfg.noise);
    if (!cfg.analysis.f_rest)
        out.reference = synthesize_reference(cfg.sim.apparatus, cfg.sim.apparatus.capture_duration,
                                             cfg.reference_noise);
    try {
        out.analysis = analyze_waveforms(out.beat, cfg.analysis.f_rest ? nullptr : &out.reference, cfg);
        out.event = analyze_event(out.analysis.trace, cfg.sim.specimen, cfg.sim.apparatus.moving_mass,
                                  cfg.analysis.event_options());
        out.budget = evaluate_budget(out.analysis.trace, cfg.sim.apparatus, budget_params(cfg.analysis));
    } catch (const AnalysisError& e) {
        out.error = e.what();
    }
    return out;
}

/// UTC timestamp; SOURCE_DATE_EPOCH pins it for reproducible outputs.
inline std::string timestamp_now() {
    std::time_t t;
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) t = static_cast<std::time_t>(std::atoll(epoch));
    else t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

enum class RunStatus { pending, completed, failed };

inline const char* to_string(RunStatus s) {
    switch (s) {
    case RunStatus::pending: return "pending";
    case RunStatus::completed: return "completed";
    case RunStatus::failed: return "failed";
    }
    return "failed";
}

struct RunManifest {
    RunConfig config;
    std::map<std::string, std::optional<std::string>> files{
        {"motion_csv", std::nullopt}, {"beat_raw", std::nullopt}, {"reference_raw", std::nullopt},
        {"trace_csv", std::nullopt}, {"summary_json", std::nullopt}};
    RunStatus status = RunStatus::pending;
    std::string error;
    ErrorKind error_kind = ErrorKind::analysis_failure;
    std::string started_at, finished_at;
};

inline nlohmann::json to_json(const RunManifest& m) {
    nlohmann::json files = nlohmann::json::object();
    for (const auto& [k, v] : m.files) files[k] = v ? nlohmann::json(*v) : nlohmann::json(nullptr);
    return {{"config", to_json(m.config)}, {"config_hash", config_hash(m.config)},
            {"files", files}, {"status", to_string(m.status)}, {"error", m.error},
            {"timestamps", {{"started", m.started_at}, {"finished", m.finished_at}}}};
}

inline RunManifest read_run_manifest(const std::filesystem::path& path) {
    RunManifest m;
    try {
        const auto j = nlohmann::json::parse(io::read_text(path));
        m.config = run_config_from_json(j.at("config"));
        for (const auto& [k, v] : j.at("files").items())
            m.files[k] = v.is_null() ? std::nullopt : std::optional<std::string>(v.get<std::string>());
        const auto s = j.at("status").get<std::string>();
        m.status = s == "completed" ? RunStatus::completed : s == "failed" ? RunStatus::failed : RunStatus::pending;
        m.error = j.value("error", std::string{});
        m.started_at = j.at("timestamps").value("started", std::string{});
        m.finished_at = j.at("timestamps").value("finished", std::string{});
    } catch (const nlohmann::json::exception& e) {
        throw IoError("bad run manifest '" + path.string() + "': " + e.what());
    }
    return m;
}

/// Figure data for one event, between the origin and the release point.
inline void write_event_figures(const std::filesystem::path& dir, const EventAnalysis& ev) {
    const auto& tr = ev.trace;
    const auto& ss = ev.stress_strain;
    const auto U = strain_energy(ss);
    const std::size_t b = ev.origin.index, e = ev.release_index + 1;
    auto cut = [&](const std::vector<double>& v) {
        return std::vector<double>(v.begin() + long(b), v.begin() + long(e));
    };
    io::write_csv(dir / "fig4a_x_v.csv", {{"x_m", "v_mps"}, {cut(tr.x), cut(tr.v)}});
    io::write_csv(dir / "fig4b_strain_strain_rate.csv",
                  {{"strain", "strain_rate_per_s"}, {cut(ss.strain), cut(ss.strain_rate)}});
    io::write_csv(dir / "fig4c_x_F.csv", {{"x_m", "F_N"}, {cut(tr.x), cut(tr.F)}});
    io::write_csv(dir / "fig4d_strain_stress.csv", {{"strain", "stress_pa"}, {cut(ss.strain), cut(ss.stress)}});
    io::write_csv(dir / "fig4e_v_F.csv", {{"v_mps", "F_N"}, {cut(tr.v), cut(tr.F)}});
    io::write_csv(dir / "fig4f_strain_rate_stress.csv",
                  {{"strain_rate_per_s", "stress_pa"}, {cut(ss.strain_rate), cut(ss.stress)}});
    io::write_csv(dir / "fig5_strain_energy.csv", {{"strain", "U_J"}, {cut(ss.strain), cut(U)}});
}

/// Analysis products of one trace: trace, summary, budget and figures.
inline void write_analysis_outputs(const std::filesystem::path& dir, const WaveformAnalysis& an,
                                   const std::optional<EventAnalysis>& ev,
                                   const std::optional<UncertaintyBudget>& budget) {
    io::write_frequency_csv(dir / "frequency.csv", an.beat);
    io::write_motion_csv(dir / "trace.csv", an.trace);
    if (ev) {
        io::write_text(dir / "summary.json", io::to_json(ev->summary).dump(2) + "\n");
        write_event_figures(dir / "figures", *ev);
    }
    if (budget) {
        io::write_text(dir / "budget.json", io::to_json(*budget).dump(2) + "\n");
        io::write_text(dir / "budget.txt", io::budget_table(*budget));
    }
}

struct WriteOptions {
    bool write_raw = true;
    bool write_motion = true;
};

/// Runs the pipeline and writes its directory. Never throws for analysis
/// failures; those land in the manifest with status "failed".
inline RunManifest execute_run(const std::filesystem::path& dir, const RunConfig& cfg,
                               const WriteOptions& w = {}) {
    RunManifest m;
    m.config = cfg;
    m.started_at = timestamp_now();
    std::filesystem::create_directories(dir);
    const auto hash = config_hash(cfg);
    try {
        const auto out = run_pipeline(cfg);
        if (w.write_motion) {
            io::write_motion_csv(dir / "motion.csv", out.motion);
            m.files["motion_csv"] = "motion.csv";
        }
        if (w.write_raw) {
            io::write_waveform(dir / "beat.raw", out.beat, hash);
            m.files["beat_raw"] = "beat.raw";
            if (!out.reference.codes.empty()) {
                io::write_waveform(dir / "reference.raw", out.reference, hash);
                m.files["reference_raw"] = "reference.raw";
            }
        }
        if (out.error.empty()) {
            write_analysis_outputs(dir, out.analysis, out.event, out.budget);
            m.files["trace_csv"] = "trace.csv";
            m.files["summary_json"] = "summary.json";
            m.status = RunStatus::completed;
        } else {
            if (!out.analysis.trace.empty()) {
                io::write_motion_csv(dir / "trace.csv", out.analysis.trace);
                m.files["trace_csv"] = "trace.csv";
            }
            m.status = RunStatus::failed;
            m.error = out.error;
        }
    } catch (const Error& e) {
        m.status = RunStatus::failed;
        m.error = e.what();
        m.error_kind = e.kind();
    }
    m.finished_at = timestamp_now();
    io::write_text(dir / "manifest.json", to_json(m).dump(2) + "\n");
    return m;
}

} // namespace lmm
