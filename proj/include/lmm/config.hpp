#pragma once

// Run and campaign configuration with its JSON manifest codec. Every key is
// optional; missing keys keep the defaults below.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lmm/dynamics.hpp"
#include "lmm/event_analysis.hpp"
#include "lmm/io/format.hpp"
#include "lmm/kinematics.hpp"
#include "lmm/signal_synth.hpp"
#include "lmm/zfm.hpp"

namespace lmm {

struct AnalysisConfig {
    int zfm_periods = 2000;
    int zfm_stride = 0;                        // 0: non-overlapping windows
    int diff_halfwin = default_diff_halfwin;
    int hysteresis = default_hysteresis;       // in 8-bit code units
    std::size_t pre_n = 20;
    OriginMethod origin_method = OriginMethod::linear_extrapolation;
    double noise_floor = 5e-3;                 // N
    std::optional<double> f_rest;              // skip the reference channel when set

    /// Schmitt threshold rescaled to the record's converter width.
    int hysteresis_codes(int adc_bits) const {
        const double scale = double((1 << (adc_bits - 1)) - 1) / 127.0;
        return static_cast<int>(std::lround(hysteresis * scale));
    }

    EventOptions event_options() const {
        EventOptions e;
        e.pre_n = pre_n;
        e.origin.method = origin_method;
        e.origin.noise_floor = noise_floor;
        return e;
    }
};

struct RunConfig {
    SimConfig sim;
    NoiseModel noise;
    NoiseModel reference_noise;
    AnalysisConfig analysis;

    RunConfig() {
        sim.duration = sim.apparatus.capture_duration;
        sim.slack_gap = sim.v0 * 0.05;
        reference_noise.rng_seed = 2;
    }
};

struct CampaignConfig {
    RunConfig base;
    std::vector<double> v0_schedule;
    std::uint64_t seed = 20230901;
    double pretrigger = 0.05;   // s of free flight before the wire goes taut
    unsigned threads = 0;       // 0: hardware concurrency
    bool write_raw = false;
    bool write_motion = false;
    std::filesystem::path output_dir;

    std::size_t n_runs() const { return v0_schedule.size(); }
};

/// Initial velocities linearly spaced so the peak force runs over roughly
/// 2.4 N to 16.3 N with the default wire and mass.
inline std::vector<double> default_v0_schedule(std::size_t n, double lo = 8.2e-3, double hi = 5.57e-2) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = n == 1 ? lo : lo + (hi - lo) * double(i) / double(n - 1);
    return v;
}

inline const char* to_string(OriginMethod m) {
    return m == OriginMethod::threshold ? "threshold" : "linear_extrapolation";
}

inline OriginMethod origin_method_from_string(const std::string& s) {
    if (s == "threshold") return OriginMethod::threshold;
    if (s == "linear_extrapolation") return OriginMethod::linear_extrapolation;
    throw InvalidArgument("unknown origin_method '" + s + "'");
}

namespace detail {

template <typename T>
void read_opt(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace detail

inline nlohmann::json to_json(const NoiseModel& n) {
    return {{"additive_sigma", n.additive_sigma}, {"amplitude", n.amplitude},
            {"phase0_rad", n.phase0}, {"rng_seed", n.rng_seed},
            {"velocity_jitter_mps", n.velocity_jitter}};
}

inline void from_json(const nlohmann::json& j, NoiseModel& n) {
    detail::read_opt(j, "additive_sigma", n.additive_sigma);
    detail::read_opt(j, "amplitude", n.amplitude);
    detail::read_opt(j, "phase0_rad", n.phase0);
    detail::read_opt(j, "rng_seed", n.rng_seed);
    detail::read_opt(j, "velocity_jitter_mps", n.velocity_jitter);
}

inline nlohmann::json to_json(const RunConfig& c) {
    const auto& s = c.sim;
    const auto& a = s.apparatus;
    nlohmann::json j;
    j["specimen"] = {{"diameter_m", s.specimen.diameter},
                     {"natural_length_m", s.specimen.natural_length},
                     {"label", s.specimen.label}};
    j["apparatus"] = {{"moving_mass_kg", a.moving_mass}, {"wavelength_air_m", a.wavelength_air},
                      {"f_rest_hz", a.f_rest}, {"bearing_coefficient_n_s_per_m", a.bearing_coefficient},
                      {"sample_rate_hz", a.sample_rate}, {"adc_bits", a.adc_bits},
                      {"capture_duration_s", a.capture_duration}, {"zfm_periods", a.zfm_periods}};
    j["material"] = {{"c_pa", s.material.c}, {"e_pa", s.material.E}, {"eta_pa_s", s.material.eta}};
    j["simulation"] = {{"v0_mps", s.v0}, {"slack_gap_m", s.slack_gap}, {"dt_s", s.dt},
                       {"duration_s", s.duration}, {"rng_seed", s.rng_seed}};
    j["noise"] = to_json(c.noise);
    j["reference_noise"] = to_json(c.reference_noise);
    const auto& an = c.analysis;
    j["analysis"] = {{"zfm_periods", an.zfm_periods}, {"zfm_stride", an.zfm_stride},
                     {"diff_halfwin", an.diff_halfwin}, {"hysteresis", an.hysteresis},
                     {"pre_n", an.pre_n}, {"origin_method", to_string(an.origin_method)},
                     {"noise_floor_n", an.noise_floor}};
    j["analysis"]["f_rest_hz"] = an.f_rest ? nlohmann::json(*an.f_rest) : nlohmann::json(nullptr);
    return j;
}

inline RunConfig run_config_from_json(const nlohmann::json& j) {
    RunConfig c;
    try {
        auto& s = c.sim;
        auto& a = s.apparatus;
        if (j.contains("specimen")) {
            const auto& p = j.at("specimen");
            detail::read_opt(p, "diameter_m", s.specimen.diameter);
            detail::read_opt(p, "natural_length_m", s.specimen.natural_length);
            detail::read_opt(p, "label", s.specimen.label);
        }
        if (j.contains("apparatus")) {
            const auto& p = j.at("apparatus");
            detail::read_opt(p, "moving_mass_kg", a.moving_mass);
            detail::read_opt(p, "wavelength_air_m", a.wavelength_air);
            detail::read_opt(p, "f_rest_hz", a.f_rest);
            detail::read_opt(p, "bearing_coefficient_n_s_per_m", a.bearing_coefficient);
            detail::read_opt(p, "sample_rate_hz", a.sample_rate);
            detail::read_opt(p, "adc_bits", a.adc_bits);
            detail::read_opt(p, "capture_duration_s", a.capture_duration);
            detail::read_opt(p, "zfm_periods", a.zfm_periods);
            c.analysis.zfm_periods = a.zfm_periods;
        }
        if (j.contains("material")) {
            const auto& p = j.at("material");
            detail::read_opt(p, "c_pa", s.material.c);
            detail::read_opt(p, "e_pa", s.material.E);
            detail::read_opt(p, "eta_pa_s", s.material.eta);
        }
        s.duration = a.capture_duration;
        bool gap_given = false;
        if (j.contains("simulation")) {
            const auto& p = j.at("simulation");
            detail::read_opt(p, "v0_mps", s.v0);
            gap_given = p.contains("slack_gap_m");
            detail::read_opt(p, "slack_gap_m", s.slack_gap);
            detail::read_opt(p, "dt_s", s.dt);
            detail::read_opt(p, "duration_s", s.duration);
            detail::read_opt(p, "rng_seed", s.rng_seed);
        }
        if (!gap_given) s.slack_gap = s.v0 * 0.05;
        if (j.contains("noise")) from_json(j.at("noise"), c.noise);
        if (j.contains("reference_noise")) from_json(j.at("reference_noise"), c.reference_noise);
        if (j.contains("analysis")) {
            const auto& p = j.at("analysis");
            auto& an = c.analysis;
            detail::read_opt(p, "zfm_periods", an.zfm_periods);
            detail::read_opt(p, "zfm_stride", an.zfm_stride);
            detail::read_opt(p, "diff_halfwin", an.diff_halfwin);
            detail::read_opt(p, "hysteresis", an.hysteresis);
            detail::read_opt(p, "pre_n", an.pre_n);
            detail::read_opt(p, "noise_floor_n", an.noise_floor);
            if (p.contains("origin_method"))
                an.origin_method = origin_method_from_string(p.at("origin_method").get<std::string>());
            if (p.contains("f_rest_hz") && !p.at("f_rest_hz").is_null())
                an.f_rest = p.at("f_rest_hz").get<double>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("invalid config: ") + e.what());
    }
    c.sim.validate();
    c.noise.validate();
    c.reference_noise.validate();
    detail::require(c.analysis.zfm_periods > 0, "analysis.zfm_periods must be positive");
    detail::require(c.analysis.diff_halfwin >= 1, "analysis.diff_halfwin must be >= 1");
    detail::require(c.analysis.pre_n >= 2, "analysis.pre_n must be >= 2");
    return c;
}

inline nlohmann::json to_json(const CampaignConfig& c) {
    auto j = to_json(c.base);
    j["campaign"] = {{"n_runs", c.v0_schedule.size()}, {"v0_schedule_mps", c.v0_schedule},
                     {"seed", c.seed}, {"pretrigger_s", c.pretrigger}, {"threads", c.threads},
                     {"write_raw", c.write_raw}, {"write_motion", c.write_motion}};
    return j;
}

inline CampaignConfig campaign_config_from_json(const nlohmann::json& j) {
    CampaignConfig c;
    c.base = run_config_from_json(j);
    std::size_t n_runs = 30;
    bool have_n = false;
    try {
        if (j.contains("campaign")) {
            const auto& p = j.at("campaign");
            have_n = p.contains("n_runs");
            detail::read_opt(p, "n_runs", n_runs);
            detail::read_opt(p, "v0_schedule_mps", c.v0_schedule);
            detail::read_opt(p, "seed", c.seed);
            detail::read_opt(p, "pretrigger_s", c.pretrigger);
            detail::read_opt(p, "threads", c.threads);
            detail::read_opt(p, "write_raw", c.write_raw);
            detail::read_opt(p, "write_motion", c.write_motion);
        }
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("invalid campaign config: ") + e.what());
    }
    if (c.v0_schedule.empty()) {
        c.v0_schedule = default_v0_schedule(n_runs);
    } else if (have_n && n_runs != c.v0_schedule.size()) {
        throw InvalidArgument("campaign.n_runs does not match the v0 schedule length");
    }
    for (double v : c.v0_schedule) detail::require(v > 0.0, "campaign v0 values must be positive");
    detail::require(c.pretrigger > 0.0, "campaign.pretrigger_s must be positive");
    return c;
}

inline std::string config_hash(const RunConfig& c) { return io::fnv1a_hex(to_json(c).dump()); }

/// Configuration of run `index` in a campaign; seeds derive from the
/// campaign seed so every run is reproducible on its own.
inline RunConfig campaign_run_config(const CampaignConfig& c, std::size_t index) {
    RunConfig r = c.base;
    r.sim.v0 = c.v0_schedule.at(index);
    r.sim.slack_gap = r.sim.v0 * c.pretrigger;
    r.sim.rng_seed = detail::splitmix64(c.seed + 3 * index);
    r.noise.rng_seed = detail::splitmix64(c.seed + 3 * index + 1);
    r.reference_noise.rng_seed = detail::splitmix64(c.seed + 3 * index + 2);
    return r;
}

} // namespace lmm
