#pragma once

// JSON renderings of the analysis results and the budget table.

#include <cstdio>
#include <string>

#include <json.hpp>

#include "lmm/event_analysis.hpp"
#include "lmm/kv_fit.hpp"
#include "lmm/uncertainty.hpp"

namespace lmm::io {

inline nlohmann::json to_json(const EventSummary& s) {
    return {{"F_max", s.F_max},       {"x_max", s.x_max},
            {"t_Fmax", s.t_Fmax},     {"T_FWHM", s.T_FWHM},
            {"v1", s.v1},             {"v2", s.v2},
            {"delta_KE", s.delta_KE}, {"work", s.work},
            {"U_max", s.U_max},       {"spring_constant", s.spring_constant},
            {"Strain_max", s.Strain_max}, {"Stress_max", s.Stress_max}};
}

inline EventSummary summary_from_json(const nlohmann::json& j) {
    EventSummary s;
    s.F_max = j.at("F_max").get<double>();
    s.x_max = j.at("x_max").get<double>();
    s.t_Fmax = j.at("t_Fmax").get<double>();
    s.T_FWHM = j.at("T_FWHM").get<double>();
    s.v1 = j.at("v1").get<double>();
    s.v2 = j.at("v2").get<double>();
    s.delta_KE = j.at("delta_KE").get<double>();
    s.work = j.at("work").get<double>();
    s.U_max = j.at("U_max").get<double>();
    s.spring_constant = j.at("spring_constant").get<double>();
    s.Strain_max = j.at("Strain_max").get<double>();
    s.Stress_max = j.at("Stress_max").get<double>();
    return s;
}

inline nlohmann::json to_json(const KVFit& f) {
    return {{"c_pa", f.c}, {"e_pa", f.E}, {"eta_pa_s", f.eta}, {"r_squared", f.r_squared},
            {"n_samples", f.n_samples}, {"residual_rms_pa", f.residual_rms}};
}

inline KVFit kv_fit_from_json(const nlohmann::json& j) {
    KVFit f;
    f.c = j.at("c_pa").get<double>();
    f.E = j.at("e_pa").get<double>();
    f.eta = j.at("eta_pa_s").get<double>();
    f.r_squared = j.at("r_squared").get<double>();
    f.n_samples = j.at("n_samples").get<std::size_t>();
    f.residual_rms = j.at("residual_rms_pa").get<double>();
    return f;
}

inline nlohmann::json to_json(const UncertaintyBudget& b) {
    return {
        {"u1_vibration", {{"sigma_v_pre", b.u1_vibration.sigma_v_pre},
                          {"sigma_v_post", b.u1_vibration.sigma_v_post},
                          {"sigma_a", b.u1_vibration.sigma_a},
                          {"sigma_F", b.u1_vibration.sigma_F}}},
        {"u2_mass", {{"delta_m", b.u2_mass.delta_m}, {"delta_F_at_Fmax", b.u2_mass.delta_F_at_Fmax}}},
        {"u3_alignment", {{"theta", b.u3_alignment.theta},
                          {"relative_v_error", b.u3_alignment.relative_v_error}}},
        {"u4_frequency", {{"delta_f", b.u4_frequency.delta_f}, {"delta_v", b.u4_frequency.delta_v},
                          {"delta_F", b.u4_frequency.delta_F}}},
        {"u5_friction", {{"F_af_at_vref", b.u5_friction.F_af_at_vref}}},
        {"F_max_abs", b.F_max_abs},
        {"combined_sigma_F", b.combined_sigma_F},
        {"combined_relative", b.combined_relative},
        {"dominant_sigma_F", b.dominant_sigma_F}};
}

/// Plain-text table: one row per item with its share of the combined variance.
inline std::string budget_table(const UncertaintyBudget& b) {
    const double var = b.combined_sigma_F * b.combined_sigma_F;
    auto share = [&](double f) { return var > 0.0 ? 100.0 * f * f / var : 0.0; };
    std::string out = "item  quantity                 value         unit   % of combined\n";
    char line[160];
    auto row = [&](const char* item, const char* what, double value, const char* unit, double pct) {
        if (pct >= 0.0)
            std::snprintf(line, sizeof line, "%-5s %-24s %-13.4e %-6s %6.2f\n", item, what, value, unit, pct);
        else
            std::snprintf(line, sizeof line, "%-5s %-24s %-13.4e %-6s %6s\n", item, what, value, unit, "-");
        out += line;
    };
    row("U1", "vibration sigma_F", b.u1_vibration.sigma_F, "N", share(b.u1_vibration.sigma_F));
    row("U2", "mass calibration dF", b.u2_mass.delta_F_at_Fmax, "N", share(b.u2_mass.delta_F_at_Fmax));
    row("U3", "alignment rel. v error", b.u3_alignment.relative_v_error, "1", -1.0);
    row("U4", "frequency stability dF", b.u4_frequency.delta_F, "N", share(b.u4_frequency.delta_F));
    row("U5", "bearing friction F_af", b.u5_friction.F_af_at_vref, "N", share(b.u5_friction.F_af_at_vref));
    std::snprintf(line, sizeof line, "combined %.4e N (%.3f%% of |F_max| = %.4f N)\n",
                  b.combined_sigma_F, 100.0 * b.combined_relative, b.F_max_abs);
    out += line;
    return out;
}

} // namespace lmm::io
