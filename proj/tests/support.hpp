#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "lmm/lmm.hpp"

namespace lmm::testing {

inline SimConfig nominal_sim(double v0 = 4.18e-2, double duration = 0.06) {
    SimConfig c;
    c.v0 = v0;
    c.duration = duration;
    return c;
}

/// Short noise-free run: 0.1 s capture with 20 ms of free flight before the
/// wire goes taut.
inline RunConfig short_run(double v0 = 4.18e-2, double sigma = 0.0) {
    RunConfig c;
    c.sim.v0 = v0;
    c.sim.apparatus.capture_duration = 0.1;
    c.sim.duration = 0.1;
    c.sim.slack_gap = v0 * 0.02;
    c.noise.additive_sigma = sigma;
    c.reference_noise.additive_sigma = sigma;
    return c;
}

inline std::filesystem::path temp_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("lmm_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

} // namespace lmm::testing
