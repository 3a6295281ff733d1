#pragma once

// Zero-crossing fitting: rising zero crossings of the digitized tone are
// located by linear interpolation, grouped into windows of N periods, and
// the period is the least-squares slope of crossing time against index.

#include <cmath>
#include <cstddef>
#include <vector>

#include "lmm/signal_synth.hpp"

namespace lmm {

struct CrossingList {
    std::vector<double> times;  // s, relative to the first sample
    bool rising_only = true;

    std::size_t size() const { return times.size(); }
};

struct FrequencySeries {
    std::vector<double> t_mid;  // s
    std::vector<double> f;      // Hz
    int window_periods = 2000;
    int window_stride = 2000;   // crossings between window starts

    std::size_t size() const { return f.size(); }
};

/// Default Schmitt threshold in code units for 8-bit records.
inline constexpr int default_hysteresis = 8;

/// Rising crossings with a Schmitt trigger: the detector arms once a sample
/// is at or below -hysteresis and fires on the next positive sample. The
/// crossing instant interpolates between that sample and its predecessor.
inline CrossingList detect_zero_crossings(const Waveform& w, int hysteresis = default_hysteresis) {
    CrossingList out;
    const auto& c = w.codes;
    if (c.empty()) return out;
    const double inv_rate = 1.0 / w.sample_rate;
    out.times.reserve(c.size() / 8);
    bool armed = c[0] <= -hysteresis;
    for (std::size_t i = 1; i < c.size(); ++i) {
        const int s = c[i];
        if (armed) {
            if (s > 0) {
                const double prev = c[i - 1];
                const double frac = -prev / (double(s) - prev);
                out.times.push_back((double(i - 1) + frac) * inv_rate);
                armed = s <= -hysteresis;
            }
        } else if (s <= -hysteresis) {
            armed = true;
        }
    }
    return out;
}

/// Window fits over groups of N+1 crossings. Consecutive windows share their
/// boundary crossing; `stride` (default N) sets the crossing offset between
/// window starts, so stride < N gives overlapping windows.
inline FrequencySeries estimate_frequency_series(const CrossingList& crossings, int periods,
                                                 int stride = 0) {
    detail::require(periods > 0, "window periods must be positive");
    if (stride <= 0) stride = periods;
    const auto N = static_cast<std::size_t>(periods);
    const auto& t = crossings.times;
    if (t.size() < N + 1) throw AnalysisError("insufficient crossings for one ZFM window");

    FrequencySeries out;
    out.window_periods = periods;
    out.window_stride = stride;
    const double kbar = 0.5 * double(N);
    double skk = 0.0;
    for (std::size_t k = 0; k <= N; ++k) skk += (double(k) - kbar) * (double(k) - kbar);

    for (std::size_t start = 0; start + N < t.size(); start += static_cast<std::size_t>(stride)) {
        const double origin = t[start];
        double mean = 0.0;
        for (std::size_t k = 0; k <= N; ++k) mean += t[start + k] - origin;
        mean /= double(N + 1);
        double skt = 0.0;
        for (std::size_t k = 0; k <= N; ++k)
            skt += (double(k) - kbar) * (t[start + k] - origin - mean);
        const double period = skt / skk;
        out.f.push_back(1.0 / period);
        // The fitted line passes through (kbar, mean), i.e. alpha + beta N/2.
        out.t_mid.push_back(origin + mean);
    }
    return out;
}

} // namespace lmm
