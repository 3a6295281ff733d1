#pragma once

// Domain types shared by the simulator and the analysis chain.
//
// Sign convention: the lab axis points along the initial velocity of the
// moving mass. Once the wire is taut the displacement is positive and the
// tension decelerates the mass, so acceleration, force on the mass and
// stress are negative while loading. All quantities are strict SI.

#include <cmath>
#include <numbers>
#include <string>

#include "lmm/error.hpp"

namespace lmm {

struct SpecimenSpec {
    double diameter = 1.0e-4;       // m
    double natural_length = 0.1;    // m
    std::string label = "W-0.1mm";

    void validate() const {
        detail::require(std::isfinite(diameter) && diameter > 0.0,
                        "specimen diameter must be positive");
        detail::require(std::isfinite(natural_length) && natural_length > 0.0,
                        "specimen natural length must be positive");
    }
};

struct ApparatusSpec {
    double moving_mass = 2.897;           // kg
    double wavelength_air = 632.8e-9;     // m
    double f_rest = 3.13e6;               // Hz
    double bearing_coefficient = 8.0e-2;  // N s/m
    double sample_rate = 30.0e6;          // samples/s
    int adc_bits = 8;
    double capture_duration = 0.5;        // s
    int zfm_periods = 2000;

    void validate() const {
        detail::require(moving_mass > 0.0, "moving mass must be positive");
        detail::require(wavelength_air > 0.0, "wavelength must be positive");
        detail::require(f_rest > 0.0, "rest frequency must be positive");
        detail::require(bearing_coefficient > 0.0, "bearing coefficient must be positive");
        detail::require(sample_rate > 0.0, "sample rate must be positive");
        detail::require(adc_bits >= 2 && adc_bits <= 16, "adc_bits must be in [2, 16]");
        detail::require(capture_duration > 0.0, "capture duration must be positive");
        detail::require(zfm_periods > 0, "zfm_periods must be positive");
        detail::require(sample_rate > 4.0 * f_rest,
                        "sample rate must exceed four times the rest frequency");
    }

    /// Nominal ZFM window length at the rest frequency.
    double nominal_window() const { return zfm_periods / f_rest; }
};

/// Kelvin-Voigt coefficients, stress = c + E*strain + eta*strain_rate.
/// With the sign convention above E and eta are negative for a real wire.
struct MaterialKV {
    double c = 0.0;        // Pa
    double E = -3.758e11;  // Pa
    double eta = -2.432e7; // Pa s
};

inline double cross_section_area(const SpecimenSpec& specimen) {
    specimen.validate();
    return std::numbers::pi * specimen.diameter * specimen.diameter / 4.0;
}

inline double wire_volume(const SpecimenSpec& specimen) {
    return cross_section_area(specimen) * specimen.natural_length;
}

} // namespace lmm
