#include <gtest/gtest.h>

#include <algorithm>

#include "support.hpp"

using namespace lmm;
using lmm::testing::nominal_sim;

namespace {

struct Deviation {
    double x = 0, v = 0;
};

Deviation max_deviation(const MotionTrace& num, const MotionTrace& ref) {
    Deviation d;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        d.x = std::max(d.x, std::abs(num.x[i] - ref.x[i]));
        d.v = std::max(d.v, std::abs(num.v[i] - ref.v[i]));
    }
    return d;
}

} // namespace

TEST(ContactForce, NominalStrain) {
    SpecimenSpec s;
    MaterialKV m;
    EXPECT_NEAR(contact_force(0.4283e-3, 0.0, m, s), -12.64, 0.01);
}

TEST(ContactForce, SlackAndUnloaded) {
    SpecimenSpec s;
    MaterialKV m;
    EXPECT_EQ(contact_force(-0.001, 0.3, m, s), 0.0);
    EXPECT_EQ(contact_force(-0.001, -0.3, m, s), 0.0);
    EXPECT_EQ(contact_force(0.0, 0.0, m, s), 0.0);
}

TEST(ContactForce, NeverCompressive) {
    SpecimenSpec s;
    MaterialKV m;
    // Fast retraction at small stretch: the dashpot would push.
    EXPECT_EQ(contact_force(1e-9, -10.0, m, s), 0.0);
    for (double x : {1e-6, 1e-4, 1e-3})
        for (double v : {-1.0, -0.05, 0.0, 0.05})
            EXPECT_LE(contact_force(x, v, m, s), 0.0);
}

TEST(LumpedWire, NominalMagnitudes) {
    const auto w = lumped_wire(MaterialKV{}, SpecimenSpec{});
    EXPECT_NEAR(w.k, 2.952e4, 5.0);
    EXPECT_NEAR(w.b, 1.910, 1e-3);
    const double zeta = w.b / (2.0 * std::sqrt(2.897 * w.k));
    // Ledgered: the damping ratio of these parameters is 3.27e-3.
    EXPECT_NEAR(zeta, 3.27e-3, 0.01e-3);
}

TEST(Simulate, ContactDuration) {
    const auto tr = simulate_impact(nominal_sim());
    std::size_t first = 0, last = 0;
    for (std::size_t i = 0; i < tr.size(); ++i)
        if (tr.F[i] < 0) {
            if (!first) first = i;
            last = i;
        }
    const double T = (last - first + 1) * 1e-6;
    const double oracle = std::numbers::pi / std::sqrt(lumped_wire(MaterialKV{}, SpecimenSpec{}).k / 2.897);
    EXPECT_NEAR(oracle, 31.1e-3, 0.05e-3);
    // Damped release comes slightly before the undamped half period.
    EXPECT_NEAR(T, oracle, 0.2e-3);
    EXPECT_LT(T, oracle);
}

TEST(Simulate, RestStaysAtRest) {
    auto c = nominal_sim(0.0);
    const auto tr = simulate_impact(c);
    for (std::size_t i = 0; i < tr.size(); ++i) {
        ASSERT_EQ(tr.x[i], 0.0);
        ASSERT_EQ(tr.F[i], 0.0);
    }
}

TEST(Simulate, PureSpringExitSpeed) {
    auto c = nominal_sim();
    c.material.eta = 0.0;
    const auto tr = simulate_impact(c);
    EXPECT_NEAR(tr.v.back() / -c.v0, 1.0, 1e-6);
}

TEST(Simulate, EnergyConservedWithoutViscosity) {
    auto c = nominal_sim();
    c.material.eta = 0.0;
    c.slack_gap = 2e-4;
    const auto tr = simulate_impact(c);
    const double k = lumped_wire(c.material, c.specimen).k;
    const double e0 = 0.5 * c.apparatus.moving_mass * c.v0 * c.v0;
    double worst = 0.0;
    for (std::size_t i = 0; i < tr.size(); ++i) {
        const double s = std::max(tr.x[i] - c.slack_gap, 0.0);
        const double e = 0.5 * c.apparatus.moving_mass * tr.v[i] * tr.v[i] + 0.5 * k * s * s;
        worst = std::max(worst, std::abs(e - e0) / e0);
    }
    EXPECT_LT(worst, 1e-6);
}

TEST(Simulate, TraceShapeAndLaw) {
    const auto c = nominal_sim();
    const auto tr = simulate_impact(c);
    ASSERT_TRUE(tr.aligned());
    EXPECT_TRUE(tr.uniform());
    EXPECT_EQ(tr.size(), std::size_t(60001));
    for (std::size_t i = 0; i < tr.size(); ++i) {
        ASSERT_EQ(tr.F[i], c.apparatus.moving_mass * tr.a[i]);
        if (tr.x[i] > c.slack_gap) ASSERT_LE(tr.F[i], 0.0);
    }
}

TEST(Simulate, UnstableStepRejected) {
    auto c = nominal_sim();
    c.dt = 2e-4;
    EXPECT_THROW(simulate_impact(c), InvalidArgument);
}

TEST(Simulate, InvalidConfigRejected) {
    auto c = nominal_sim();
    c.dt = 0.0;
    EXPECT_THROW(simulate_impact(c), InvalidArgument);
    c = nominal_sim();
    c.slack_gap = -1e-3;
    EXPECT_THROW(simulate_impact(c), InvalidArgument);
    c = nominal_sim();
    c.duration = 0.0;
    EXPECT_THROW(simulate_impact(c), InvalidArgument);
}

TEST(Analytic, PeakDisplacement) {
    const auto tr = analytic_contact_trace(nominal_sim());
    const double xmax = *std::max_element(tr.x.begin(), tr.x.end());
    EXPECT_NEAR(xmax, 0.414e-3, 0.003e-3);
}

TEST(Analytic, UndampedClosedForm) {
    auto c = nominal_sim();
    c.material.eta = 0.0;
    const auto tr = analytic_contact_trace(c);
    const double w = std::sqrt(lumped_wire(c.material, c.specimen).k / c.apparatus.moving_mass);
    for (std::size_t i = 0; i < tr.size(); i += 97)
        EXPECT_NEAR(tr.x[i], c.v0 / w * std::sin(w * tr.t[i]), 1e-15);
}

TEST(Analytic, OverdampedRejected) {
    auto c = nominal_sim();
    c.material.eta = -1e13;
    EXPECT_THROW(analytic_contact_trace(c), InvalidArgument);
}

TEST(Analytic, SlackGapShiftsContact) {
    auto c = nominal_sim();
    c.slack_gap = 1e-4;
    const auto tr = analytic_contact_trace(c);
    const auto i_touch = static_cast<std::size_t>(c.slack_gap / c.v0 / c.dt);
    EXPECT_EQ(tr.F[i_touch - 1], 0.0);
    EXPECT_LT(tr.F[i_touch + 2], 0.0);
}

TEST(Oracle, RK4MatchesClosedForm) {
    const auto c = nominal_sim();
    const auto d = max_deviation(simulate_impact(c), analytic_contact_trace(c));
    EXPECT_LT(d.x, 1e-9);
    EXPECT_LT(d.v, 1e-7);
}

TEST(Oracle, RK4MatchesClosedFormWithSlack) {
    auto c = nominal_sim();
    c.slack_gap = 3.3e-4;  // taut instant off the grid
    const auto d = max_deviation(simulate_impact(c), analytic_contact_trace(c));
    EXPECT_LT(d.x, 1e-9);
    EXPECT_LT(d.v, 1e-7);
}

TEST(Oracle, FourthOrderConvergence) {
    // Large steps so truncation error dominates roundoff.
    auto c = nominal_sim();
    c.dt = 8e-5;
    c.duration = 0.02;
    const double e1 = max_deviation(simulate_impact(c), analytic_contact_trace(c)).x;
    c.dt = 4e-5;
    const double e2 = max_deviation(simulate_impact(c), analytic_contact_trace(c)).x;
    EXPECT_GE(e1 / e2, 8.0);
}
