#include "wpt/circuit.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

namespace wpt {
namespace {

const CircuitParams kDefaults{};

double w0() { return oracle::omega0(20e-6, 240.7e-9); }

TEST(TankReactance, VanishesAtResonance) {
    EXPECT_NEAR(tank_reactance(20e-6, 240.7e-9, 455769.0), 0.0, 1e-3);
    EXPECT_NEAR(tank_reactance(20e-6, 240.7e-9, w0()), 0.0, 1e-12);
}

TEST(TankReactance, InductiveAbove80kHz) {
    // w L - 1/(w C) at 80 kHz, by hand: 10.0531 - 8.2652
    EXPECT_NEAR(tank_reactance(20e-6, 240.7e-9, kTwoPi * 80000.0), 1.788, 1e-3);
}

TEST(TankReactance, AntisymmetricAboutResonance) {
    for (double r : {1.01, 1.3, 2.0, 7.5}) {
        EXPECT_NEAR(tank_reactance(20e-6, 240.7e-9, w0() * r), -tank_reactance(20e-6, 240.7e-9, w0() / r), 1e-9);
    }
}

TEST(TankReactance, RejectsNonPositiveOmega) {
    EXPECT_THROW(tank_reactance(20e-6, 240.7e-9, 0.0), DomainError);
    EXPECT_THROW(tank_reactance(20e-6, 240.7e-9, -1.0), DomainError);
}

TEST(ResonantFrequency, DefaultTank) {
    EXPECT_NEAR(resonant_frequency(20e-6, 240.7e-9), 72540.0, 5.0);
    EXPECT_NEAR(resonant_frequency(20e-6, 240.7e-9), w0() / kTwoPi, 1e-9);
}

TEST(ResonantFrequency, DependsOnlyOnProduct) {
    const double f = resonant_frequency(20e-6, 240.7e-9);
    for (double u : {0.1, 3.0, 17.0}) {
        EXPECT_NEAR(resonant_frequency(20e-6 * u * u, 240.7e-9 / (u * u)), f, 1e-9 * f);
    }
    EXPECT_NEAR(resonant_frequency(20e-6, 4 * 240.7e-9), f / 2, 1e-9 * f);
}

TEST(MutualFromK, Examples) {
    EXPECT_DOUBLE_EQ(mutual_from_k(0.5, 20e-6, 20e-6), 10e-6);
    EXPECT_EQ(mutual_from_k(0.0, 3e-6, 9e-6), 0.0);
    EXPECT_NEAR(mutual_from_k(0.3, 10e-6, 40e-6), 6e-6, 1e-18);
    EXPECT_THROW(mutual_from_k(1.0, 20e-6, 20e-6), DomainError);
    EXPECT_THROW(mutual_from_k(-0.1, 20e-6, 20e-6), DomainError);
}

TEST(Coupling, CapAndConsistency) {
    const Coupling c = Coupling::from_k(0.4, kDefaults);
    EXPECT_DOUBLE_EQ(c.m, 0.4 * 20e-6);
    EXPECT_DOUBLE_EQ(Coupling::from_m(c.m, kDefaults).k, 0.4);
    EXPECT_NO_THROW(Coupling::from_k(0.99, kDefaults));
    EXPECT_THROW(Coupling::from_k(0.995, kDefaults), DomainError);
    EXPECT_THROW(Coupling::from_k(0.0, kDefaults), DomainError);
}

TEST(CircuitParams, Validation) {
    EXPECT_NO_THROW(kDefaults.validate());
    CircuitParams p = kDefaults;
    p.c2 = 0.0;
    EXPECT_THROW(p.validate(), DomainError);
    p = kDefaults;
    p.r_load = 6.0;
    EXPECT_THROW(p.validate(), DomainError);
}

TEST(InputImpedance, DecoupledAtResonance) {
    const Complex z = input_impedance(kDefaults, 0.0, w0());
    EXPECT_NEAR(z.real(), 5.0, 1e-12);
    EXPECT_NEAR(z.imag(), 0.0, 1e-9);
}

TEST(InputImpedance, HalfCouplingAtResonance) {
    // 5 + (w0 M)^2 / 5 with w0 M = 4.5577
    const double wm = w0() * 10e-6;
    const Complex z = input_impedance(kDefaults, 10e-6, w0());
    EXPECT_NEAR(z.real(), 9.154, 0.01);
    EXPECT_NEAR(z.real(), 5.0 + wm * wm / 5.0, 1e-12);
    EXPECT_NEAR(z.imag(), 0.0, 1e-9);
}

TEST(InputImpedance, MatchesLoopEquationsAt75kHz) {
    const double m = 0.1 * 20e-6;
    const double omega = kTwoPi * 75000.0;
    const auto [i1, i2] = oracle::loop_currents(kDefaults, m, omega);
    const Complex expected = kDefaults.v_amp / i1;
    const Complex z = input_impedance(kDefaults, m, omega);
    EXPECT_NEAR(std::abs(z - expected), 0.0, 1e-12 * std::abs(expected));
}

TEST(SolvePhasor, DecoupledLoops) {
    const double omega = kTwoPi * 70000.0;
    const PhasorSolution s = solve_phasor(kDefaults, 0.0, omega);
    EXPECT_EQ(std::abs(s.i2), 0.0);
    const Complex z1(5.0, tank_reactance(20e-6, 240.7e-9, omega));
    EXPECT_NEAR(std::abs(s.i1 - 10.0 / z1), 0.0, 1e-14);
}

TEST(SolvePhasor, HalfCouplingAtResonance) {
    const double wm = w0() * 10e-6;
    const double closed_form = wm * 10.0 / (25.0 + wm * wm);
    const PhasorSolution s = solve_phasor(kDefaults, 10e-6, w0());
    EXPECT_NEAR(std::abs(s.i2), 0.9957, 1e-3);
    EXPECT_NEAR(std::abs(s.i2), closed_form, 1e-12);
}

TEST(SolvePhasor, ResidualsOnRandomPoints) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> kd(0.01, 0.99), fd(30e3, 250e3);
    const Complex j(0.0, 1.0);
    for (int n = 0; n < 100; ++n) {
        const double m = kd(rng) * 20e-6;
        const double w = kTwoPi * fd(rng);
        const PhasorSolution s = solve_phasor(kDefaults, m, w);
        const Complex z1(kDefaults.r1, tank_reactance(kDefaults.l1, kDefaults.c1, w));
        const Complex z2(kDefaults.r2, tank_reactance(kDefaults.l2, kDefaults.c2, w));
        const Complex r1 = s.i1 * z1 - j * w * m * s.i2 - kDefaults.v_amp;
        const Complex r2 = -j * w * m * s.i1 + s.i2 * z2;
        EXPECT_LT(std::abs(r1), 1e-9 * kDefaults.v_amp);
        EXPECT_LT(std::abs(r2), 1e-9 * kDefaults.v_amp);
        EXPECT_LT(std::abs(s.z_in * s.i1 - kDefaults.v_amp), 1e-9 * kDefaults.v_amp);
    }
}

TEST(I2Magnitude, Examples) {
    EXPECT_EQ(i2_magnitude(kDefaults, 0.0, w0()), 0.0);
    EXPECT_NEAR(i2_magnitude(kDefaults, 10e-6, w0()), 0.9957, 1e-3);
}

TEST(I2Magnitude, SplitPoleMaximumAtK07) {
    const double m = 0.7 * 20e-6;
    const auto best = oracle::dense_argmax(
        [&](double f) { return std::abs(oracle::loop_currents(kDefaults, m, kTwoPi * f).second); }, 40e3, 200e3, 1.0);
    EXPECT_NEAR(best.value, 1.0, 1e-3);
    EXPECT_NEAR(i2_magnitude(kDefaults, m, kTwoPi * best.f), 1.0, 1e-3);
    EXPECT_NEAR(10.0 / (2.0 * std::sqrt(5.0 * 5.0)), 1.0, 1e-15);
}

TEST(I2Magnitude, AgreesWithPhasorSolve) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> kd(0.0, 0.99), fd(20e3, 300e3);
    for (int n = 0; n < 500; ++n) {
        const double m = kd(rng) * 20e-6;
        const double w = kTwoPi * fd(rng);
        const double a = std::abs(solve_phasor(kDefaults, m, w).i2);
        EXPECT_NEAR(i2_magnitude(kDefaults, m, w), a, 1e-12 * std::max(a, 1e-300));
    }
}

TEST(PhasorProperties, PowerBalance) {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> kd(0.01, 0.99), fd(30e3, 250e3);
    for (int n = 0; n < 200; ++n) {
        const double m = kd(rng) * 20e-6;
        const double w = kTwoPi * fd(rng);
        const PhasorSolution s = solve_phasor(kDefaults, m, w);
        const double source = (kDefaults.v_amp * std::conj(s.i1)).real();
        const double loss = std::norm(s.i1) * kDefaults.r1 + std::norm(s.i2) * kDefaults.r2;
        EXPECT_NEAR(source, loss, 1e-9 * source);
    }
}

TEST(PhasorProperties, SplitPoleCeiling) {
    const double ceiling = kDefaults.v_amp / (2.0 * std::sqrt(kDefaults.r1 * kDefaults.r2));
    const std::vector<double> grid = linear_grid(20e3, 400e3, 20001);
    for (double k = 0.01; k <= 0.99 + 1e-12; k += 0.02) {
        const SweepCurve c = sweep(kDefaults, k * 20e-6, grid);
        for (double v : c.i2_mag) ASSERT_LE(v, ceiling + 1e-9);
    }
}

TEST(PhasorProperties, SwapSymmetryForIdenticalTanks) {
    CircuitParams swapped = kDefaults;
    std::swap(swapped.r1, swapped.r2);
    std::swap(swapped.l1, swapped.l2);
    std::swap(swapped.c1, swapped.c2);
    for (double f : {50e3, 72e3, 80e3, 120e3}) {
        for (double k : {0.1, 0.5, 0.9}) {
            const double m = k * 20e-6;
            EXPECT_DOUBLE_EQ(i2_magnitude(kDefaults, m, kTwoPi * f), i2_magnitude(swapped, m, kTwoPi * f));
        }
    }
}

TEST(Sweep, RowsMatchPointSolves) {
    const std::vector<double> grid{70e3, 72.5e3, 75e3};
    const SweepCurve c = sweep(kDefaults, 4e-6, grid);
    ASSERT_EQ(c.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        const PhasorSolution s = solve_phasor(kDefaults, 4e-6, kTwoPi * grid[i]);
        EXPECT_EQ(c.i1_mag[i], std::abs(s.i1));
        EXPECT_EQ(c.i2_mag[i], std::abs(s.i2));
        EXPECT_EQ(c.zin_mag[i], std::abs(s.z_in));
        EXPECT_EQ(c.zin_phase[i], std::arg(s.z_in));
    }
}

TEST(Sweep, RejectsBadGrids) {
    EXPECT_THROW(sweep(kDefaults, 1e-6, std::vector<double>{}), UsageError);
    EXPECT_THROW(sweep(kDefaults, 1e-6, std::vector<double>{70e3, 70e3}), UsageError);
    EXPECT_THROW(sweep(kDefaults, 1e-6, std::vector<double>{72e3, 71e3}), UsageError);
    EXPECT_THROW(sweep(kDefaults, 1e-6, std::vector<double>{0.0, 1.0}), UsageError);
}

TEST(Sweep, SinglePeakAtLowCouplingTwoAtHigh) {
    const std::vector<double> narrow = linear_grid(60e3, 90e3, 3001);  // 10 Hz
    const SweepCurve low = sweep(kDefaults, 0.1 * 20e-6, narrow);
    EXPECT_EQ(local_maxima(low.i2_mag, low.freqs).size(), 1u);
    const std::vector<double> wide = linear_grid(40e3, 400e3, 36001);
    const SweepCurve high = sweep(kDefaults, 0.9 * 20e-6, wide);
    EXPECT_EQ(local_maxima(high.i2_mag, high.freqs).size(), 2u);
}

TEST(LocalMaxima, MonotoneHasNone) {
    const std::vector<double> v{1, 2, 3, 4, 5}, f{1, 2, 3, 4, 5};
    EXPECT_TRUE(local_maxima(v, f).empty());
}

TEST(LocalMaxima, EndpointsNeverReported) {
    const std::vector<double> v{9, 1, 2, 1, 9}, f{1, 2, 3, 4, 5};
    const auto peaks = local_maxima(v, f);
    ASSERT_EQ(peaks.size(), 1u);
    EXPECT_EQ(peaks[0].freq, 3.0);
}

TEST(LocalMaxima, PlateauReportsMidpointOnce) {
    const std::vector<double> v{0, 1, 3, 3, 3, 1, 0}, f{10, 11, 12, 13, 14, 15, 16};
    const auto peaks = local_maxima(v, f);
    ASSERT_EQ(peaks.size(), 1u);
    EXPECT_EQ(peaks[0].freq, 13.0);
    // a shoulder (flat then rising) is not a maximum
    const std::vector<double> w{0, 2, 2, 5, 1}, g{1, 2, 3, 4, 5};
    const auto p2 = local_maxima(w, g);
    ASSERT_EQ(p2.size(), 1u);
    EXPECT_EQ(p2[0].freq, 4.0);
}

TEST(LocalMaxima, ShortInputIsUsageError) {
    const std::vector<double> v{1, 2}, f{1, 2};
    EXPECT_THROW(local_maxima(v, f), UsageError);
}

TEST(LocalMaxima, WeakCouplingAnchors) {
    const std::vector<double> grid = linear_grid(60e3, 90e3, 3001);
    const SweepCurve c = sweep(kDefaults, 0.1 * 20e-6, grid);
    const auto p2 = local_maxima(c.i2_mag, c.freqs);
    const auto p1 = local_maxima(c.i1_mag, c.freqs);
    ASSERT_EQ(p2.size(), 1u);
    ASSERT_EQ(p1.size(), 1u);
    EXPECT_NEAR(p2[0].freq, 75475.0, 500.0);
    EXPECT_NEAR(p1[0].freq, 72110.0, 300.0);
}

TEST(LocalMaxima, AlwaysInterior) {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> d(0, 3);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> v(12), f(12);
        for (std::size_t i = 0; i < v.size(); ++i) {
            v[i] = d(rng);
            f[i] = static_cast<double>(i);
        }
        for (const Peak& pk : local_maxima(v, f)) {
            EXPECT_GT(pk.index, 0u);
            EXPECT_LT(pk.index, v.size() - 1);
        }
    }
}

TEST(SplittingSurface, ShapeAndOnsets) {
    std::vector<double> ks;
    for (int i = 1; i <= 9; ++i) ks.push_back(0.1 * i);
    const std::vector<double> grid = linear_grid(40e3, 200e3, 8001);
    const SplittingSurface s = splitting_surface(kDefaults, ks, grid);
    ASSERT_EQ(s.i2.size(), 9u);
    for (const auto& row : s.i2) EXPECT_EQ(row.size(), grid.size());
    EXPECT_EQ(s.i2[4][100], i2_magnitude(kDefaults, 0.5 * 20e-6, kTwoPi * grid[100]));

    auto first_double = [&](int side) {
        for (double k : ks) {
            if (oracle::count_peaks(kDefaults, k, side, 40e3, 200e3, 20.0) >= 2) return k;
        }
        return 0.0;
    };
    double first_i2 = 0.0;
    for (std::size_t i = 0; i < ks.size(); ++i) {
        if (s.maxima[i].size() >= 2) {
            first_i2 = ks[i];
            break;
        }
    }
    EXPECT_NEAR(first_i2, 0.6, 1e-12);
    EXPECT_NEAR(first_double(2), 0.6, 1e-12);
    EXPECT_NEAR(first_double(1), 0.4, 1e-12);
}

}  // namespace
}  // namespace wpt
