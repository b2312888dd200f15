#pragma once

// Steady-state (phasor) analysis of two series-resonant tanks coupled through
// a mutual inductance M:
//
//   V = I1 (R1 + jX1) - j w M I2
//   0 = -j w M I1 + I2 (R2 + jX2),      Xi = w Li - 1 / (w Ci)

#include "wpt/errors.hpp"
#include "wpt/format.hpp"

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace wpt {

using Complex = std::complex<double>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Largest coupling coefficient accepted anywhere in the toolkit.
inline constexpr double kMaxCoupling = 0.99;

/// Element values of the two tanks. r2 is the whole secondary resistance
/// (parasitic + load); r_load is the share of it that counts as delivered power.
struct CircuitParams {
    double v_amp = 10.0;
    double r1 = 5.0;
    double l1 = 20e-6;
    double c1 = 240.7e-9;
    double r2 = 5.0;
    double r_load = 5.0;
    double l2 = 20e-6;
    double c2 = 240.7e-9;

    /// Throws DomainError naming the first offending field.
    void validate() const {
        auto positive = [](double v, const char* name) {
            if (!(v > 0.0) || !std::isfinite(v)) {
                throw DomainError(std::string(name) + " must be finite and > 0");
            }
        };
        positive(v_amp, "v_amp");
        positive(r1, "r1");
        positive(l1, "l1");
        positive(c1, "c1");
        positive(r2, "r2");
        positive(l2, "l2");
        positive(c2, "c2");
        if (!(r_load >= 0.0 && r_load <= r2)) {
            throw DomainError("r_load must lie in [0, r2]");
        }
    }
};

inline double tank_reactance(double l, double c, double omega) {
    if (!(omega > 0.0)) throw DomainError("omega must be > 0");
    return omega * l - 1.0 / (omega * c);
}

inline double resonant_frequency(double l, double c) {
    if (!(l > 0.0 && c > 0.0)) throw DomainError("l and c must be > 0");
    return 1.0 / (kTwoPi * std::sqrt(l * c));
}

inline double mutual_from_k(double k, double l1, double l2) {
    if (!(k >= 0.0 && k < 1.0)) throw DomainError("k must lie in [0, 1)");
    return k * std::sqrt(l1 * l2);
}

/// Coupling coefficient and the mutual inductance it implies; always built
/// through one of the factories so that m == k * sqrt(l1 * l2).
struct Coupling {
    double k = 0.0;
    double m = 0.0;

    static Coupling from_k(double k, const CircuitParams& p, double k_max = kMaxCoupling) {
        if (!(k > 0.0 && k <= k_max)) {
            throw DomainError("k must lie in (0, " + format_number(k_max) + "]");
        }
        return {k, mutual_from_k(k, p.l1, p.l2)};
    }

    static Coupling from_m(double m, const CircuitParams& p, double k_max = kMaxCoupling) {
        return from_k(m / std::sqrt(p.l1 * p.l2), p, k_max);
    }
};

struct PhasorSolution {
    Complex i1;
    Complex i2;
    Complex z_in;
    double omega = 0.0;
};

/// Z_in = R1 + jX1 + (wM)^2 / (R2 + jX2)
inline Complex input_impedance(const CircuitParams& p, double m, double omega) {
    const Complex z1(p.r1, tank_reactance(p.l1, p.c1, omega));
    const Complex z2(p.r2, tank_reactance(p.l2, p.c2, omega));
    const double wm = omega * m;
    return z1 + wm * wm / z2;
}

/// Drive phasor is taken as V = v_amp + j0.
inline PhasorSolution solve_phasor(const CircuitParams& p, double m, double omega) {
    const Complex z2(p.r2, tank_reactance(p.l2, p.c2, omega));
    const Complex z_in = input_impedance(p, m, omega);
    const Complex i1 = p.v_amp / z_in;
    const Complex i2 = Complex(0.0, omega * m) * i1 / z2;
    return {i1, i2, z_in, omega};
}

/// Closed-form |I2| in real arithmetic (independent of solve_phasor):
///
///   |I2| = w M V / ( sqrt(R2^2 + X2^2)
///                    * sqrt((R1 + (wM)^2 R2 / D)^2 + (X1 - (wM)^2 X2 / D)^2) ),
///   D = R2^2 + X2^2.
inline double i2_magnitude(const CircuitParams& p, double m, double omega) {
    const double x1 = tank_reactance(p.l1, p.c1, omega);
    const double x2 = tank_reactance(p.l2, p.c2, omega);
    const double d = p.r2 * p.r2 + x2 * x2;
    const double wm2 = omega * m * omega * m;
    const double re = p.r1 + wm2 * p.r2 / d;
    const double im = x1 - wm2 * x2 / d;
    return std::abs(omega * m) * p.v_amp / (std::sqrt(d) * std::sqrt(re * re + im * im));
}

struct SweepCurve {
    std::vector<double> freqs;
    std::vector<double> i1_mag;
    std::vector<double> i2_mag;
    std::vector<double> zin_mag;
    std::vector<double> zin_phase;

    std::size_t size() const { return freqs.size(); }
};

inline void check_frequency_grid(std::span<const double> f_grid) {
    if (f_grid.empty()) throw UsageError("frequency grid is empty");
    if (!(f_grid.front() > 0.0)) throw UsageError("frequency grid must be positive");
    for (std::size_t i = 1; i < f_grid.size(); ++i) {
        if (!(f_grid[i] > f_grid[i - 1])) {
            throw UsageError("frequency grid must be strictly increasing");
        }
    }
}

/// `points` evenly spaced values from lo to hi inclusive.
inline std::vector<double> linear_grid(double lo, double hi, std::size_t points) {
    if (points < 2 || !(hi > lo)) throw UsageError("grid needs points >= 2 and max > min");
    std::vector<double> out(points);
    const double step = (hi - lo) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) out[i] = lo + step * static_cast<double>(i);
    out.back() = hi;
    return out;
}

inline SweepCurve sweep(const CircuitParams& p, double m, std::span<const double> f_grid) {
    check_frequency_grid(f_grid);
    SweepCurve c;
    const std::size_t n = f_grid.size();
    c.freqs.assign(f_grid.begin(), f_grid.end());
    c.i1_mag.resize(n);
    c.i2_mag.resize(n);
    c.zin_mag.resize(n);
    c.zin_phase.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const PhasorSolution s = solve_phasor(p, m, kTwoPi * f_grid[i]);
        c.i1_mag[i] = std::abs(s.i1);
        c.i2_mag[i] = std::abs(s.i2);
        c.zin_mag[i] = std::abs(s.z_in);
        c.zin_phase[i] = std::arg(s.z_in);
    }
    return c;
}

struct Peak {
    double freq = 0.0;
    double value = 0.0;
    std::size_t index = 0;
};

/// Strictly interior local maxima. A flat run that rises on the left and falls
/// on the right is reported once, at its middle sample.
inline std::vector<Peak> local_maxima(std::span<const double> values, std::span<const double> freqs) {
    if (values.size() != freqs.size()) throw UsageError("values and freqs differ in length");
    const std::size_t n = values.size();
    if (n < 3) throw UsageError("local_maxima needs at least 3 samples");
    std::vector<Peak> peaks;
    std::size_t i = 1;
    while (i + 1 < n) {
        if (values[i] > values[i - 1]) {
            std::size_t j = i;
            while (j + 1 < n && values[j + 1] == values[i]) ++j;
            if (j + 1 < n && values[j + 1] < values[i]) {
                const std::size_t mid = i + (j - i) / 2;
                peaks.push_back({freqs[mid], values[mid], mid});
            }
            i = j + 1;
        } else {
            ++i;
        }
    }
    return peaks;
}

struct SplittingSurface {
    std::vector<double> k_grid;
    std::vector<double> f_grid;
    std::vector<std::vector<double>> i2;     // [k][f]
    std::vector<std::vector<Peak>> maxima;  // per k row, along f
};

inline SplittingSurface splitting_surface(const CircuitParams& p, std::span<const double> k_grid,
                                          std::span<const double> f_grid) {
    check_frequency_grid(f_grid);
    if (k_grid.empty()) throw UsageError("k grid is empty");
    SplittingSurface s;
    s.k_grid.assign(k_grid.begin(), k_grid.end());
    s.f_grid.assign(f_grid.begin(), f_grid.end());
    for (double k : k_grid) {
        const double m = Coupling::from_k(k, p).m;
        std::vector<double> row(f_grid.size());
        for (std::size_t j = 0; j < f_grid.size(); ++j) {
            row[j] = i2_magnitude(p, m, kTwoPi * f_grid[j]);
        }
        s.maxima.push_back(local_maxima(row, f_grid));
        s.i2.push_back(std::move(row));
    }
    return s;
}

}  // namespace wpt
