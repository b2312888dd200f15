#pragma once

// Reference computations used only by the tests. They go through the raw
// loop equations rather than the reflected-impedance algebra in the library.

#include "wpt/circuit.hpp"

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <utility>

namespace wpt::oracle {

inline double omega0(double l, double c) { return 1.0 / std::sqrt(l * c); }

/// Solves [[Z1, -jwM], [-jwM, Z2]] [I1, I2]^T = [V, 0]^T by Gaussian
/// elimination with partial pivoting.
inline std::pair<Complex, Complex> loop_currents(const CircuitParams& p, double m, double omega) {
    const Complex j(0.0, 1.0);
    std::array<std::array<Complex, 3>, 2> a{{
        {Complex(p.r1) + j * omega * p.l1 + 1.0 / (j * omega * p.c1), -j * omega * m, Complex(p.v_amp)},
        {-j * omega * m, Complex(p.r2) + j * omega * p.l2 + 1.0 / (j * omega * p.c2), Complex(0.0)},
    }};
    if (std::abs(a[1][0]) > std::abs(a[0][0])) std::swap(a[0], a[1]);
    const Complex f = a[1][0] / a[0][0];
    for (std::size_t c = 0; c < 3; ++c) a[1][c] -= f * a[0][c];
    const Complex i2 = a[1][2] / a[1][1];
    const Complex i1 = (a[0][2] - a[0][1] * i2) / a[0][0];
    return {i1, i2};
}

struct Argmax {
    double f = 0.0;
    double value = 0.0;
};

/// Dense scan of |I2| (or |I1|) over [f_lo, f_hi] with step df.
template <class Fn>
Argmax dense_argmax(Fn&& value_at, double f_lo, double f_hi, double df) {
    Argmax best{f_lo, -1.0};
    for (double f = f_lo; f <= f_hi; f += df) {
        const double v = value_at(f);
        if (v > best.value) best = {f, v};
    }
    return best;
}

/// Counts strict interior maxima of |I_side| on a dense grid (side 1 or 2).
inline int count_peaks(const CircuitParams& p, double k, int side, double f_lo, double f_hi, double df) {
    const double m = k * std::sqrt(p.l1 * p.l2);
    auto val = [&](double f) {
        const auto [i1, i2] = loop_currents(p, m, kTwoPi * f);
        return side == 1 ? std::abs(i1) : std::abs(i2);
    };
    int count = 0;
    double a = val(f_lo), b = val(f_lo + df);
    for (double f = f_lo + 2 * df; f <= f_hi; f += df) {
        const double c = val(f);
        if (b > a && b > c) ++count;
        a = b;
        b = c;
    }
    return count;
}

}  // namespace wpt::oracle
