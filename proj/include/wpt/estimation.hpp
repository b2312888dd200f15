#pragma once

// Mutual inductance and secondary current recovered from primary-side
// quantities only. Writing the reflected impedance as M^2 (A - jB) with
//
//   A = w^2 R2 / (R2^2 + X2^2),   B = w^2 X2 / (R2^2 + X2^2)
//
// gives |Z_in|^2 = (R1 + t A)^2 + (X1 - t B)^2 with t = M^2, i.e.
//
//   alpha t^2 + 2 beta t + gamma = 0,
//   alpha = A^2 + B^2,  beta = R1 A - X1 B,  gamma = R1^2 + X1^2 - |Z_in|^2.

#include "wpt/circuit.hpp"
#include "wpt/errors.hpp"
#include "wpt/format.hpp"

#include <cmath>
#include <numbers>
#include <optional>

namespace wpt {

/// Relative tolerance for the discriminant / denominator guards.
inline constexpr double kEstimationEps = 1e-9;

struct PrimaryMeasurement {
    double v_amp = 0.0;
    double i1_amp = 0.0;
    double omega = 0.0;
    std::optional<double> zin_phase;

    void validate() const {
        if (!(v_amp > 0.0 && std::isfinite(v_amp))) throw DomainError("measurement v_amp must be > 0");
        if (!(i1_amp > 0.0 && std::isfinite(i1_amp))) throw DomainError("measurement i1_amp must be > 0");
        if (!(omega > 0.0 && std::isfinite(omega))) throw DomainError("measurement omega must be > 0");
        if (zin_phase && !(std::abs(*zin_phase) < std::numbers::pi / 2)) {
            throw DomainError("measurement zin_phase must lie in (-pi/2, pi/2)");
        }
    }
};

struct QuadraticTerms {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
};

enum class EstimationMethod { magnitude, phase };

struct EstimationResult {
    double m_est = 0.0;
    double i2_est = 0.0;
    EstimationMethod method = EstimationMethod::magnitude;
    QuadraticTerms quadratic_terms;
};

inline QuadraticTerms zin_quadratic(double zin_mag, const CircuitParams& p, double omega) {
    const double x1 = tank_reactance(p.l1, p.c1, omega);
    const double x2 = tank_reactance(p.l2, p.c2, omega);
    const double d = p.r2 * p.r2 + x2 * x2;
    const double a = omega * omega * p.r2 / d;
    const double b = omega * omega * x2 / d;
    return {a * a + b * b, p.r1 * a - x1 * b, p.r1 * p.r1 + x1 * x1 - zin_mag * zin_mag};
}

/// Inverts |Z_in| for M, taking the "+" root of the quadratic in M^2.
inline double m_from_zin_magnitude(double zin_mag, const CircuitParams& p, double omega) {
    if (!(omega > 0.0)) throw DomainError("omega must be > 0");
    if (!(zin_mag >= 0.0 && std::isfinite(zin_mag))) throw DomainError("zin_mag must be finite and >= 0");

    QuadraticTerms q = zin_quadratic(zin_mag, p, omega);
    const double z0_sq = q.gamma + zin_mag * zin_mag;  // R1^2 + X1^2
    if (q.gamma > kEstimationEps * z0_sq) {
        throw InconsistentMeasurement(
            "|Z_in| = " + format_number(zin_mag) + " ohm is below the uncoupled magnitude " +
                format_number(std::sqrt(z0_sq)) + " ohm",
            zin_mag);
    }
    if (q.gamma > 0.0) q.gamma = 0.0;

    double disc = q.beta * q.beta - q.alpha * q.gamma;
    if (disc < 0.0) {
        if (disc < -kEstimationEps * q.beta * q.beta) {
            throw InconsistentMeasurement(
                "negative discriminant inverting |Z_in| = " + format_number(zin_mag) + " ohm", zin_mag);
        }
        disc = 0.0;
    }
    const double root = std::sqrt(disc);
    // Same "+" root; this form avoids cancellation when |alpha gamma| << beta^2.
    double t = q.beta > 0.0 ? -q.gamma / (q.beta + root) : (-q.beta + root) / q.alpha;
    if (t < 0.0) t = 0.0;
    return std::sqrt(t);
}

/// Inverts the phase of Z_in for M:
///
///   M^2 = (R2^2 + X2^2)(X1 - tan(phi) R1) / (w^2 (tan(phi) R2 + X2))
inline double m_from_zin_phase(double zin_phase, const CircuitParams& p, double omega) {
    if (!(omega > 0.0)) throw DomainError("omega must be > 0");
    if (!(std::abs(zin_phase) < std::numbers::pi / 2)) throw DomainError("zin_phase must lie in (-pi/2, pi/2)");

    const double tan_phi = std::tan(zin_phase);
    const double x1 = tank_reactance(p.l1, p.c1, omega);
    const double x2 = tank_reactance(p.l2, p.c2, omega);
    const double d = p.r2 * p.r2 + x2 * x2;
    const double w2 = omega * omega;

    const double den = w2 * (tan_phi * p.r2 + x2);
    const double den_scale = w2 * (std::abs(tan_phi) * p.r2 + std::abs(x2) + p.r2);
    if (std::abs(den) <= kEstimationEps * den_scale) {
        throw IllConditionedPhase("phase of Z_in is insensitive to M at this frequency");
    }
    const double num = d * (x1 - tan_phi * p.r1);
    const double num_scale = d * (std::abs(x1) + std::abs(tan_phi) * p.r1);
    double m_sq = num / den;
    if (m_sq < 0.0) {
        if (std::abs(num) > kEstimationEps * num_scale) {
            throw InconsistentMeasurement("phase " + format_number(zin_phase) +
                                              " rad implies a negative M^2",
                                          std::nan(""));
        }
        m_sq = 0.0;
    }
    return std::sqrt(m_sq);
}

/// Secondary current amplitude from drive and primary current amplitudes.
/// The magnitude route is used unless `method` asks for phase (which then
/// needs meas.zin_phase).
inline EstimationResult estimate_i2(const PrimaryMeasurement& meas, const CircuitParams& p,
                                    EstimationMethod method = EstimationMethod::magnitude) {
    meas.validate();
    const double zin_mag = meas.v_amp / meas.i1_amp;
    EstimationResult r;
    r.method = method;
    r.quadratic_terms = zin_quadratic(zin_mag, p, meas.omega);
    if (method == EstimationMethod::phase) {
        if (!meas.zin_phase) throw UsageError("phase estimation needs zin_phase");
        r.m_est = m_from_zin_phase(*meas.zin_phase, p, meas.omega);
    } else {
        r.m_est = m_from_zin_magnitude(zin_mag, p, meas.omega);
    }
    CircuitParams driven = p;
    driven.v_amp = meas.v_amp;
    r.i2_est = r.m_est > 0.0 ? i2_magnitude(driven, r.m_est, meas.omega) : 0.0;
    return r;
}

}  // namespace wpt
