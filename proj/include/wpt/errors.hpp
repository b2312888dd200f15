#pragma once

#include <stdexcept>
#include <string>

namespace wpt {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad input: violated precondition, malformed grid, bad config value.
class UsageError : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical domain of an operation (omega <= 0, k >= 1, ...).
class DomainError : public UsageError {
public:
    using UsageError::UsageError;
};

/// Output could not be written.
class IoError : public Error {
public:
    using Error::Error;
};

/// Failure that only shows up while evaluating the model.
class SimulationError : public Error {
public:
    using Error::Error;
};

/// The inductance matrix [[L1, M], [M, L2]] is numerically singular.
class NearUnityCoupling : public SimulationError {
public:
    using SimulationError::SimulationError;
};

/// A primary-side measurement that no mutual inductance of this circuit can produce.
class InconsistentMeasurement : public SimulationError {
public:
    InconsistentMeasurement(const std::string& what, double zin_mag)
        : SimulationError(what), zin_mag_(zin_mag) {}

    double zin_mag() const noexcept { return zin_mag_; }

private:
    double zin_mag_;
};

/// Phase-based inversion at a point where the phase is insensitive to M.
class IllConditionedPhase : public SimulationError {
public:
    using SimulationError::SimulationError;
};

}  // namespace wpt
