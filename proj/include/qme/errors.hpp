#pragma once

#include <stdexcept>
#include <string>

namespace qme {

/// Operand shapes do not agree.
class DimensionMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A domain invariant (hermiticity, positivity, nonnegative rate, ...) failed.
class InvariantViolation : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Requested model is too large for dense storage.
class ResourceLimit : public std::length_error {
public:
    using std::length_error::length_error;
};

/// A stage of the time stepper produced NaN or Inf.
class IntegrationDiverged : public std::runtime_error {
public:
    IntegrationDiverged(double t, const std::string& what)
        : std::runtime_error(what), time_(t) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

}  // namespace qme
