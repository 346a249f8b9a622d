#pragma once

#include <stdexcept>
#include <string>

namespace byzfuse {

// Invalid parameter value (probability out of range, bad step size, ...).
struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A quantity is outside the domain where a formula is defined (log of 0 etc).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// Problem too large for an exact method.
struct CapacityError : std::length_error {
  using std::length_error::length_error;
};

// Combination of inputs not handled by a routine (e.g. heterogeneous k-out-of-n).
struct UnsupportedInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Numeric safeguard tripped (LP certificate mismatch, non-finite value).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require_probability(double p, const char *what) {
  if (!(p >= 0.0 && p <= 1.0))
    throw ParameterError(std::string(what) + " must lie in [0,1], got " + std::to_string(p));
}

}  // namespace byzfuse
