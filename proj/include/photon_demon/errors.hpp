#pragma once

#include <stdexcept>
#include <string>

namespace photon_demon {

// Parameter outside the mathematical domain of a formula (e.g. lambda not in (0,1)).
class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

// Caller asked for something the operation does not support in this mode.
class UsageError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// Sample statistic has no defined value (zero mean, zero variance, ...).
class UndefinedEstimateError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Conditioning on an outcome of probability zero.
class NullEventError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

// Truncated Fock space too small for the requested tail tolerance.
class TruncationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace photon_demon
