#pragma once

#include <stdexcept>
#include <string>

namespace fts {

/// Input outside an operation's mathematical domain (NaN, r >= 1, zero reference, ...).
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Operand shapes that do not agree.
class DimensionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Arithmetic or iterative failure: datapath overflow, SVD non-convergence.
class NumericalFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed configuration or file.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace fts
