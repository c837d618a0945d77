#pragma once

#include <stdexcept>
#include <string>

namespace cscensor {

/// Dimension or cardinality arguments that cannot describe a valid model.
class InvalidDimension : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the domain of a special function or its inverse.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Densities that require sigma_v > 0.
class DegenerateNoise : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Exhaustive enumeration refused because it exceeds the support budget.
class TooLarge : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// A bound evaluator was called outside the parameter region it is valid for.
class PreconditionViolation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed or inconsistent experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cscensor
