#pragma once

#include <stdexcept>
#include <string>

namespace bsvm {

/// Bad arguments: dimension mismatches, invalid configs, malformed files.
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string &what) : std::invalid_argument(what) {}
};

/// A value outside the mathematical domain of a function (e.g. alpha <= 0).
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string &what) : std::domain_error(what) {}
};

/// Factorization failures, non-finite objectives, divergence.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string &what) : std::runtime_error(what) {}
};

}  // namespace bsvm
