#pragma once

#include <stdexcept>
#include <string>

namespace lmaxlab {

// Base of every error the library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed configuration or a violated precondition on user input.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Input outside an operation's domain (non-Hermitian matrix, gap violation, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// An iterative solver stopped before reaching its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual, int iterations)
      : Error(what + " (residual " + std::to_string(residual) + " after " +
              std::to_string(iterations) + " iterations)"),
        residual_(residual),
        iterations_(iterations) {}

  double residual() const noexcept { return residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

}  // namespace lmaxlab
