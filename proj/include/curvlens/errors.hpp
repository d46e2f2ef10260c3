#pragma once

#include <stdexcept>
#include <string>

namespace curvlens {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

// Iterative root-finding did not reach its residual target.
class ConvergenceError : public std::runtime_error {
public:
  ConvergenceError(const std::string& what, std::size_t index)
      : std::runtime_error(what + " (node index " + std::to_string(index) + ")"),
        index_(index) {}
  std::size_t index() const noexcept { return index_; }

private:
  std::size_t index_;
};

// Spectral parameter sits on an eigenvalue of the shifted Laplacian.
class SpectrumHit : public std::domain_error {
public:
  SpectrumHit(const std::string& what, int degree)
      : std::domain_error(what), degree_(degree) {}
  int degree() const noexcept { return degree_; }

private:
  int degree_;
};

// Experiment configuration rejected before any numerics ran.
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Non-finite values or other numerical breakdown inside a scan.
class NumericalAbort : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace curvlens
