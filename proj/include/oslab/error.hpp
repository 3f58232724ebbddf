#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace oslab {

/// Base class of every exception raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input rejected by a precondition check (bad parameters, wrong dimensions,
/// non-symmetric matrices and so on).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A point of a spectrum (or a sample location) falls outside the domain of
/// the function being applied.
class DomainError : public Error {
 public:
  DomainError(const std::string& what, double offending)
      : Error(what), offending_(offending) {}
  double offending() const noexcept { return offending_; }

 private:
  double offending_;
};

/// An iterative method hit its iteration cap. `trace()` carries the last
/// values seen (quadrature estimates, residual norms).
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> trace)
      : Error(what), trace_(std::move(trace)) {}
  const std::vector<double>& trace() const noexcept { return trace_; }

 private:
  std::vector<double> trace_;
};

}  // namespace oslab
