#pragma once

#include <stdexcept>
#include <string>

namespace qvp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid distribution or model parameter (a <= 0, tau outside (0,1), ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A value that must be strictly positive or finite was not.
class NumericDomainError : public Error {
 public:
  using Error::Error;
};

/// Cholesky factorization of a matrix that should be SPD failed.
class NotSpdError : public Error {
 public:
  using Error::Error;
};

/// Malformed or non-numeric input data.
class IngestionError : public Error {
 public:
  using Error::Error;
};

/// The operation does not apply to the supplied input (e.g. SAVS on centred draws).
class UnsupportedInputError : public Error {
 public:
  using Error::Error;
};

/// A requested quantile level is not on the fitted grid.
class LevelMismatchError : public Error {
 public:
  using Error::Error;
};

/// Error raised inside an MCMC sweep, tagged with the iteration it occurred at.
class SamplerError : public Error {
 public:
  SamplerError(long iteration, const std::string& what)
      : Error("iteration " + std::to_string(iteration) + ": " + what),
        iteration_(iteration) {}
  long iteration() const noexcept { return iteration_; }

 private:
  long iteration_;
};

}  // namespace qvp
