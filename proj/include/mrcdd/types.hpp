#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace mrcdd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Base class for every error raised by the library. The C API maps each
/// subclass onto one error code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Raised when the data regime does not allow the requested operation,
/// e.g. bias correction of data that is already corrected.
class RegimeError : public Error {
 public:
  using Error::Error;
};

/// Two experiments that must share an input sequence do not.
class InputMismatchError : public Error {
 public:
  using Error::Error;
};

class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

class InfeasibleMatchingError : public Error {
 public:
  InfeasibleMatchingError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// The SDP solver did not return an Optimal certificate.
class SolverError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

/// A file could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace mrcdd
