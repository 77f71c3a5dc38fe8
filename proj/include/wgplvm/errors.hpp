#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace wgplvm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Vector or matrix sizes that do not fit the manifold/kernel/model.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Coordinates that violate the point invariants of a manifold.
class InvalidPointError : public Error {
 public:
  using Error::Error;
};

// The minimal-norm preimage of the logarithm is not unique.
class CutLocusError : public Error {
 public:
  using Error::Error;
};

// Factorizations that fail after the full jitter ladder, non-finite objectives.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, Eigen::VectorXd last_iterate)
      : NumericalError(what), last_iterate_(std::move(last_iterate)) {}

  const Eigen::VectorXd& last_iterate() const { return last_iterate_; }

 private:
  Eigen::VectorXd last_iterate_;
};

// Malformed or invalid input files. `line` is 1-based, 0 when not tied to a line.
class DataError : public Error {
 public:
  DataError(const std::string& what, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

  int line() const { return line_; }

 private:
  int line_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace wgplvm
