#pragma once

#include <stdexcept>
#include <string>
#include <utility>

#include "slbfgs/types.hpp"

namespace slbfgs {

/// Base class for all library errors.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Data violates a positive-definiteness assumption (corrupted pairs,
/// nonpositive pivot, ...).  Not recoverable by retrying.
class NumericalError : public SolverError {
 public:
  using SolverError::SolverError;
};

/// A runtime denominator bound was violated during precompute.  Signals
/// guard parameters inconsistent with the data, or a bug.
class StabilityError : public SolverError {
 public:
  using SolverError::SolverError;
};

/// An iterative method hit its iteration cap; the best iterate is kept.
class NonConvergenceError : public SolverError {
 public:
  NonConvergenceError(std::string what, SolveReport best)
      : SolverError(std::move(what)), best_(std::move(best)) {}
  const SolveReport& best_iterate() const { return best_; }

 private:
  SolveReport best_;
};

/// The dense oracle refuses dimensions above its cap.
class CapExceededError : public SolverError {
 public:
  using SolverError::SolverError;
};

/// Malformed input file; carries the 1-based line number.
class ParseError : public SolverError {
 public:
  ParseError(const std::string& path, long line, const std::string& what)
      : SolverError(path + ":" + std::to_string(line) + ": " + what),
        path_(path),
        line_(line) {}
  const std::string& path() const { return path_; }
  long line() const { return line_; }

 private:
  std::string path_;
  long line_;
};

}  // namespace slbfgs
