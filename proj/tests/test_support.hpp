#pragma once

#include <cstdint>
#include <memory>

#include "slbfgs/problems.hpp"
#include "slbfgs/rng.hpp"
#include "slbfgs/shift_ops.hpp"

namespace slbfgs::testsupport {

/// Shift of the requested kind with theta_min >= sigma, deterministic per
/// seed.  Diagonal entries are drawn from U(sigma, sigma + 2).
inline std::unique_ptr<ShiftOperator> make_shift(ProblemSpec::ShiftKind kind, Index n,
                                                 double sigma, std::uint64_t seed) {
  switch (kind) {
    case ProblemSpec::ShiftKind::scalar:
      return std::make_unique<ScalarShift>(n, sigma);
    case ProblemSpec::ShiftKind::diagonal:
      return std::make_unique<DiagonalShift>(gen_diagonal_shift(n, sigma, seed));
    case ProblemSpec::ShiftKind::tridiagonal:
      return std::make_unique<TridiagonalShift>(gen_tridiagonal_shift(n, sigma, seed));
  }
  throw std::invalid_argument("make_shift: unknown kind");
}

inline Vector random_rhs(Index n, std::uint64_t seed) {
  Rng stream = Rng(seed).substream(11);
  return stream.uniform_vector(n, -1.0, 1.0);
}

constexpr ProblemSpec::ShiftKind kAllShiftKinds[] = {
    ProblemSpec::ShiftKind::scalar,
    ProblemSpec::ShiftKind::diagonal,
    ProblemSpec::ShiftKind::tridiagonal,
};

}  // namespace slbfgs::testsupport
