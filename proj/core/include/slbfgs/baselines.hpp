#pragma once

#include <cmath>
#include <functional>
#include <limits>

#include "slbfgs/lbfgs_pairs.hpp"
#include "slbfgs/shift_ops.hpp"
#include "slbfgs/types.hpp"

namespace slbfgs {

struct IterativeConfig {
  /// Relative residual target; default sqrt of machine epsilon.
  double tol = std::sqrt(std::numeric_limits<double>::epsilon());
  /// 0 means 10 n.
  int max_iterations = 0;

  enum class Preconditioner { none, jacobi };
  Preconditioner preconditioner = Preconditioner::none;
};

/// Observer invoked after each CG iteration with the current iterate.
using IterateObserver = std::function<void(int iteration, const Vector& x)>;

/// (B_k + G) v, matrix-free.
Vector apply_shifted_operator(const LbfgsPairs& pairs, const ShiftOperator& G,
                              const Vector& v, OpCounters* counters = nullptr);

/// Analytic diagonal of B_k from the unrolled factors:
/// gamma^{-1} 1 + sum_j (b_j o b_j - a_j o a_j).
Vector diagonal_of_B(const LbfgsPairs& pairs);

/// Conjugate gradients on (B_k + G) x = y until ||r||/||y|| <= tol.
/// Throws NonConvergenceError (carrying the best iterate) at the cap.
SolveReport cg_solve(const LbfgsPairs& pairs, const ShiftOperator& G,
                     const Vector& y, const IterativeConfig& cfg = {},
                     const IterateObserver& observer = {});

/// CG preconditioned by diag(B_k) + diag(G).  A nonpositive preconditioner
/// entry falls back to plain CG, recorded in the report.
SolveReport pcg_jacobi_solve(const LbfgsPairs& pairs, const ShiftOperator& G,
                             const Vector& y, const IterativeConfig& cfg = {},
                             const IterateObserver& observer = {});

/// Explicit dense B_k (recursive rank-two updates from gamma^{-1} I).
Matrix assemble_dense_B(const LbfgsPairs& pairs);

/// Dense G, reconstructed column by column through G.apply.
Matrix assemble_dense_G(const ShiftOperator& G);

/// Ground truth: assemble B_k + G densely, factor, solve.  Refuses
/// dimensions above the cap (CapExceededError) to guard against accidental
/// O(n^3) on huge instances.
SolveReport dense_oracle_solve(const LbfgsPairs& pairs, const ShiftOperator& G,
                               const Vector& y, Index cap = 2000);

}  // namespace slbfgs
