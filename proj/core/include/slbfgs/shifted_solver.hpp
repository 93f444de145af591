#pragma once

#include <string>
#include <vector>

#include "slbfgs/errors.hpp"
#include "slbfgs/lbfgs_pairs.hpp"
#include "slbfgs/shift_ops.hpp"
#include "slbfgs/types.hpp"

namespace slbfgs {

/// Runtime stability requirements for the shifted recursion.
struct GuardParams {
  double delta = 1e-8;    ///< curvature floor: every y_i^T s_i >= delta
  double eta = 1e8;       ///< budget on sum_i ||y_i||^2
  double epsilon = 1e-4;  ///< scaling floor: gamma * theta_min > epsilon
  double slack = 1e-2;    ///< margin for denominator checks, as a fraction of the bound
};

struct GuardVerdict {
  enum class Reason { ok, curvature, frobenius_budget, scaling };

  Reason reason = Reason::ok;
  double measured = 0.0;
  double limit = 0.0;

  bool ok() const { return reason == Reason::ok; }
  std::string message() const;
};

/// check_guard rejected the (pairs, shift) combination.  Caller policy on
/// rejection: discard all stored pairs and restart.
class GuardRejectionError : public SolverError {
 public:
  explicit GuardRejectionError(GuardVerdict verdict)
      : SolverError("guard rejection: " + verdict.message()), verdict_(verdict) {}
  const GuardVerdict& verdict() const { return verdict_; }

 private:
  GuardVerdict verdict_;
};

/// ok iff (a) every stored curvature >= delta, (b) sum ||y_i||^2 <= eta,
/// and (c) gamma * theta_min(G) > epsilon.  Conditions (a) and (b) are
/// vacuous for an empty store; (c) is always checked.
GuardVerdict check_guard(const LbfgsPairs& pairs, const ShiftOperator& G,
                         const GuardParams& guard = {});

/// How the solution accumulates its rank-one corrections.  All three use
/// the same precomputed (p_i, tau_i); only the projection differs.
enum class UpdateForm {
  /// x = C_0^{-1} y + sum_i sign_i tau_i (p_i . y) p_i with y fixed.  Default.
  original_rhs,
  /// Running iterate projected on the update direction u_i; algebraically
  /// equal to original_rhs.
  running_u,
  /// Running iterate projected on p_i with the opposite sign.  Known
  /// wrong for k >= 1; kept as a regression tripwire for the sign
  /// convention (see selftest).
  running_p_flipped,
};

/// Precomputed recursion data for (B_k + G)^{-1}.  Writing C_0 =
/// gamma^{-1} I + G and C_{i+1} = C_i + sign_i u_i u_i^T, where sign_i =
/// (-1)^{i+1}, u_{2j} = a_j and u_{2j+1} = b_j from the unrolled factors,
/// one has C_{2k} = B_k + G and
///
///   p_i   = C_i^{-1} u_i
///   tau_i = 1 / (1 + sign_i u_i . p_i)
///   C_{2k}^{-1} z = C_0^{-1} z + sum_i (-1)^i tau_i (p_i . z) p_i.
///
/// Immutable after precompute(); safe for concurrent solve calls.
class ShiftedSolverState {
 public:
  int pair_count() const { return k_; }
  Index dim() const { return n_; }
  double gamma() const { return gamma_; }
  double alpha() const { return alpha_; }  ///< inner shift gamma^{-1}
  double theta_min() const { return theta_min_; }

  const std::vector<Vector>& u() const { return u_; }
  const std::vector<Vector>& p() const { return p_; }
  const std::vector<double>& tau() const { return tau_; }
  /// denominators()[i] = 1 + (-1)^{i+1} u_i . p_i, recorded for bound checks.
  const std::vector<double>& denominators() const { return denom_; }

  const GuardParams& guard() const { return guard_; }
  /// min{1, theta_min / (gamma^{-1} + eta/delta + theta_min)}: the floor the
  /// runtime check enforces (up to slack) on every denominator.
  double denominator_bound() const { return bound_; }

  /// Unrolling + recursion cost; shift_solves == 2k here.
  const OpCounters& precompute_counters() const { return counters_; }
  /// The p/tau recursion alone, excluding the unrolling of the factors.
  const OpCounters& recursion_counters() const { return recursion_counters_; }

  /// B_k v from the factors held in the state (used for residuals).
  Vector apply_B(const Vector& v, OpCounters* counters = nullptr) const;

 private:
  friend ShiftedSolverState precompute(const LbfgsPairs&, const ShiftOperator&,
                                       const GuardParams&);
  Index n_ = 0;
  int k_ = 0;
  double gamma_ = 1.0;
  double alpha_ = 1.0;
  double theta_min_ = 0.0;
  double bound_ = 0.0;
  GuardParams guard_;
  std::vector<Vector> u_;
  std::vector<Vector> p_;
  std::vector<double> tau_;
  std::vector<double> denom_;
  OpCounters counters_;
  OpCounters recursion_counters_;
};

/// Builds p_i and tau_i for all 2k rank-one updates (2k shift solves).
/// Requires check_guard == ok; throws GuardRejectionError otherwise.
/// Every denominator is checked against denominator_bound() minus slack; a
/// violation throws StabilityError.
ShiftedSolverState precompute(const LbfgsPairs& pairs, const ShiftOperator& G,
                              const GuardParams& guard = {});

/// x = (B_k + G)^{-1} y from a precomputed state (one shift solve plus 2k
/// dots and axpys).  The report's rel_residual is recomputed through
/// apply_B + G.apply; wall_time covers the solve only.
SolveReport shifted_solve(const ShiftedSolverState& state, const ShiftOperator& G,
                          const Vector& y, UpdateForm form = UpdateForm::original_rhs);

/// check_guard -> precompute -> shifted_solve.  Counters include the
/// precompute cost.  Guard rejection surfaces as GuardRejectionError.
SolveReport solve_full(const LbfgsPairs& pairs, const ShiftOperator& G,
                       const Vector& y, const GuardParams& guard = {},
                       UpdateForm form = UpdateForm::original_rhs);

}  // namespace slbfgs
