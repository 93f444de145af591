#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "slbfgs/errors.hpp"
#include "slbfgs/lbfgs_pairs.hpp"
#include "slbfgs/shift_ops.hpp"
#include "slbfgs/shifted_solver.hpp"
#include "slbfgs/types.hpp"

namespace slbfgs {

/// Generator parameters for one synthetic benchmark instance.
struct ProblemSpec {
  enum class ShiftKind { scalar, diagonal, tridiagonal };
  enum class ObjectiveKind { none, quadratic, extended_rosenbrock };

  Index n = 1000;
  int k = 5;
  ShiftKind shift_kind = ShiftKind::tridiagonal;
  double sigma = 0.1;
  std::uint64_t seed = 0;
  ObjectiveKind objective = ObjectiveKind::none;
};

std::string_view to_string(ProblemSpec::ShiftKind kind);
std::string_view to_string(ProblemSpec::ObjectiveKind kind);

/// Random symmetric tridiagonal shift: diagonal 2 + sigma + U(0,1),
/// off-diagonal U(-1,0).  The Gershgorin floor then exceeds sigma, so the
/// operator is SPD by construction.  Substream 0 draws the diagonal,
/// substream 1 the off-diagonal.
TridiagonalShift gen_tridiagonal_shift(Index n, double sigma, std::uint64_t seed);

/// Diagonal shift with entries U(sigma, sigma + 2), so theta_min >= sigma.
/// Substream 7.
DiagonalShift gen_diagonal_shift(Index n, double sigma, std::uint64_t seed);

/// k pairs from a random SPD quadratic: s_i ~ U(-1,1)^n and y_i = Q s_i
/// with Q = c I + sum of three positive rank-one terms, so every curvature
/// is positive.  Substream 0 draws Q, substream 1 the s vectors.
LbfgsPairs gen_random_pairs(Index n, int k, std::uint64_t seed, double delta = 1e-8,
                            int capacity = 0 /* 0: max(k, 6) */);

/// Smooth built-in objective with a standard start point.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual Index dim() const = 0;
  virtual double value(const Vector& x) const = 0;
  virtual Vector gradient(const Vector& x) const = 0;
  virtual Vector start_point() const = 0;
  virtual std::string_view name() const = 0;
};

/// f(x) = 0.5 x^T D x, D = diag(d) > 0; gradient D x; start point all ones.
class QuadraticObjective final : public Objective {
 public:
  explicit QuadraticObjective(Vector d);
  Index dim() const override { return d_.size(); }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  Vector start_point() const override;
  std::string_view name() const override { return "quadratic"; }
  const Vector& hessian_diagonal() const { return d_; }

 private:
  Vector d_;
};

/// Sum over consecutive coordinate pairs of 100 (x_{2i} - x_{2i-1}^2)^2 +
/// (1 - x_{2i-1})^2; standard start (-1.2, 1, -1.2, 1, ...).  n must be even.
class ExtendedRosenbrock final : public Objective {
 public:
  explicit ExtendedRosenbrock(Index n);
  Index dim() const override { return n_; }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  Vector start_point() const override;
  std::string_view name() const override { return "extended_rosenbrock"; }

 private:
  Index n_;
};

/// Builds the ObjectiveKind named in a spec; quadratic diagonals are drawn
/// from U(0.5, 10) under the spec seed.
std::unique_ptr<Objective> make_objective(const ProblemSpec& spec);

/// The minimizer was reached before the requested number of pairs existed.
class EarlyTerminationError : public SolverError {
 public:
  using SolverError::SolverError;
};

struct CollectResult {
  LbfgsPairs pairs;
  Vector gradient;  ///< gradient at the final iterate
  int iterations = 0;
};

/// Runs L-BFGS (two-loop direction, backtracking Armijo line search with
/// c1 = 1e-4 and halving) from the objective's start point until num_pairs
/// pairs are stored; pairs failing the curvature floor are skipped with
/// extra iterations taken.  Throws EarlyTerminationError if the method
/// converges first.
CollectResult run_lbfgs_collect(const Objective& objective, int num_pairs,
                                double delta = 1e-8);

struct TrustRegionSystem {
  ScalarShift shift;
  Vector rhs;  ///< -g
};

/// The optimality system (B_k + sigma I) step = -g at a fixed sigma in (0,1].
TrustRegionSystem trust_region_system(const LbfgsPairs& pairs, const Vector& g,
                                      double sigma);

struct KktReport {
  Vector v1;
  Vector v2;
  /// Relative residual of the full 2n x 2n block system
  /// [[B + G_inner + 2 A^T D^{-1} A, A^T], [A, D]].
  double block_residual = 0.0;
  SolveReport inner;
};

/// Two-step reduction of the doubly-augmented block system with diagonal A
/// and positive diagonal D: solve (B + G_inner + A^T D^{-1} A) v1 =
/// r1 - A^T D^{-1} r2 through the shifted recursion, then v2 =
/// D^{-1}(r2 - A v1).  The combined diagonal shift must stay SPD; a
/// nonpositive entry raises GuardRejectionError.
KktReport kkt_block_solve(const LbfgsPairs& pairs,
                          const std::optional<Vector>& inner_shift_diag,
                          const Vector& a_diag, const Vector& d_diag,
                          const Vector& r1, const Vector& r2,
                          const GuardParams& guard = {});

}  // namespace slbfgs
