#pragma once

#include <memory>
#include <vector>

#include "slbfgs/types.hpp"

namespace slbfgs {

class ShiftOperator;

/// Rank-one factor form of the L-BFGS matrix.  With B_0 = gamma^{-1} I and
/// B_{j+1} = B_j - B_j s_j s_j^T B_j / (s_j^T B_j s_j) + y_j y_j^T / (y_j^T s_j),
/// the normalized directions
///   a_j = B_j s_j / sqrt(s_j^T B_j s_j)   (subtracted update)
///   b_j = y_j / sqrt(y_j^T s_j)           (added update)
/// give B_k v = gamma^{-1} v + sum_j [(b_j.v) b_j - (a_j.v) a_j].
struct UnrolledFactors {
  std::vector<Vector> a;
  std::vector<Vector> b;
  OpCounters build_cost;
};

/// Store of L-BFGS update pairs {(s_i, y_i)} with capacity M, FIFO eviction,
/// and the scalar gamma defining B_0 = gamma^{-1} I.  Every stored pair
/// satisfies y_i^T s_i >= curvature_floor > 0.
///
/// Thread safety: single writer.  Once built (call unrolled() before
/// sharing), the store is an immutable value safe for concurrent reads.
class LbfgsPairs {
 public:
  enum class PushResult { accepted, rejected_curvature };

  explicit LbfgsPairs(Index n, int capacity = 6, double curvature_floor = 1e-8);

  /// Appends (s, y) if y^T s >= floor; evicts the oldest pair first when
  /// full.  On success gamma is recomputed as s^T y / ||y||^2 from the new
  /// pair.  Rejection leaves the store unchanged.
  PushResult push(const Vector& s, const Vector& y);
  PushResult push(const Vector& s, const Vector& y, double curvature_floor);

  Index dim() const { return n_; }
  int size() const { return static_cast<int>(s_.size()); }  ///< current k
  int capacity() const { return capacity_; }
  double curvature_floor() const { return floor_; }

  double gamma() const { return gamma_; }
  void set_gamma(double gamma);

  const Vector& s(int i) const;
  const Vector& y(int i) const;
  double curvature(int i) const;     ///< y_i^T s_i
  double y_squared_norm(int i) const;

  double min_curvature() const;      ///< +inf when empty
  double y_frobenius_sq() const;     ///< sum_i ||y_i||^2

  /// B_j v for 0 <= j <= k, matrix-free through the unrolled factors.
  Vector apply_B(int j, const Vector& v, OpCounters* counters = nullptr) const;

  /// x = B_k^{-1} r by the two-loop recursion.
  Vector two_loop_solve(const Vector& r, OpCounters* counters = nullptr) const;

  /// Factors are built on first use and invalidated by any push (gamma
  /// changes retroactively re-scale every B_j).  Build before sharing the
  /// store across threads.
  const UnrolledFactors& unrolled() const;

 private:
  void invalidate_cache() { unrolled_.reset(); }

  Index n_;
  int capacity_;
  double floor_;
  double gamma_ = 1.0;
  std::vector<Vector> s_;
  std::vector<Vector> y_;
  std::vector<double> curvatures_;
  std::vector<double> y_sqnorms_;
  mutable std::unique_ptr<UnrolledFactors> unrolled_;
};

/// Builds the normalized rank-one factors for all k stored updates.
/// Throws NumericalError if some s_j^T B_j s_j is numerically nonpositive.
UnrolledFactors build_unrolled(const LbfgsPairs& pairs);

/// Two-loop recursion with the center step B_0^{-1} q replaced by
/// (B_0 + G)^{-1} q.  This does NOT solve (B_k + G) x = r for k >= 1; it is
/// kept only as a negative-control fixture for tests.
Vector naive_shifted_two_loop(const LbfgsPairs& pairs, const ShiftOperator& G,
                              const Vector& r);

}  // namespace slbfgs
