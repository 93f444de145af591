#pragma once

#include <memory>
#include <mutex>
#include <string_view>

#include "slbfgs/types.hpp"

namespace slbfgs {

/// Contract for the shift matrix G: symmetric positive definite, smallest
/// eigenvalue bounded away from zero, and solves with G + alpha I efficient
/// and stable.  Implementations are immutable after construction; all
/// member functions are safe to call concurrently.
class ShiftOperator {
 public:
  virtual ~ShiftOperator() = default;

  virtual Index dim() const = 0;
  virtual Vector apply(const Vector& v) const = 0;  ///< G v
  virtual Vector solve_shifted(double alpha, const Vector& v) const = 0;  ///< (G + alpha I)^{-1} v
  virtual Vector diagonal() const = 0;
  virtual double theta_min() const = 0;  ///< positive lower bound on lambda_min(G)
  virtual std::string_view kind() const = 0;
};

/// G = sigma I.
class ScalarShift final : public ShiftOperator {
 public:
  ScalarShift(Index n, double sigma);

  Index dim() const override { return n_; }
  Vector apply(const Vector& v) const override;
  Vector solve_shifted(double alpha, const Vector& v) const override;
  Vector diagonal() const override;
  double theta_min() const override { return sigma_; }
  std::string_view kind() const override { return "scalar"; }
  double sigma() const { return sigma_; }

 private:
  Index n_;
  double sigma_;
};

/// G = diag(d) with d > 0 componentwise.
class DiagonalShift final : public ShiftOperator {
 public:
  explicit DiagonalShift(Vector d);

  Index dim() const override { return d_.size(); }
  Vector apply(const Vector& v) const override;
  Vector solve_shifted(double alpha, const Vector& v) const override;
  Vector diagonal() const override { return d_; }
  double theta_min() const override { return theta_; }
  std::string_view kind() const override { return "diag"; }

 private:
  Vector d_;
  double theta_;
};

/// Symmetric tridiagonal G.  Shifted solves run an LDL^T factorization
/// (valid without pivoting: G + alpha I is SPD by the Gershgorin
/// precondition) in two O(n) sweeps.  The factorization is cached for the
/// last alpha seen and reused across right-hand sides; the cache is
/// internally synchronized.
///
/// theta_min() is the Gershgorin floor min_i(d_i - |e_{i-1}| - |e_i|),
/// required positive at construction.
class TridiagonalShift final : public ShiftOperator {
 public:
  TridiagonalShift(Vector main_diag, Vector off_diag);

  // The factorization cache stays behind; it rebuilds on demand.
  TridiagonalShift(const TridiagonalShift& other)
      : d_(other.d_), e_(other.e_), gershgorin_(other.gershgorin_) {}
  TridiagonalShift(TridiagonalShift&& other) noexcept
      : d_(std::move(other.d_)), e_(std::move(other.e_)), gershgorin_(other.gershgorin_) {}
  TridiagonalShift& operator=(const TridiagonalShift&) = delete;
  TridiagonalShift& operator=(TridiagonalShift&&) = delete;

  Index dim() const override { return d_.size(); }
  Vector apply(const Vector& v) const override;
  Vector solve_shifted(double alpha, const Vector& v) const override;
  Vector diagonal() const override { return d_; }
  double theta_min() const override { return gershgorin_; }
  std::string_view kind() const override { return "tridiag"; }

  const Vector& main_diagonal() const { return d_; }
  const Vector& off_diagonal() const { return e_; }

 private:
  struct Factorization {
    double alpha;
    Vector pivot;  // D of LDL^T
    Vector lower;  // subdiagonal of unit L
  };
  std::shared_ptr<const Factorization> factorization(double alpha) const;

  Vector d_;
  Vector e_;
  double gershgorin_;
  mutable std::mutex cache_mutex_;
  mutable std::shared_ptr<const Factorization> cache_;
};

}  // namespace slbfgs
