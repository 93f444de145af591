#include "slbfgs/shift_ops.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "slbfgs/errors.hpp"

namespace slbfgs {

namespace {

void require_dim(const Vector& v, Index n, const char* who) {
  if (v.size() != n) throw std::invalid_argument(std::string(who) + ": dimension mismatch");
}

}  // namespace

ScalarShift::ScalarShift(Index n, double sigma) : n_(n), sigma_(sigma) {
  if (n < 1) throw std::invalid_argument("ScalarShift: dimension must be >= 1");
  if (!(sigma > 0.0)) throw std::invalid_argument("ScalarShift: sigma must be > 0");
}

Vector ScalarShift::apply(const Vector& v) const {
  require_dim(v, n_, "ScalarShift::apply");
  return sigma_ * v;
}

Vector ScalarShift::solve_shifted(double alpha, const Vector& v) const {
  require_dim(v, n_, "ScalarShift::solve_shifted");
  const double denom = sigma_ + alpha;
  if (!(denom > 0.0))
    throw std::domain_error("ScalarShift::solve_shifted: sigma + alpha must be > 0");
  return v / denom;
}

Vector ScalarShift::diagonal() const { return Vector::Constant(n_, sigma_); }

DiagonalShift::DiagonalShift(Vector d) : d_(std::move(d)) {
  if (d_.size() < 1) throw std::invalid_argument("DiagonalShift: dimension must be >= 1");
  theta_ = d_.minCoeff();
  if (!(theta_ > 0.0))
    throw std::invalid_argument("DiagonalShift: all diagonal entries must be > 0");
}

Vector DiagonalShift::apply(const Vector& v) const {
  require_dim(v, d_.size(), "DiagonalShift::apply");
  return d_.cwiseProduct(v);
}

Vector DiagonalShift::solve_shifted(double alpha, const Vector& v) const {
  require_dim(v, d_.size(), "DiagonalShift::solve_shifted");
  if (!(theta_ + alpha > 0.0))
    throw std::domain_error("DiagonalShift::solve_shifted: d_min + alpha must be > 0");
  return (v.array() / (d_.array() + alpha)).matrix();
}

TridiagonalShift::TridiagonalShift(Vector main_diag, Vector off_diag)
    : d_(std::move(main_diag)), e_(std::move(off_diag)) {
  const Index n = d_.size();
  if (n < 1) throw std::invalid_argument("TridiagonalShift: dimension must be >= 1");
  if (e_.size() != n - 1)
    throw std::invalid_argument("TridiagonalShift: off-diagonal must have length n - 1");

  double floor = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < n; ++i) {
    double row = d_[i];
    if (i > 0) row -= std::abs(e_[i - 1]);
    if (i + 1 < n) row -= std::abs(e_[i]);
    floor = std::min(floor, row);
  }
  gershgorin_ = floor;
  if (!(gershgorin_ > 0.0))
    throw std::invalid_argument(
        "TridiagonalShift: Gershgorin floor must be positive (got " +
        std::to_string(gershgorin_) + ")");
}

Vector TridiagonalShift::apply(const Vector& v) const {
  const Index n = d_.size();
  require_dim(v, n, "TridiagonalShift::apply");
  Vector out(n);
  for (Index i = 0; i < n; ++i) {
    double acc = d_[i] * v[i];
    if (i > 0) acc += e_[i - 1] * v[i - 1];
    if (i + 1 < n) acc += e_[i] * v[i + 1];
    out[i] = acc;
  }
  return out;
}

std::shared_ptr<const TridiagonalShift::Factorization>
TridiagonalShift::factorization(double alpha) const {
  {
    std::scoped_lock lock(cache_mutex_);
    if (cache_ && cache_->alpha == alpha) return cache_;
  }

  const Index n = d_.size();
  auto fact = std::make_shared<Factorization>();
  fact->alpha = alpha;
  fact->pivot.resize(n);
  fact->lower.resize(n > 0 ? n - 1 : 0);

  // LDL^T without pivoting; pivots stay positive while T + alpha I is SPD.
  double pivot = d_[0] + alpha;
  if (!(pivot > 0.0))
    throw NumericalError("TridiagonalShift: nonpositive pivot at row 0");
  fact->pivot[0] = pivot;
  for (Index i = 1; i < n; ++i) {
    const double l = e_[i - 1] / fact->pivot[i - 1];
    fact->lower[i - 1] = l;
    pivot = d_[i] + alpha - l * e_[i - 1];
    if (!(pivot > 0.0))
      throw NumericalError("TridiagonalShift: nonpositive pivot at row " + std::to_string(i));
    fact->pivot[i] = pivot;
  }

  std::scoped_lock lock(cache_mutex_);
  cache_ = fact;
  return fact;
}

Vector TridiagonalShift::solve_shifted(double alpha, const Vector& v) const {
  const Index n = d_.size();
  require_dim(v, n, "TridiagonalShift::solve_shifted");
  const auto fact = factorization(alpha);

  Vector x(n);
  // Forward sweep L z = v, kept in x.
  x[0] = v[0];
  for (Index i = 1; i < n; ++i) x[i] = v[i] - fact->lower[i - 1] * x[i - 1];
  // Diagonal and backward sweep L^T x = D^{-1} z.
  x[n - 1] /= fact->pivot[n - 1];
  for (Index i = n - 2; i >= 0; --i) {
    x[i] = x[i] / fact->pivot[i] - fact->lower[i] * x[i + 1];
  }
  return x;
}

}  // namespace slbfgs
