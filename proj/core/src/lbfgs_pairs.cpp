#include "slbfgs/lbfgs_pairs.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "slbfgs/errors.hpp"
#include "slbfgs/shift_ops.hpp"

namespace slbfgs {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::recursion: return "recursion";
    case Method::cg: return "cg";
    case Method::pcg_diag: return "pcg_diag";
    case Method::dense_oracle: return "dense_oracle";
    case Method::naive_wrong: return "naive_wrong";
  }
  return "unknown";
}

LbfgsPairs::LbfgsPairs(Index n, int capacity, double curvature_floor)
    : n_(n), capacity_(capacity), floor_(curvature_floor) {
  if (n < 1) throw std::invalid_argument("LbfgsPairs: dimension must be >= 1");
  if (capacity < 1) throw std::invalid_argument("LbfgsPairs: capacity must be >= 1");
  if (!(curvature_floor > 0.0))
    throw std::invalid_argument("LbfgsPairs: curvature floor must be > 0");
}

LbfgsPairs::PushResult LbfgsPairs::push(const Vector& s, const Vector& y) {
  return push(s, y, floor_);
}

LbfgsPairs::PushResult LbfgsPairs::push(const Vector& s, const Vector& y,
                                        double curvature_floor) {
  if (s.size() != n_ || y.size() != n_)
    throw std::invalid_argument("LbfgsPairs::push: dimension mismatch");

  const double curvature = y.dot(s);
  if (!(curvature >= curvature_floor)) return PushResult::rejected_curvature;

  if (size() == capacity_) {
    s_.erase(s_.begin());
    y_.erase(y_.begin());
    curvatures_.erase(curvatures_.begin());
    y_sqnorms_.erase(y_sqnorms_.begin());
  }
  const double y_sq = y.squaredNorm();
  s_.push_back(s);
  y_.push_back(y);
  curvatures_.push_back(curvature);
  y_sqnorms_.push_back(y_sq);
  gamma_ = curvature / y_sq;  // newest pair rescales B_0
  invalidate_cache();
  return PushResult::accepted;
}

void LbfgsPairs::set_gamma(double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("LbfgsPairs: gamma must be > 0");
  gamma_ = gamma;
  invalidate_cache();
}

const Vector& LbfgsPairs::s(int i) const { return s_.at(static_cast<size_t>(i)); }
const Vector& LbfgsPairs::y(int i) const { return y_.at(static_cast<size_t>(i)); }
double LbfgsPairs::curvature(int i) const { return curvatures_.at(static_cast<size_t>(i)); }
double LbfgsPairs::y_squared_norm(int i) const { return y_sqnorms_.at(static_cast<size_t>(i)); }

double LbfgsPairs::min_curvature() const {
  double m = std::numeric_limits<double>::infinity();
  for (double c : curvatures_) m = std::min(m, c);
  return m;
}

double LbfgsPairs::y_frobenius_sq() const {
  double total = 0.0;
  for (double q : y_sqnorms_) total += q;
  return total;
}

const UnrolledFactors& LbfgsPairs::unrolled() const {
  if (!unrolled_) unrolled_ = std::make_unique<UnrolledFactors>(build_unrolled(*this));
  return *unrolled_;
}

UnrolledFactors build_unrolled(const LbfgsPairs& pairs) {
  const int k = pairs.size();
  UnrolledFactors f;
  f.a.reserve(static_cast<size_t>(k));
  f.b.reserve(static_cast<size_t>(k));
  const double inv_gamma = 1.0 / pairs.gamma();

  for (int j = 0; j < k; ++j) {
    // B_j s_j from the factors already built.
    Vector bs = inv_gamma * pairs.s(j);
    for (int i = 0; i < j; ++i) {
      const double wb = f.b[static_cast<size_t>(i)].dot(pairs.s(j));
      const double wa = f.a[static_cast<size_t>(i)].dot(pairs.s(j));
      bs += wb * f.b[static_cast<size_t>(i)];
      bs -= wa * f.a[static_cast<size_t>(i)];
      f.build_cost.inner_products += 2;
      f.build_cost.vector_updates += 2;
    }
    const double sBs = pairs.s(j).dot(bs);
    f.build_cost.inner_products += 1;
    if (!(sBs > 0.0))
      throw NumericalError("build_unrolled: s^T B s <= 0 at update " + std::to_string(j) +
                           " (pairs violate positive definiteness)");
    f.a.push_back(bs / std::sqrt(sBs));
    f.b.push_back(pairs.y(j) / std::sqrt(pairs.curvature(j)));
  }
  return f;
}

Vector LbfgsPairs::apply_B(int j, const Vector& v, OpCounters* counters) const {
  if (j < 0 || j > size())
    throw std::out_of_range("apply_B: update index " + std::to_string(j) +
                            " out of range [0, " + std::to_string(size()) + "]");
  if (v.size() != n_) throw std::invalid_argument("apply_B: dimension mismatch");

  const UnrolledFactors& f = unrolled();
  Vector out = v / gamma_;
  for (int i = 0; i < j; ++i) {
    const double wb = f.b[static_cast<size_t>(i)].dot(v);
    const double wa = f.a[static_cast<size_t>(i)].dot(v);
    out += wb * f.b[static_cast<size_t>(i)];
    out -= wa * f.a[static_cast<size_t>(i)];
    if (counters) {
      counters->inner_products += 2;
      counters->vector_updates += 2;
    }
  }
  return out;
}

Vector LbfgsPairs::two_loop_solve(const Vector& r, OpCounters* counters) const {
  if (r.size() != n_) throw std::invalid_argument("two_loop_solve: dimension mismatch");
  const int k = size();

  Vector q = r;
  std::vector<double> alpha(static_cast<size_t>(k));
  for (int i = k - 1; i >= 0; --i) {
    alpha[static_cast<size_t>(i)] = s_[static_cast<size_t>(i)].dot(q) / curvatures_[static_cast<size_t>(i)];
    q -= alpha[static_cast<size_t>(i)] * y_[static_cast<size_t>(i)];
    if (counters) {
      counters->inner_products += 1;
      counters->vector_updates += 1;
    }
  }
  Vector x = gamma_ * q;
  for (int i = 0; i < k; ++i) {
    const double beta = y_[static_cast<size_t>(i)].dot(x) / curvatures_[static_cast<size_t>(i)];
    x += (alpha[static_cast<size_t>(i)] - beta) * s_[static_cast<size_t>(i)];
    if (counters) {
      counters->inner_products += 1;
      counters->vector_updates += 1;
    }
  }
  return x;
}

Vector naive_shifted_two_loop(const LbfgsPairs& pairs, const ShiftOperator& G,
                              const Vector& r) {
  if (r.size() != pairs.dim())
    throw std::invalid_argument("naive_shifted_two_loop: dimension mismatch");
  const int k = pairs.size();

  Vector q = r;
  std::vector<double> alpha(static_cast<size_t>(k));
  for (int i = k - 1; i >= 0; --i) {
    alpha[static_cast<size_t>(i)] = pairs.s(i).dot(q) / pairs.curvature(i);
    q -= alpha[static_cast<size_t>(i)] * pairs.y(i);
  }
  // The tempting but wrong center step: (B_0 + G)^{-1} q instead of B_0^{-1} q.
  Vector x = G.solve_shifted(1.0 / pairs.gamma(), q);
  for (int i = 0; i < k; ++i) {
    const double beta = pairs.y(i).dot(x) / pairs.curvature(i);
    x += (alpha[static_cast<size_t>(i)] - beta) * pairs.s(i);
  }
  return x;
}

}  // namespace slbfgs
