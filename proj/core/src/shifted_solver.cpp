#include "slbfgs/shifted_solver.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

namespace slbfgs {

std::string GuardVerdict::message() const {
  switch (reason) {
    case Reason::ok:
      return "ok";
    case Reason::curvature:
      return "curvature " + std::to_string(measured) + " below floor " +
             std::to_string(limit);
    case Reason::frobenius_budget:
      return "sum of squared y norms " + std::to_string(measured) +
             " exceeds budget " + std::to_string(limit);
    case Reason::scaling:
      return "gamma * theta_min = " + std::to_string(measured) +
             " not above " + std::to_string(limit);
  }
  return "unknown";
}

GuardVerdict check_guard(const LbfgsPairs& pairs, const ShiftOperator& G,
                         const GuardParams& guard) {
  GuardVerdict v;
  if (pairs.size() > 0) {
    const double min_curv = pairs.min_curvature();
    if (!(min_curv >= guard.delta)) {
      v.reason = GuardVerdict::Reason::curvature;
      v.measured = min_curv;
      v.limit = guard.delta;
      return v;
    }
    const double frob = pairs.y_frobenius_sq();
    if (!(frob <= guard.eta)) {
      v.reason = GuardVerdict::Reason::frobenius_budget;
      v.measured = frob;
      v.limit = guard.eta;
      return v;
    }
  }
  const double scaling = pairs.gamma() * G.theta_min();
  if (!(scaling > guard.epsilon)) {
    v.reason = GuardVerdict::Reason::scaling;
    v.measured = scaling;
    v.limit = guard.epsilon;
    return v;
  }
  return v;
}

Vector ShiftedSolverState::apply_B(const Vector& v, OpCounters* counters) const {
  Vector out = v / gamma_;
  for (int j = 0; j < k_; ++j) {
    const Vector& a = u_[static_cast<size_t>(2 * j)];
    const Vector& b = u_[static_cast<size_t>(2 * j + 1)];
    const double wb = b.dot(v);
    const double wa = a.dot(v);
    out += wb * b;
    out -= wa * a;
    if (counters) {
      counters->inner_products += 2;
      counters->vector_updates += 2;
    }
  }
  return out;
}

ShiftedSolverState precompute(const LbfgsPairs& pairs, const ShiftOperator& G,
                              const GuardParams& guard) {
  if (pairs.dim() != G.dim())
    throw std::invalid_argument("precompute: pairs and shift dimensions differ");
  const GuardVerdict verdict = check_guard(pairs, G, guard);
  if (!verdict.ok()) throw GuardRejectionError(verdict);

  ShiftedSolverState st;
  st.n_ = pairs.dim();
  st.k_ = pairs.size();
  st.gamma_ = pairs.gamma();
  st.alpha_ = 1.0 / st.gamma_;
  st.theta_min_ = G.theta_min();
  st.guard_ = guard;

  // Floor on every denominator (the even-index ones are the delicate ones;
  // odd denominators exceed 1 because C_i is positive definite).
  st.bound_ = std::min(
      1.0, st.theta_min_ / (st.alpha_ + guard.eta / guard.delta + st.theta_min_));
  const double margin = guard.slack * st.bound_;

  const int m = 2 * st.k_;
  st.u_.reserve(static_cast<size_t>(m));
  st.p_.reserve(static_cast<size_t>(m));
  st.tau_.reserve(static_cast<size_t>(m));
  st.denom_.reserve(static_cast<size_t>(m));

  const UnrolledFactors& factors = pairs.unrolled();

  for (int j = 0; j < m; ++j) {
    st.u_.push_back(j % 2 == 0 ? factors.a[static_cast<size_t>(j / 2)]
                               : factors.b[static_cast<size_t>(j / 2)]);
    const Vector& uj = st.u_.back();

    Vector pj = G.solve_shifted(st.alpha_, uj);
    st.recursion_counters_.shift_solves += 1;
    for (int i = 0; i < j; ++i) {
      const double sign = (i % 2 == 0) ? 1.0 : -1.0;
      const double proj = st.p_[static_cast<size_t>(i)].dot(uj);
      pj += sign * st.tau_[static_cast<size_t>(i)] * proj * st.p_[static_cast<size_t>(i)];
      st.recursion_counters_.inner_products += 1;
      st.recursion_counters_.vector_updates += 1;
    }

    // denominator 1 + (-1)^{j+1} u_j . p_j
    const double up = uj.dot(pj);
    st.recursion_counters_.inner_products += 1;
    const double denom = (j % 2 == 0) ? 1.0 - up : 1.0 + up;
    if (!(denom >= st.bound_ - margin) || !std::isfinite(denom))
      throw StabilityError(
          "precompute: denominator " + std::to_string(denom) + " at update " +
          std::to_string(j) + " below stability bound " + std::to_string(st.bound_) +
          " (guard parameters inconsistent with data, or corrupted pairs)");
    if (j % 2 == 1 && !(denom > 1.0))
      throw StabilityError("precompute: added-update denominator must exceed 1, got " +
                           std::to_string(denom));

    st.denom_.push_back(denom);
    st.tau_.push_back(1.0 / denom);
    st.p_.push_back(std::move(pj));
  }
  st.counters_ = factors.build_cost;
  st.counters_ += st.recursion_counters_;
  return st;
}

SolveReport shifted_solve(const ShiftedSolverState& state, const ShiftOperator& G,
                          const Vector& y, UpdateForm form) {
  if (y.size() != state.dim())
    throw std::invalid_argument("shifted_solve: dimension mismatch");

  SolveReport report;
  report.method = Method::recursion;
  const int m = 2 * state.pair_count();
  const auto& p = state.p();
  const auto& u = state.u();
  const auto& tau = state.tau();

  const auto t0 = std::chrono::steady_clock::now();
  Vector x = G.solve_shifted(state.alpha(), y);
  report.counters.shift_solves += 1;

  switch (form) {
    case UpdateForm::original_rhs:
      for (int i = 0; i < m; ++i) {
        const double sign = (i % 2 == 0) ? 1.0 : -1.0;
        const double proj = p[static_cast<size_t>(i)].dot(y);
        x += sign * tau[static_cast<size_t>(i)] * proj * p[static_cast<size_t>(i)];
        report.counters.inner_products += 1;
        report.counters.vector_updates += 1;
      }
      break;
    case UpdateForm::running_u:
      for (int i = 0; i < m; ++i) {
        const double sign = (i % 2 == 0) ? 1.0 : -1.0;
        const double proj = u[static_cast<size_t>(i)].dot(x);
        x += sign * tau[static_cast<size_t>(i)] * proj * p[static_cast<size_t>(i)];
        report.counters.inner_products += 1;
        report.counters.vector_updates += 1;
      }
      break;
    case UpdateForm::running_p_flipped:
      for (int i = 0; i < m; ++i) {
        const double sign = (i % 2 == 0) ? -1.0 : 1.0;
        const double proj = p[static_cast<size_t>(i)].dot(x);
        x += sign * tau[static_cast<size_t>(i)] * proj * p[static_cast<size_t>(i)];
        report.counters.inner_products += 1;
        report.counters.vector_updates += 1;
      }
      break;
  }
  const auto t1 = std::chrono::steady_clock::now();
  report.wall_time = std::chrono::duration<double>(t1 - t0).count();

  Vector residual = state.apply_B(x, &report.counters) + G.apply(x) - y;
  report.counters.inner_products += 2;  // the two norms
  report.rel_residual = residual.norm() / y.norm();
  report.x = std::move(x);
  return report;
}

SolveReport solve_full(const LbfgsPairs& pairs, const ShiftOperator& G,
                       const Vector& y, const GuardParams& guard, UpdateForm form) {
  const auto t0 = std::chrono::steady_clock::now();
  const ShiftedSolverState state = precompute(pairs, G, guard);
  const auto t1 = std::chrono::steady_clock::now();
  SolveReport report = shifted_solve(state, G, y, form);
  report.counters += state.precompute_counters();
  report.wall_time += std::chrono::duration<double>(t1 - t0).count();

  // Cost invariants.  The recursion performs 2k^2 + 5k + 3 inner products
  // and 2k^2 - 2k + 1 vector updates at most (the solve loop contributes
  // exactly 2k of each); unrolling adds k^2 + k inner products and the
  // residual check at most 4k more.  Exceeding these means the
  // implementation regressed.
  const auto k = static_cast<std::uint64_t>(state.pair_count());
  const std::uint64_t recursion_ip_budget = 2 * k * k + 5 * k + 3;
  const std::uint64_t recursion_vu_budget = 2 * k * k - std::min(2 * k, 2 * k * k) + 1;
  const std::uint64_t slack = 4 * k;
  const std::uint64_t recursion_ip =
      state.recursion_counters().inner_products + 2 * k;
  const std::uint64_t recursion_vu =
      state.recursion_counters().vector_updates + 2 * k;
  const std::uint64_t total_ip_budget = recursion_ip_budget + (k * k + k) + slack;
  if (recursion_ip > recursion_ip_budget || recursion_vu > recursion_vu_budget + slack ||
      report.counters.inner_products > total_ip_budget)
    throw std::logic_error("solve_full: operation-count budget exceeded");
  return report;
}

}  // namespace slbfgs
