#include "slbfgs/baselines.hpp"

#include <chrono>
#include <string>

#include <Eigen/Cholesky>

#include "slbfgs/errors.hpp"

namespace slbfgs {

Vector apply_shifted_operator(const LbfgsPairs& pairs, const ShiftOperator& G,
                              const Vector& v, OpCounters* counters) {
  if (v.size() != pairs.dim() || pairs.dim() != G.dim())
    throw std::invalid_argument("apply_shifted_operator: dimension mismatch");
  return pairs.apply_B(pairs.size(), v, counters) + G.apply(v);
}

Vector diagonal_of_B(const LbfgsPairs& pairs) {
  const UnrolledFactors& f = pairs.unrolled();
  Vector diag = Vector::Constant(pairs.dim(), 1.0 / pairs.gamma());
  for (int j = 0; j < pairs.size(); ++j) {
    diag += f.b[static_cast<size_t>(j)].cwiseAbs2();
    diag -= f.a[static_cast<size_t>(j)].cwiseAbs2();
  }
  return diag;
}

namespace {

SolveReport run_cg(const LbfgsPairs& pairs, const ShiftOperator& G, const Vector& y,
                   const IterativeConfig& cfg, const IterateObserver& observer,
                   const Vector* precond_diag, Method method_tag,
                   bool preconditioner_fallback) {
  const Index n = pairs.dim();
  if (y.size() != n || G.dim() != n)
    throw std::invalid_argument("cg_solve: dimension mismatch");
  if (!(cfg.tol > 0.0)) throw std::invalid_argument("cg_solve: tol must be > 0");
  const int max_iter = cfg.max_iterations > 0 ? cfg.max_iterations
                                              : static_cast<int>(10 * n);

  pairs.unrolled();  // build outside the timed region

  SolveReport report;
  report.method = method_tag;
  report.preconditioner_fallback = preconditioner_fallback;

  const auto t0 = std::chrono::steady_clock::now();
  const double y_norm = y.norm();
  report.counters.inner_products += 1;
  Vector x = Vector::Zero(n);
  if (y_norm == 0.0) {
    report.x = std::move(x);
    return report;
  }

  Vector r = y;  // residual for x = 0
  Vector z = precond_diag ? r.cwiseQuotient(*precond_diag).eval() : r;
  Vector d = z;
  double rz = r.dot(z);
  report.counters.inner_products += 1;

  double best_rel = std::numeric_limits<double>::infinity();
  Vector best_x = x;

  bool converged = false;
  int it = 0;
  while (it < max_iter) {
    const Vector Ad = apply_shifted_operator(pairs, G, d, &report.counters);
    const double dAd = d.dot(Ad);
    report.counters.inner_products += 1;
    if (!(dAd > 0.0))
      throw NumericalError("cg_solve: operator lost positive definiteness (d^T A d = " +
                           std::to_string(dAd) + ")");
    const double step = rz / dAd;
    x += step * d;
    r -= step * Ad;
    report.counters.vector_updates += 2;
    ++it;

    double rel = r.norm() / y_norm;
    report.counters.inner_products += 1;
    if (observer) observer(it, x);
    if (rel <= cfg.tol) {
      // Confirm with the true residual; the recurrence drifts.
      const Vector true_r = y - apply_shifted_operator(pairs, G, x, &report.counters);
      rel = true_r.norm() / y_norm;
      report.counters.inner_products += 1;
      report.counters.vector_updates += 1;
      if (rel <= cfg.tol) {
        best_rel = rel;
        best_x = x;
        converged = true;
        break;
      }
      r = true_r;
    }
    if (rel < best_rel) {
      best_rel = rel;
      best_x = x;
    }

    z = precond_diag ? r.cwiseQuotient(*precond_diag).eval() : r;
    const double rz_next = r.dot(z);
    report.counters.inner_products += 1;
    d = z + (rz_next / rz) * d;
    report.counters.vector_updates += 1;
    rz = rz_next;
  }
  const auto t1 = std::chrono::steady_clock::now();
  report.wall_time = std::chrono::duration<double>(t1 - t0).count();
  report.iterations = it;
  report.rel_residual = best_rel;
  report.x = std::move(best_x);

  if (!converged) {
    const Vector true_r = y - apply_shifted_operator(pairs, G, report.x, &report.counters);
    report.rel_residual = true_r.norm() / y_norm;
    throw NonConvergenceError("cg_solve: no convergence to " + std::to_string(cfg.tol) +
                                  " within " + std::to_string(max_iter) + " iterations",
                              report);
  }
  return report;
}

}  // namespace

SolveReport cg_solve(const LbfgsPairs& pairs, const ShiftOperator& G, const Vector& y,
                     const IterativeConfig& cfg, const IterateObserver& observer) {
  return run_cg(pairs, G, y, cfg, observer, nullptr, Method::cg, false);
}

SolveReport pcg_jacobi_solve(const LbfgsPairs& pairs, const ShiftOperator& G,
                             const Vector& y, const IterativeConfig& cfg,
                             const IterateObserver& observer) {
  const Vector precond = diagonal_of_B(pairs) + G.diagonal();
  if (precond.minCoeff() <= 0.0) {
    // Nonpositive entry: the Jacobi preconditioner is unusable here.
    return run_cg(pairs, G, y, cfg, observer, nullptr, Method::cg, true);
  }
  return run_cg(pairs, G, y, cfg, observer, &precond, Method::pcg_diag, false);
}

Matrix assemble_dense_B(const LbfgsPairs& pairs) {
  const Index n = pairs.dim();
  Matrix B = Matrix::Identity(n, n) / pairs.gamma();
  for (int i = 0; i < pairs.size(); ++i) {
    const Vector Bs = B * pairs.s(i);
    B -= (Bs * Bs.transpose()) / pairs.s(i).dot(Bs);
    B += (pairs.y(i) * pairs.y(i).transpose()) / pairs.curvature(i);
  }
  return B;
}

Matrix assemble_dense_G(const ShiftOperator& G) {
  const Index n = G.dim();
  Matrix out(n, n);
  Vector unit = Vector::Zero(n);
  for (Index j = 0; j < n; ++j) {
    unit[j] = 1.0;
    out.col(j) = G.apply(unit);
    unit[j] = 0.0;
  }
  return out;
}

SolveReport dense_oracle_solve(const LbfgsPairs& pairs, const ShiftOperator& G,
                               const Vector& y, Index cap) {
  const Index n = pairs.dim();
  if (n > cap)
    throw CapExceededError("dense_oracle_solve: n = " + std::to_string(n) +
                           " exceeds cap " + std::to_string(cap));
  if (y.size() != n || G.dim() != n)
    throw std::invalid_argument("dense_oracle_solve: dimension mismatch");

  SolveReport report;
  report.method = Method::dense_oracle;

  const auto t0 = std::chrono::steady_clock::now();
  const Matrix A = assemble_dense_B(pairs) + assemble_dense_G(G);
  Vector x = Eigen::LDLT<Matrix>(A).solve(y);
  const auto t1 = std::chrono::steady_clock::now();
  report.wall_time = std::chrono::duration<double>(t1 - t0).count();

  report.rel_residual = (A * x - y).norm() / y.norm();
  report.x = std::move(x);
  return report;
}

}  // namespace slbfgs
