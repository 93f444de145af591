#include "slbfgs/problems.hpp"

#include <chrono>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "slbfgs/rng.hpp"

namespace slbfgs {

std::string_view to_string(ProblemSpec::ShiftKind kind) {
  switch (kind) {
    case ProblemSpec::ShiftKind::scalar: return "scalar";
    case ProblemSpec::ShiftKind::diagonal: return "diag";
    case ProblemSpec::ShiftKind::tridiagonal: return "tridiag";
  }
  return "unknown";
}

std::string_view to_string(ProblemSpec::ObjectiveKind kind) {
  switch (kind) {
    case ProblemSpec::ObjectiveKind::none: return "none";
    case ProblemSpec::ObjectiveKind::quadratic: return "quadratic";
    case ProblemSpec::ObjectiveKind::extended_rosenbrock: return "extended_rosenbrock";
  }
  return "unknown";
}

TridiagonalShift gen_tridiagonal_shift(Index n, double sigma, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("gen_tridiagonal_shift: n must be >= 1");
  if (!(sigma > 0.0)) throw std::invalid_argument("gen_tridiagonal_shift: sigma must be > 0");

  Rng root(seed);
  Rng diag_stream = root.substream(0);
  Rng off_stream = root.substream(1);

  Vector d(n);
  for (Index i = 0; i < n; ++i) d[i] = 2.0 + sigma + diag_stream.uniform01();
  Vector e = n > 1 ? off_stream.uniform_vector(n - 1, -1.0, 0.0) : Vector(0);
  return TridiagonalShift(std::move(d), std::move(e));
}

DiagonalShift gen_diagonal_shift(Index n, double sigma, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("gen_diagonal_shift: n must be >= 1");
  if (!(sigma > 0.0)) throw std::invalid_argument("gen_diagonal_shift: sigma must be > 0");
  Rng stream = Rng(seed).substream(7);
  return DiagonalShift(stream.uniform_vector(n, sigma, sigma + 2.0));
}

LbfgsPairs gen_random_pairs(Index n, int k, std::uint64_t seed, double delta,
                            int capacity) {
  if (k < 0) throw std::invalid_argument("gen_random_pairs: k must be >= 0");
  if (capacity <= 0) capacity = std::max(k, 6);
  if (capacity < k) throw std::invalid_argument("gen_random_pairs: capacity < k");

  Rng root(seed);
  Rng q_stream = root.substream(0);
  Rng s_stream = root.substream(1);

  // Random SPD quadratic Q = c I + sum_t w_t v_t v_t^T applied matrix-free.
  const double c = q_stream.uniform(0.5, 2.0);
  constexpr int kRankOnes = 3;
  double w[kRankOnes];
  std::vector<Vector> v;
  v.reserve(kRankOnes);
  for (int t = 0; t < kRankOnes; ++t) {
    w[t] = q_stream.uniform(0.1, 1.0);
    Vector vt = q_stream.uniform_vector(n, -1.0, 1.0);
    vt.normalize();
    v.push_back(std::move(vt));
  }
  const auto apply_Q = [&](const Vector& x) {
    Vector out = c * x;
    for (int t = 0; t < kRankOnes; ++t) out += w[t] * v[static_cast<size_t>(t)].dot(x) * v[static_cast<size_t>(t)];
    return out;
  };

  LbfgsPairs pairs(n, capacity, delta);
  while (pairs.size() < k) {
    const Vector s = s_stream.uniform_vector(n, -1.0, 1.0);
    if (pairs.push(s, apply_Q(s)) != LbfgsPairs::PushResult::accepted) continue;
  }
  return pairs;
}

QuadraticObjective::QuadraticObjective(Vector d) : d_(std::move(d)) {
  if (d_.size() < 1 || d_.minCoeff() <= 0.0)
    throw std::invalid_argument("QuadraticObjective: diagonal must be positive");
}

double QuadraticObjective::value(const Vector& x) const {
  return 0.5 * x.dot(d_.cwiseProduct(x));
}

Vector QuadraticObjective::gradient(const Vector& x) const { return d_.cwiseProduct(x); }

Vector QuadraticObjective::start_point() const { return Vector::Ones(d_.size()); }

ExtendedRosenbrock::ExtendedRosenbrock(Index n) : n_(n) {
  if (n < 2 || n % 2 != 0)
    throw std::invalid_argument("ExtendedRosenbrock: n must be even and >= 2");
}

double ExtendedRosenbrock::value(const Vector& x) const {
  double total = 0.0;
  for (Index i = 0; i < n_; i += 2) {
    const double t1 = x[i + 1] - x[i] * x[i];
    const double t2 = 1.0 - x[i];
    total += 100.0 * t1 * t1 + t2 * t2;
  }
  return total;
}

Vector ExtendedRosenbrock::gradient(const Vector& x) const {
  Vector g(n_);
  for (Index i = 0; i < n_; i += 2) {
    const double t1 = x[i + 1] - x[i] * x[i];
    g[i] = -400.0 * x[i] * t1 - 2.0 * (1.0 - x[i]);
    g[i + 1] = 200.0 * t1;
  }
  return g;
}

Vector ExtendedRosenbrock::start_point() const {
  Vector x(n_);
  for (Index i = 0; i < n_; i += 2) {
    x[i] = -1.2;
    x[i + 1] = 1.0;
  }
  return x;
}

std::unique_ptr<Objective> make_objective(const ProblemSpec& spec) {
  switch (spec.objective) {
    case ProblemSpec::ObjectiveKind::quadratic: {
      Rng stream = Rng(spec.seed).substream(2);
      return std::make_unique<QuadraticObjective>(
          stream.uniform_vector(spec.n, 0.5, 10.0));
    }
    case ProblemSpec::ObjectiveKind::extended_rosenbrock:
      return std::make_unique<ExtendedRosenbrock>(spec.n);
    case ProblemSpec::ObjectiveKind::none:
      break;
  }
  throw std::invalid_argument("make_objective: spec names no objective");
}

CollectResult run_lbfgs_collect(const Objective& objective, int num_pairs,
                                double delta) {
  if (num_pairs < 1) throw std::invalid_argument("run_lbfgs_collect: num_pairs must be >= 1");
  const Index n = objective.dim();
  constexpr double kArmijoC1 = 1e-4;
  constexpr int kMaxBacktracks = 60;
  const int max_iterations = 100 * num_pairs + 100;

  LbfgsPairs pairs(n, std::max(num_pairs, 6), delta);
  Vector x = objective.start_point();
  double fx = objective.value(x);
  Vector g = objective.gradient(x);
  const double g0_norm = g.norm();
  const double grad_tol = 1e-10 * std::max(1.0, g0_norm);

  int it = 0;
  bool steepest_next = false;
  for (; it < max_iterations && pairs.size() < num_pairs; ++it) {
    if (g.norm() <= grad_tol)
      throw EarlyTerminationError(std::string(objective.name()) +
                                  ": converged after " + std::to_string(it) +
                                  " iterations with only " + std::to_string(pairs.size()) +
                                  " pairs stored");

    // After a curvature rejection the quasi-Newton model is stale along the
    // current path; one steepest-descent iteration restores y^T s > 0.
    Vector direction = steepest_next ? (-g).eval() : (-pairs.two_loop_solve(g)).eval();
    double slope = g.dot(direction);
    if (slope >= 0.0) {
      direction = -g;
      slope = g.dot(direction);
    }

    double step = 1.0;
    bool accepted = false;
    Vector x_next;
    double f_next = fx;
    for (int bt = 0; bt < kMaxBacktracks; ++bt) {
      x_next = x + step * direction;
      f_next = objective.value(x_next);
      if (f_next <= fx + kArmijoC1 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted)
      throw EarlyTerminationError(std::string(objective.name()) +
                                  ": line search stalled with only " +
                                  std::to_string(pairs.size()) + " pairs stored");

    Vector g_next = objective.gradient(x_next);
    steepest_next =
        pairs.push(x_next - x, g_next - g) != LbfgsPairs::PushResult::accepted;
    x = std::move(x_next);
    fx = f_next;
    g = std::move(g_next);
  }

  if (pairs.size() < num_pairs)
    throw EarlyTerminationError(std::string(objective.name()) +
                                ": iteration cap reached with only " +
                                std::to_string(pairs.size()) + " pairs stored");
  return CollectResult{std::move(pairs), std::move(g), it};
}

TrustRegionSystem trust_region_system(const LbfgsPairs& pairs, const Vector& g,
                                      double sigma) {
  if (!(sigma > 0.0) || sigma > 1.0)
    throw std::invalid_argument("trust_region_system: sigma must lie in (0, 1]");
  if (g.size() != pairs.dim())
    throw std::invalid_argument("trust_region_system: dimension mismatch");
  return TrustRegionSystem{ScalarShift(pairs.dim(), sigma), -g};
}

KktReport kkt_block_solve(const LbfgsPairs& pairs,
                          const std::optional<Vector>& inner_shift_diag,
                          const Vector& a_diag, const Vector& d_diag,
                          const Vector& r1, const Vector& r2,
                          const GuardParams& guard) {
  const Index n = pairs.dim();
  if (a_diag.size() != n || d_diag.size() != n || r1.size() != n || r2.size() != n)
    throw std::invalid_argument("kkt_block_solve: dimension mismatch");
  if (d_diag.minCoeff() <= 0.0)
    throw std::invalid_argument("kkt_block_solve: D must be positive");
  if (inner_shift_diag && inner_shift_diag->size() != n)
    throw std::invalid_argument("kkt_block_solve: inner shift dimension mismatch");

  // Combined shift A^T D^{-1} A (+ inner diagonal), entries a_i^2 / d_i.
  Vector combined = a_diag.cwiseAbs2().cwiseQuotient(d_diag);
  if (inner_shift_diag) combined += *inner_shift_diag;
  if (combined.minCoeff() <= 0.0) {
    GuardVerdict verdict;
    verdict.reason = GuardVerdict::Reason::scaling;
    verdict.measured = combined.minCoeff();
    verdict.limit = 0.0;
    throw GuardRejectionError(verdict);
  }
  const DiagonalShift G(combined);

  const Vector rhs1 = r1 - a_diag.cwiseProduct(r2.cwiseQuotient(d_diag));
  KktReport out;
  out.inner = solve_full(pairs, G, rhs1, guard);
  out.v1 = out.inner.x;
  out.v2 = (r2 - a_diag.cwiseProduct(out.v1)).cwiseQuotient(d_diag);

  // Residual of the full block system, matrix-free.
  Vector t1 = pairs.apply_B(pairs.size(), out.v1) +
              2.0 * a_diag.cwiseAbs2().cwiseQuotient(d_diag).cwiseProduct(out.v1) +
              a_diag.cwiseProduct(out.v2) - r1;
  if (inner_shift_diag) t1 += inner_shift_diag->cwiseProduct(out.v1);
  const Vector t2 = a_diag.cwiseProduct(out.v1) + d_diag.cwiseProduct(out.v2) - r2;
  out.block_residual = std::sqrt(t1.squaredNorm() + t2.squaredNorm()) /
                       std::sqrt(r1.squaredNorm() + r2.squaredNorm());
  return out;
}

}  // namespace slbfgs
