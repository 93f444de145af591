// Command-line front end: single solves, benchmark sweeps, self tests, and
// report verification for shifted L-BFGS systems.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "slbfgs/slbfgs.hpp"

namespace {

using namespace slbfgs;

constexpr const char* kCsvHeader =
    "method,n,k,shift,sigma,seed,time_s,iters,rel_residual,inner_products,guard";

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitGuardRejection = 2;
constexpr int kExitNonConvergence = 3;
constexpr int kExitParse = 4;

std::string guard_tag(const GuardVerdict& v) {
  switch (v.reason) {
    case GuardVerdict::Reason::ok: return "ok";
    case GuardVerdict::Reason::curvature: return "reject(curvature)";
    case GuardVerdict::Reason::frobenius_budget: return "reject(frobenius)";
    case GuardVerdict::Reason::scaling: return "reject(scaling)";
  }
  return "unknown";
}

struct CsvRow {
  std::string method;
  Index n = 0;
  int k = 0;
  std::string shift;
  double sigma = 0.0;
  std::string seed;
  double time_s = 0.0;
  int iters = 0;
  double rel_residual = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t inner_products = 0;
  std::string guard = "ok";
};

void emit_row(std::ostream& out, const CsvRow& row) {
  out << row.method << ',' << row.n << ',' << row.k << ',' << row.shift << ','
      << std::setprecision(17) << row.sigma << ',' << row.seed << ','
      << std::fixed << std::setprecision(6) << row.time_s << std::defaultfloat
      << ',' << row.iters << ',' << std::setprecision(17) << row.rel_residual
      << ',' << row.inner_products << ',' << row.guard << '\n';
}

struct GuardFlags {
  double delta = 1e-8;
  double eta = 1e8;
  double epsilon = 1e-4;

  GuardParams params() const {
    GuardParams g;
    g.delta = delta;
    g.eta = eta;
    g.epsilon = epsilon;
    return g;
  }

  void attach(CLI::App* cmd) {
    cmd->add_option("--delta", delta, "Curvature floor for stored pairs");
    cmd->add_option("--eta", eta, "Budget on the sum of squared y norms");
    cmd->add_option("--epsilon", epsilon, "Scaling floor: require gamma*theta_min > epsilon");
  }
};

std::unique_ptr<ShiftOperator> generate_shift(const std::string& kind, Index n,
                                              double sigma, std::uint64_t seed) {
  if (kind == "scalar") return std::make_unique<ScalarShift>(n, sigma);
  if (kind == "diag") return std::make_unique<DiagonalShift>(gen_diagonal_shift(n, sigma, seed));
  if (kind == "tridiag")
    return std::make_unique<TridiagonalShift>(gen_tridiagonal_shift(n, sigma, seed));
  throw CLI::ValidationError("--gen/--shift", "unknown shift kind: " + kind);
}

Vector generate_rhs(Index n, std::uint64_t seed) {
  return Rng(seed).substream(11).uniform_vector(n, -1.0, 1.0);
}

struct Instance {
  LbfgsPairs pairs;
  std::unique_ptr<ShiftOperator> shift;
  Vector rhs;
  double sigma = 0.0;
};

SolveReport dispatch_method(const std::string& method, const Instance& inst,
                            const GuardParams& guard, double tol, Index oracle_cap) {
  if (method == "recursion") return solve_full(inst.pairs, *inst.shift, inst.rhs, guard);
  IterativeConfig cfg;
  cfg.tol = tol;
  if (method == "cg") return cg_solve(inst.pairs, *inst.shift, inst.rhs, cfg);
  if (method == "pcg") return pcg_jacobi_solve(inst.pairs, *inst.shift, inst.rhs, cfg);
  if (method == "oracle") return dense_oracle_solve(inst.pairs, *inst.shift, inst.rhs, oracle_cap);
  throw CLI::ValidationError("--method", "unknown method: " + method);
}

// ---------------------------------------------------------------- solve ----

struct SolveArgs {
  std::string gen_kind;
  std::string objective = "none";
  std::string spec_file;
  std::string pairs_file, shift_kind, shift_file, rhs_file;
  Index n = 1000;
  int k = 5;
  int capacity = 6;
  double sigma = 0.1;
  bool sigma_random = false;
  std::uint64_t seed = 0;
  std::string method = "recursion";
  double tol = IterativeConfig{}.tol;
  Index oracle_cap = 2000;
  GuardFlags guard;
  std::string out_file;
  std::string dump_pairs, dump_shift, dump_rhs;
};

ProblemSpec::ShiftKind parse_shift_kind(const std::string& kind) {
  if (kind == "scalar") return ProblemSpec::ShiftKind::scalar;
  if (kind == "diag") return ProblemSpec::ShiftKind::diagonal;
  if (kind == "tridiag") return ProblemSpec::ShiftKind::tridiagonal;
  throw CLI::ValidationError("--gen/--shift", "unknown shift kind: " + kind);
}

ProblemSpec::ObjectiveKind parse_objective(const std::string& name) {
  if (name == "none") return ProblemSpec::ObjectiveKind::none;
  if (name == "quadratic") return ProblemSpec::ObjectiveKind::quadratic;
  if (name == "rosenbrock" || name == "extended_rosenbrock")
    return ProblemSpec::ObjectiveKind::extended_rosenbrock;
  throw CLI::ValidationError("--objective", "unknown objective: " + name);
}

/// Synthetic instance from a ProblemSpec.  With an objective the pairs come
/// from an L-BFGS run on it and the right-hand side is -gradient (the
/// trust-region optimality system); otherwise both are random draws.
Instance instance_from_spec(const ProblemSpec& spec, double delta, int capacity) {
  const std::string kind(to_string(spec.shift_kind));
  if (spec.objective != ProblemSpec::ObjectiveKind::none) {
    const auto objective = make_objective(spec);
    CollectResult collected = run_lbfgs_collect(*objective, spec.k, delta);
    if (spec.shift_kind == ProblemSpec::ShiftKind::scalar) {
      TrustRegionSystem system =
          trust_region_system(collected.pairs, collected.gradient, spec.sigma);
      return Instance{std::move(collected.pairs),
                      std::make_unique<ScalarShift>(std::move(system.shift)),
                      std::move(system.rhs), spec.sigma};
    }
    return Instance{std::move(collected.pairs),
                    generate_shift(kind, spec.n, spec.sigma, spec.seed),
                    -collected.gradient, spec.sigma};
  }
  return Instance{gen_random_pairs(spec.n, spec.k, spec.seed, delta, capacity),
                  generate_shift(kind, spec.n, spec.sigma, spec.seed),
                  generate_rhs(spec.n, spec.seed), spec.sigma};
}

Instance build_instance(const SolveArgs& a) {
  if (!a.spec_file.empty()) {
    return instance_from_spec(load_problem_spec(a.spec_file), a.guard.delta, a.capacity);
  }
  if (!a.gen_kind.empty()) {
    ProblemSpec spec;
    spec.n = a.n;
    spec.k = a.k;
    spec.shift_kind = parse_shift_kind(a.gen_kind);
    spec.sigma = a.sigma_random ? Rng(a.seed).substream(9).uniform01() : a.sigma;
    if (!(spec.sigma > 0.0)) spec.sigma = 0.1;
    spec.seed = a.seed;
    spec.objective = parse_objective(a.objective);
    return instance_from_spec(spec, a.guard.delta, a.capacity);
  }
  if (a.pairs_file.empty() || a.rhs_file.empty())
    throw CLI::ValidationError("solve", "need --gen KIND, --spec FILE, or --pairs/--rhs files");
  LbfgsPairs pairs = load_pairs(a.pairs_file, a.capacity);
  const Index n = pairs.dim();
  std::unique_ptr<ShiftOperator> shift;
  double sigma = a.sigma;
  if (a.shift_kind == "scalar") {
    shift = std::make_unique<ScalarShift>(n, a.sigma);
  } else if (a.shift_kind == "diag") {
    shift = std::make_unique<DiagonalShift>(load_diagonal(a.shift_file));
    sigma = shift->theta_min();
  } else if (a.shift_kind == "tridiag") {
    shift = std::make_unique<TridiagonalShift>(load_tridiagonal(a.shift_file));
    sigma = shift->theta_min();
  } else {
    throw CLI::ValidationError("--shift", "unknown or missing shift kind: " + a.shift_kind);
  }
  Vector rhs = load_vector(a.rhs_file);
  return Instance{std::move(pairs), std::move(shift), std::move(rhs), sigma};
}

void dump_instance(const SolveArgs& a, const Instance& inst) {
  if (!a.dump_pairs.empty()) save_pairs(inst.pairs, a.dump_pairs);
  if (!a.dump_rhs.empty()) save_vector(inst.rhs, a.dump_rhs);
  if (!a.dump_shift.empty()) {
    if (const auto* diag = dynamic_cast<const DiagonalShift*>(inst.shift.get()))
      save_diagonal(*diag, a.dump_shift);
    else if (const auto* tri = dynamic_cast<const TridiagonalShift*>(inst.shift.get()))
      save_tridiagonal(*tri, a.dump_shift);
    else
      save_diagonal(DiagonalShift(inst.shift->diagonal()), a.dump_shift);
  }
}

int run_solve(const SolveArgs& a) {
  const Instance inst = build_instance(a);
  dump_instance(a, inst);

  CsvRow row;
  row.n = inst.pairs.dim();
  row.k = inst.pairs.size();
  row.shift = inst.shift->kind();
  row.sigma = inst.sigma;
  row.seed = std::to_string(a.seed);

  const GuardVerdict verdict = check_guard(inst.pairs, *inst.shift, a.guard.params());
  row.guard = guard_tag(verdict);
  if (!verdict.ok()) {
    row.method = a.method == "pcg" ? "pcg_diag" : a.method;
    std::cout << kCsvHeader << '\n';
    emit_row(std::cout, row);
    std::cerr << "guard rejection: " << verdict.message()
              << " (discard the stored pairs and restart)\n";
    return kExitGuardRejection;
  }

  int exit_code = kExitOk;
  SolveReport report;
  try {
    report = dispatch_method(a.method, inst, a.guard.params(), a.tol, a.oracle_cap);
  } catch (const NonConvergenceError& e) {
    report = e.best_iterate();
    exit_code = kExitNonConvergence;
    std::cerr << e.what() << '\n';
  }

  row.method = to_string(report.method);
  row.time_s = report.wall_time;
  row.iters = report.iterations;
  row.rel_residual = report.rel_residual;
  row.inner_products = report.counters.inner_products;

  if (!a.out_file.empty()) save_vector(report.x, a.out_file);
  std::cout << kCsvHeader << '\n';
  emit_row(std::cout, row);
  std::cerr << row.method << " n=" << row.n << " k=" << row.k << " " << row.shift
            << ": residual " << std::scientific << std::setprecision(2)
            << row.rel_residual << ", " << std::fixed << std::setprecision(6)
            << row.time_s << " s\n";
  return exit_code;
}

// ---------------------------------------------------------------- bench ----

struct BenchArgs {
  std::vector<Index> sizes{10000, 20000, 50000};
  std::vector<std::string> methods{"recursion", "cg", "pcg"};
  int reps = 3;
  std::uint64_t seed = 0;
  int k = 5;
  int capacity = 6;
  double sigma = 0.1;
  std::string shift_kind = "tridiag";
  double tol = IterativeConfig{}.tol;
  int threads = 1;
  GuardFlags guard;
};

std::uint64_t instance_seed(std::uint64_t base, Index n) {
  return Rng(base).substream(static_cast<std::uint64_t>(n)).next_u64();
}

int run_bench(const BenchArgs& a) {
  struct Cell {
    size_t size_idx, method_idx;
    int rep;
  };
  std::vector<Cell> cells;
  for (size_t si = 0; si < a.sizes.size(); ++si)
    for (size_t mi = 0; mi < a.methods.size(); ++mi)
      for (int rep = 0; rep < a.reps; ++rep) cells.push_back({si, mi, rep});

  // One instance per size, shared across methods and reps.
  std::vector<Instance> instances;
  instances.reserve(a.sizes.size());
  for (Index n : a.sizes) {
    const std::uint64_t seed = instance_seed(a.seed, n);
    instances.push_back(Instance{gen_random_pairs(n, a.k, seed, a.guard.delta, a.capacity),
                                 generate_shift(a.shift_kind, n, a.sigma, seed),
                                 generate_rhs(n, seed), a.sigma});
    instances.back().pairs.unrolled();  // shared read-only from here on
  }

  std::vector<CsvRow> rows(cells.size());
  std::atomic<size_t> next{0};
  std::atomic<bool> any_nonconvergence{false};
  std::atomic<bool> any_guard_rejection{false};

  const auto worker = [&] {
    for (size_t c = next.fetch_add(1); c < cells.size(); c = next.fetch_add(1)) {
      const Cell& cell = cells[c];
      const Instance& inst = instances[cell.size_idx];
      const std::string& method = a.methods[cell.method_idx];

      CsvRow row;
      row.n = inst.pairs.dim();
      row.k = inst.pairs.size();
      row.shift = inst.shift->kind();
      row.sigma = inst.sigma;
      row.seed = std::to_string(instance_seed(a.seed, inst.pairs.dim()));
      const GuardVerdict verdict = check_guard(inst.pairs, *inst.shift, a.guard.params());
      row.guard = guard_tag(verdict);
      row.method = method == "pcg" ? "pcg_diag" : method;
      if (verdict.ok()) {
        try {
          SolveReport report =
              dispatch_method(method, inst, a.guard.params(), a.tol, 2000);
          row.method = to_string(report.method);
          row.time_s = report.wall_time;
          row.iters = report.iterations;
          row.rel_residual = report.rel_residual;
          row.inner_products = report.counters.inner_products;
        } catch (const NonConvergenceError& e) {
          const SolveReport& best = e.best_iterate();
          row.time_s = best.wall_time;
          row.iters = best.iterations;
          row.rel_residual = best.rel_residual;
          row.inner_products = best.counters.inner_products;
          any_nonconvergence = true;
        }
      } else {
        any_guard_rejection = true;
      }
      rows[c] = std::move(row);
    }
  };

  const int threads = std::max(1, a.threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::cout << kCsvHeader << '\n';
  for (const CsvRow& row : rows) emit_row(std::cout, row);

  // Median summary per (size, method); lower median keeps integers exact.
  const auto lower_median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[(v.size() - 1) / 2];
  };
  std::cerr << "method        n        median_time_s  iters  rel_residual\n";
  for (size_t si = 0; si < a.sizes.size(); ++si) {
    for (size_t mi = 0; mi < a.methods.size(); ++mi) {
      std::vector<double> times, iters, residuals, dots;
      for (size_t c = 0; c < cells.size(); ++c) {
        if (cells[c].size_idx != si || cells[c].method_idx != mi) continue;
        times.push_back(rows[c].time_s);
        iters.push_back(rows[c].iters);
        residuals.push_back(rows[c].rel_residual);
        dots.push_back(static_cast<double>(rows[c].inner_products));
      }
      CsvRow median;
      const size_t some = [&] {
        for (size_t c = 0; c < cells.size(); ++c)
          if (cells[c].size_idx == si && cells[c].method_idx == mi) return c;
        return size_t{0};
      }();
      median = rows[some];
      median.seed = "median";
      median.time_s = lower_median(times);
      median.iters = static_cast<int>(lower_median(iters));
      median.rel_residual = lower_median(residuals);
      median.inner_products = static_cast<std::uint64_t>(lower_median(dots));
      emit_row(std::cout, median);
      std::ostringstream line;
      line << std::left << std::setw(12) << median.method << "  " << std::setw(8)
           << median.n << " " << std::fixed << std::setprecision(6) << std::setw(13)
           << median.time_s << "  " << std::setw(5) << median.iters << "  "
           << std::scientific << std::setprecision(2) << median.rel_residual;
      std::cerr << line.str() << '\n';
    }
  }

  if (any_guard_rejection) return kExitGuardRejection;
  if (any_nonconvergence) return kExitNonConvergence;
  return kExitOk;
}

// ------------------------------------------------------------- selftest ----

struct SelftestArgs {
  std::string suite = "all";
  int seeds = 40;
  bool inject_sign_flip = false;
};

struct SuiteResult {
  int passed = 0;
  int total = 0;
  bool ok() const { return passed == total; }
};

struct SelftestInstance {
  LbfgsPairs pairs;
  std::unique_ptr<ShiftOperator> shift;
  Vector rhs;
};

SelftestInstance selftest_instance(std::uint64_t seed, bool force_pairs = false) {
  Rng dims = Rng(seed).substream(13);
  const Index n = 1 + static_cast<Index>(dims.next_u64() % 300);
  int k = static_cast<int>(dims.next_u64() % 8);
  if (force_pairs && k == 0) k = 1;
  static constexpr const char* kinds[] = {"scalar", "diag", "tridiag"};
  const double sigma = 0.05 + dims.uniform01();
  return SelftestInstance{gen_random_pairs(n, k, seed, 1e-8, 8),
                          generate_shift(kinds[seed % 3], n, sigma, seed),
                          generate_rhs(n, seed)};
}

SuiteResult suite_oracle(int seeds, bool inject_sign_flip) {
  SuiteResult result;
  const UpdateForm form =
      inject_sign_flip ? UpdateForm::running_p_flipped : UpdateForm::original_rhs;
  for (int s = 1; s <= seeds; ++s) {
    ++result.total;
    const auto inst = selftest_instance(static_cast<std::uint64_t>(s));
    const auto direct = solve_full(inst.pairs, *inst.shift, inst.rhs, {}, form);
    const auto alternative =
        solve_full(inst.pairs, *inst.shift, inst.rhs, {}, UpdateForm::running_u);
    const auto oracle = dense_oracle_solve(inst.pairs, *inst.shift, inst.rhs);
    const double err = (direct.x - oracle.x).norm() / oracle.x.norm();
    const double err_alt = (alternative.x - oracle.x).norm() / oracle.x.norm();
    if (err <= 1e-10 && err_alt <= 1e-10) ++result.passed;
  }
  return result;
}

SuiteResult suite_guard(int seeds) {
  SuiteResult result;
  for (int s = 1; s <= seeds; ++s) {
    ++result.total;
    const auto inst = selftest_instance(static_cast<std::uint64_t>(s), true);
    const auto state = precompute(inst.pairs, *inst.shift);
    const double theta = inst.shift->theta_min();
    const double bound =
        theta / (1.0 / inst.pairs.gamma() +
                 inst.pairs.y_frobenius_sq() / inst.pairs.min_curvature() + theta);
    bool ok = true;
    for (size_t i = 0; i < state.denominators().size(); ++i) {
      if (i % 2 == 0) {
        ok = ok && state.denominators()[i] >= bound - 0.01 * bound;
        ok = ok && state.tau()[i] >= 1.0;
      } else {
        ok = ok && state.tau()[i] > 0.0 && state.tau()[i] < 1.0;
      }
    }
    if (ok) ++result.passed;
  }
  return result;
}

SuiteResult suite_counters() {
  SuiteResult result;
  for (int k = 1; k <= 7; ++k) {
    ++result.total;
    const Index n = 120;
    const auto pairs = gen_random_pairs(n, k, static_cast<std::uint64_t>(k), 1e-8, 8);
    const ScalarShift G(n, 0.5);
    const auto report = solve_full(pairs, G, generate_rhs(n, static_cast<std::uint64_t>(k)));
    const auto uk = static_cast<std::uint64_t>(k);
    const std::uint64_t budget = (2 * uk * uk + 5 * uk + 3) + (uk * uk + uk) + 4 * uk;
    const bool exact = report.counters.inner_products == 3 * uk * uk + 5 * uk + 2 &&
                       report.counters.shift_solves == 2 * uk + 1;
    if (exact && report.counters.inner_products <= budget) ++result.passed;
  }
  return result;
}

SuiteResult suite_negative(int seeds) {
  SuiteResult result;
  for (int s = 1; s <= seeds; ++s) {
    ++result.total;
    const auto inst = selftest_instance(static_cast<std::uint64_t>(s), true);
    const auto direct = solve_full(inst.pairs, *inst.shift, inst.rhs);
    const Vector naive = naive_shifted_two_loop(inst.pairs, *inst.shift, inst.rhs);
    const double naive_residual =
        (apply_shifted_operator(inst.pairs, *inst.shift, naive) - inst.rhs).norm() /
        inst.rhs.norm();
    if (naive_residual / std::max(direct.rel_residual, 1e-300) >= 1e6) ++result.passed;
  }
  return result;
}

int run_selftest(const SelftestArgs& a) {
  bool all_ok = true;
  const auto report = [&](const char* name, const SuiteResult& r) {
    std::cout << "[selftest] " << name << ": " << r.passed << "/" << r.total
              << (r.ok() ? " pass" : " FAIL") << '\n';
    all_ok = all_ok && r.ok();
  };
  const bool all = a.suite == "all";
  if (all || a.suite == "oracle") report("oracle-equivalence", suite_oracle(a.seeds, a.inject_sign_flip));
  if (all || a.suite == "guard") report("guard-bound", suite_guard(a.seeds));
  if (all || a.suite == "counters") report("operation-counters", suite_counters());
  if (all || a.suite == "negative") report("negative-control", suite_negative(a.seeds));
  std::cout << (all_ok ? "[selftest] all selected suites pass\n"
                       : "[selftest] FAILURES detected\n");
  return all_ok ? kExitOk : kExitOther;
}

// --------------------------------------------------------------- verify ----

struct VerifyArgs {
  std::string pairs_file, shift_kind, shift_file, rhs_file, solution_file;
  double sigma = 0.1;
  double expect = std::numeric_limits<double>::quiet_NaN();
  double match_tol = 1e-15;
};

int run_verify(const VerifyArgs& a) {
  const LbfgsPairs pairs = load_pairs(a.pairs_file);
  const Index n = pairs.dim();
  std::unique_ptr<ShiftOperator> shift;
  if (a.shift_kind == "scalar")
    shift = std::make_unique<ScalarShift>(n, a.sigma);
  else if (a.shift_kind == "diag")
    shift = std::make_unique<DiagonalShift>(load_diagonal(a.shift_file));
  else if (a.shift_kind == "tridiag")
    shift = std::make_unique<TridiagonalShift>(load_tridiagonal(a.shift_file));
  else
    throw CLI::ValidationError("--shift", "unknown shift kind: " + a.shift_kind);

  const Vector y = load_vector(a.rhs_file);
  const Vector x = load_vector(a.solution_file);
  if (y.size() != n || x.size() != n)
    throw std::invalid_argument("verify: dimension mismatch between files");

  const double rel =
      (apply_shifted_operator(pairs, *shift, x) - y).norm() / y.norm();
  std::cout << std::setprecision(17) << rel << '\n';
  if (!std::isnan(a.expect)) {
    const double diff = std::abs(rel - a.expect);
    if (diff > a.match_tol) {
      std::cerr << "verify: recomputed residual " << rel << " differs from expected "
                << a.expect << " by " << diff << " (tolerance " << a.match_tol << ")\n";
      return kExitOther;
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Matrix-free solver and benchmark harness for shifted L-BFGS systems (B_k + G) x = y"};
  app.require_subcommand(1);

  SolveArgs solve_args;
  CLI::App* solve = app.add_subcommand("solve", "Solve one system and emit a CSV report row");
  solve->add_option("--gen", solve_args.gen_kind,
                    "Generate a synthetic instance with this shift kind (scalar|diag|tridiag)");
  solve->add_option("--objective", solve_args.objective,
                    "Generate pairs by running L-BFGS on this objective and solve the "
                    "trust-region system (none|quadratic|rosenbrock)");
  solve->add_option("--spec", solve_args.spec_file, "Generate the instance from a key=value manifest");
  solve->add_option("--pairs", solve_args.pairs_file, "Pairs file (header 'n k gamma', S and Y blocks)");
  solve->add_option("--shift", solve_args.shift_kind, "Shift kind for file input (scalar|diag|tridiag)");
  solve->add_option("--shift-file", solve_args.shift_file, "Shift file for diag/tridiag kinds");
  solve->add_option("--rhs", solve_args.rhs_file, "Right-hand side vector file");
  solve->add_option("--n", solve_args.n, "Dimension (generated instances)");
  solve->add_option("--k", solve_args.k, "Stored pair count (generated instances)");
  solve->add_option("--M", solve_args.capacity, "Pair capacity");
  solve->add_option("--sigma", solve_args.sigma, "Shift scale");
  solve->add_flag("--sigma-random", solve_args.sigma_random, "Draw sigma from U(0,1) under --seed");
  solve->add_option("--seed", solve_args.seed, "Generator seed");
  solve->add_option("--method", solve_args.method, "recursion|cg|pcg|oracle")
      ->check(CLI::IsMember({"recursion", "cg", "pcg", "oracle"}));
  solve->add_option("--tol", solve_args.tol, "Iterative relative-residual target");
  solve->add_option("--oracle-cap", solve_args.oracle_cap, "Dense oracle dimension cap");
  solve_args.guard.attach(solve);
  solve->add_option("--out", solve_args.out_file, "Write the solution vector here");
  solve->add_option("--dump-pairs", solve_args.dump_pairs, "Write the instance pairs here");
  solve->add_option("--dump-shift", solve_args.dump_shift, "Write the instance shift here");
  solve->add_option("--dump-rhs", solve_args.dump_rhs, "Write the instance rhs here");

  BenchArgs bench_args;
  CLI::App* bench = app.add_subcommand("bench", "Sweep sizes and methods, emit CSV plus medians");
  bench->add_option("--sizes", bench_args.sizes, "Problem sizes")->delimiter(',');
  bench->add_option("--methods", bench_args.methods, "Methods to run")->delimiter(',');
  bench->add_option("--reps", bench_args.reps, "Repetitions per cell")->check(CLI::PositiveNumber);
  bench->add_option("--seed", bench_args.seed, "Base seed");
  bench->add_option("--k", bench_args.k, "Stored pair count");
  bench->add_option("--M", bench_args.capacity, "Pair capacity");
  bench->add_option("--sigma", bench_args.sigma, "Shift scale");
  bench->add_option("--shift", bench_args.shift_kind, "Shift kind (scalar|diag|tridiag)");
  bench->add_option("--tol", bench_args.tol, "Iterative relative-residual target");
  bench->add_option("--threads", bench_args.threads, "Worker threads for independent cells");
  bench_args.guard.attach(bench);

  SelftestArgs selftest_args;
  CLI::App* selftest = app.add_subcommand("selftest", "Run the built-in property suites");
  selftest->add_option("--suite", selftest_args.suite, "all|oracle|guard|counters|negative")
      ->check(CLI::IsMember({"all", "oracle", "guard", "counters", "negative"}));
  selftest->add_option("--seeds", selftest_args.seeds, "Instances per suite")
      ->check(CLI::PositiveNumber);
  selftest->add_flag("--inject-sign-flip", selftest_args.inject_sign_flip,
                     "Use the known-wrong flipped update form (the oracle suite must then fail)");

  VerifyArgs verify_args;
  CLI::App* verify = app.add_subcommand(
      "verify", "Recompute a relative residual from instance and solution files");
  verify->add_option("--pairs", verify_args.pairs_file, "Pairs file")->required();
  verify->add_option("--shift", verify_args.shift_kind, "Shift kind (scalar|diag|tridiag)")->required();
  verify->add_option("--shift-file", verify_args.shift_file, "Shift file for diag/tridiag");
  verify->add_option("--sigma", verify_args.sigma, "Sigma for scalar shifts");
  verify->add_option("--rhs", verify_args.rhs_file, "Right-hand side file")->required();
  verify->add_option("--solution", verify_args.solution_file, "Solution vector file")->required();
  verify->add_option("--expect", verify_args.expect, "Expected residual to match");
  verify->add_option("--match-tol", verify_args.match_tol, "Absolute match tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitParse;
  }

  try {
    if (solve->parsed()) return run_solve(solve_args);
    if (bench->parsed()) return run_bench(bench_args);
    if (selftest->parsed()) return run_selftest(selftest_args);
    if (verify->parsed()) return run_verify(verify_args);
  } catch (const GuardRejectionError& e) {
    std::cerr << e.what() << '\n';
    return kExitGuardRejection;
  } catch (const NonConvergenceError& e) {
    std::cerr << e.what() << '\n';
    return kExitNonConvergence;
  } catch (const ParseError& e) {
    std::cerr << e.what() << '\n';
    return kExitParse;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << '\n';
    return kExitParse;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitOther;
  }
  return kExitOther;
}
