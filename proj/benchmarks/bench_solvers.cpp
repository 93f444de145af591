#include <benchmark/benchmark.h>

#include <memory>

#include "slbfgs/slbfgs.hpp"

namespace {

using namespace slbfgs;

struct BenchInstance {
  LbfgsPairs pairs;
  TridiagonalShift shift;
  Vector rhs;
};

BenchInstance make_instance(Index n, int k) {
  BenchInstance inst{gen_random_pairs(n, k, 42), gen_tridiagonal_shift(n, 0.1, 42),
                     Rng(42).substream(11).uniform_vector(n, -1.0, 1.0)};
  inst.pairs.unrolled();
  return inst;
}

void BM_RecursionSolveFull(benchmark::State& state) {
  const auto inst = make_instance(state.range(0), 5);
  for (auto _ : state) {
    auto report = solve_full(inst.pairs, inst.shift, inst.rhs);
    benchmark::DoNotOptimize(report.x.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_RecursionSolveFull)->RangeMultiplier(4)->Range(1 << 12, 1 << 18)->Complexity();

// Amortized cost per right-hand side once the state is precomputed.
void BM_RecursionApplyOnly(benchmark::State& state) {
  const auto inst = make_instance(state.range(0), 5);
  const auto solver_state = precompute(inst.pairs, inst.shift);
  for (auto _ : state) {
    auto report = shifted_solve(solver_state, inst.shift, inst.rhs);
    benchmark::DoNotOptimize(report.x.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_RecursionApplyOnly)->RangeMultiplier(4)->Range(1 << 12, 1 << 18)->Complexity();

void BM_CgSolve(benchmark::State& state) {
  const auto inst = make_instance(state.range(0), 5);
  for (auto _ : state) {
    auto report = cg_solve(inst.pairs, inst.shift, inst.rhs);
    benchmark::DoNotOptimize(report.x.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_CgSolve)->RangeMultiplier(4)->Range(1 << 12, 1 << 18)->Complexity();

void BM_PcgJacobiSolve(benchmark::State& state) {
  const auto inst = make_instance(state.range(0), 5);
  for (auto _ : state) {
    auto report = pcg_jacobi_solve(inst.pairs, inst.shift, inst.rhs);
    benchmark::DoNotOptimize(report.x.data());
  }
}
BENCHMARK(BM_PcgJacobiSolve)->RangeMultiplier(4)->Range(1 << 12, 1 << 18);

void BM_TridiagonalShiftedSolve(benchmark::State& state) {
  const auto shift = gen_tridiagonal_shift(state.range(0), 0.1, 7);
  const Vector v = Rng(7).substream(11).uniform_vector(state.range(0), -1.0, 1.0);
  for (auto _ : state) {
    Vector x = shift.solve_shifted(0.9, v);
    benchmark::DoNotOptimize(x.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_TridiagonalShiftedSolve)->RangeMultiplier(4)->Range(1 << 12, 1 << 20)->Complexity();

void BM_TwoLoopSolve(benchmark::State& state) {
  const auto inst = make_instance(state.range(0), 5);
  for (auto _ : state) {
    Vector x = inst.pairs.two_loop_solve(inst.rhs);
    benchmark::DoNotOptimize(x.data());
  }
}
BENCHMARK(BM_TwoLoopSolve)->RangeMultiplier(4)->Range(1 << 12, 1 << 18);

void BM_Precompute(benchmark::State& state) {
  const auto inst = make_instance(state.range(0), 5);
  for (auto _ : state) {
    auto solver_state = precompute(inst.pairs, inst.shift);
    benchmark::DoNotOptimize(solver_state.p().data());
  }
}
BENCHMARK(BM_Precompute)->RangeMultiplier(4)->Range(1 << 12, 1 << 18);

}  // namespace

BENCHMARK_MAIN();
