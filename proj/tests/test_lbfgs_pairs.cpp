#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "dense_reference.hpp"
#include "test_support.hpp"

#include "slbfgs/errors.hpp"
#include "slbfgs/io.hpp"
#include "slbfgs/lbfgs_pairs.hpp"
#include "slbfgs/problems.hpp"
#include "slbfgs/rng.hpp"
#include "slbfgs/shift_ops.hpp"

using namespace slbfgs;

namespace {

Vector vec1(double v) {
  Vector x(1);
  x[0] = v;
  return x;
}

}  // namespace

TEST_CASE("push recomputes gamma from the newest pair") {
  LbfgsPairs pairs(1);
  REQUIRE(pairs.push(vec1(1.0), vec1(2.0), 1e-8) == LbfgsPairs::PushResult::accepted);
  CHECK(pairs.size() == 1);
  CHECK(pairs.gamma() == doctest::Approx(0.5).epsilon(1e-15));  // s.y / ||y||^2 = 2/4
}

TEST_CASE("push evicts FIFO at capacity") {
  LbfgsPairs pairs(2, /*capacity=*/2);
  Vector s0(2), y0(2), s1(2), y1(2), s2(2), y2(2);
  s0 << 1, 0;
  y0 << 2, 0;
  s1 << 0, 1;
  y1 << 0, 3;
  s2 << 1, 1;
  y2 << 4, 4;
  REQUIRE(pairs.push(s0, y0) == LbfgsPairs::PushResult::accepted);
  REQUIRE(pairs.push(s1, y1) == LbfgsPairs::PushResult::accepted);
  REQUIRE(pairs.push(s2, y2) == LbfgsPairs::PushResult::accepted);
  CHECK(pairs.size() == 2);
  CHECK(pairs.s(0) == s1);  // oldest pair gone, order preserved
  CHECK(pairs.y(0) == y1);
  CHECK(pairs.s(1) == s2);
}

TEST_CASE("push rejects nonpositive curvature and leaves the store unchanged") {
  LbfgsPairs pairs(2);
  Vector s(2), y(2);
  s << 1, 0;
  y << -1, 0;
  CHECK(pairs.push(s, y, 1e-12) == LbfgsPairs::PushResult::rejected_curvature);
  CHECK(pairs.size() == 0);
  CHECK(pairs.gamma() == 1.0);
}

TEST_CASE("apply_B at j=0 scales by 1/gamma") {
  LbfgsPairs pairs(3);
  Vector s(3), y(3);
  s << 1, 0, 0;
  y << 2, 0, 0;
  REQUIRE(pairs.push(s, y) == LbfgsPairs::PushResult::accepted);  // gamma = 0.5
  const Vector v = testsupport::random_rhs(3, 42);
  CHECK(testref::rel_err(pairs.apply_B(0, v), (2.0 * v).eval()) < 1e-15);
}

TEST_CASE("apply_B matches the 1x1 dense update") {
  LbfgsPairs pairs(1);
  REQUIRE(pairs.push(vec1(1.0), vec1(2.0)) == LbfgsPairs::PushResult::accepted);
  // B_1 = y/s = 2 in one dimension
  CHECK(pairs.apply_B(1, vec1(1.0))[0] == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("apply_B rejects out-of-range update index") {
  LbfgsPairs pairs(2);
  Vector s(2), y(2);
  s << 1, 0;
  y << 1, 0;
  REQUIRE(pairs.push(s, y) == LbfgsPairs::PushResult::accepted);
  CHECK_THROWS_AS(pairs.apply_B(2, s), std::out_of_range);
}

TEST_CASE("apply_B matches dense assembly on a random instance") {
  const auto pairs = gen_random_pairs(50, 4, /*seed=*/7);
  const Vector v = testsupport::random_rhs(50, 7);
  for (int j = 0; j <= 4; ++j) {
    const Vector want = testref::dense_B(pairs, j) * v;
    CHECK(testref::rel_err(pairs.apply_B(j, v), want) < 1e-12);
  }
}

TEST_CASE("build_unrolled on the empty store") {
  LbfgsPairs pairs(4);
  const UnrolledFactors f = build_unrolled(pairs);
  CHECK(f.a.empty());
  CHECK(f.b.empty());
}

TEST_CASE("build_unrolled 1-D factors") {
  LbfgsPairs pairs(1);
  REQUIRE(pairs.push(vec1(1.0), vec1(2.0)) == LbfgsPairs::PushResult::accepted);
  const UnrolledFactors f = build_unrolled(pairs);
  // B_0 = 2: a_0 = B_0 s / sqrt(s B_0 s) = 2/sqrt(2) = sqrt(2); b_0 = 2/sqrt(2)
  REQUIRE(f.a.size() == 1);
  CHECK(f.a[0][0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(f.b[0][0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("unrolled factors reconstruct B_k") {
  const auto pairs = gen_random_pairs(100, 5, /*seed=*/3);
  const UnrolledFactors& f = pairs.unrolled();
  REQUIRE(f.a.size() == 5);
  const Matrix Bk = testref::dense_B(pairs, 5);
  for (std::uint64_t trial = 0; trial < 5; ++trial) {
    const Vector v = testsupport::random_rhs(100, 100 + trial);
    Vector got = v / pairs.gamma();
    for (int j = 0; j < 5; ++j)
      got += f.b[static_cast<size_t>(j)].dot(v) * f.b[static_cast<size_t>(j)] -
             f.a[static_cast<size_t>(j)].dot(v) * f.a[static_cast<size_t>(j)];
    CHECK(testref::rel_err(got, (Bk * v).eval()) < 1e-12);
  }
}

TEST_CASE("build_unrolled inner-product count stays within slack") {
  for (int k : {1, 3, 5, 7}) {
    const auto pairs = gen_random_pairs(30, k, /*seed=*/static_cast<std::uint64_t>(k));
    const UnrolledFactors f = build_unrolled(pairs);
    const auto budget = static_cast<std::uint64_t>(k * k + k);
    CHECK(f.build_cost.inner_products <= budget + static_cast<std::uint64_t>(2 * k));
    // regression baseline: 2j+1 dots per factor
    CHECK(f.build_cost.inner_products == static_cast<std::uint64_t>(k * k));
  }
}

TEST_CASE("build_unrolled flags numerically indefinite pairs") {
  // Exact arithmetic keeps s^T B s positive, but a near-orthogonal first
  // pair with curvature 1e-10 followed by a step along B_1's smallest
  // eigendirection drives the computed value to roundoff and below zero.
  const double eps = 1e-10;
  const double t = -1.0 / (1.0 + 1.0 / eps);
  LbfgsPairs pairs(2, 6, std::numeric_limits<double>::denorm_min());
  Vector s0(2), y0(2), s1(2);
  s0 << 1, 0;
  y0 << eps, 1;
  s1 << 1, t;
  REQUIRE(pairs.push(s0, y0) == LbfgsPairs::PushResult::accepted);
  REQUIRE(pairs.push(s1, s1) == LbfgsPairs::PushResult::accepted);
  CHECK_THROWS_AS(build_unrolled(pairs), NumericalError);
}

TEST_CASE("two_loop_solve with no pairs scales by gamma") {
  LbfgsPairs pairs(3);
  const Vector r = testsupport::random_rhs(3, 5);
  CHECK(pairs.two_loop_solve(r) == pairs.gamma() * r);
}

TEST_CASE("two_loop_solve inverts the 1-D update") {
  LbfgsPairs pairs(1);
  REQUIRE(pairs.push(vec1(1.0), vec1(2.0)) == LbfgsPairs::PushResult::accepted);
  CHECK(pairs.two_loop_solve(vec1(4.0))[0] == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("two_loop_solve round-trips apply_B") {
  const auto pairs = gen_random_pairs(50, 4, /*seed=*/11);
  const Vector v = testsupport::random_rhs(50, 11);
  const Vector round = pairs.two_loop_solve(pairs.apply_B(4, v));
  CHECK(testref::rel_err(round, v) < 1e-10);
}

TEST_CASE("positive definiteness proxy, secant condition, and dense equivalence") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    const Index n = 40 + static_cast<Index>(seed) * 60;
    const int k = 3 + static_cast<int>(seed % 4);
    const auto pairs = gen_random_pairs(n, k, seed);

    Rng unit_stream = Rng(seed).substream(21);
    for (int trial = 0; trial < 100; ++trial) {
      Vector v = unit_stream.uniform_vector(n, -1.0, 1.0);
      v.normalize();
      CHECK(v.dot(pairs.apply_B(k, v)) > 0.0);
    }

    // latest secant equation: B_k s_{k-1} = y_{k-1}
    CHECK(testref::rel_err(pairs.apply_B(k, pairs.s(k - 1)), pairs.y(k - 1)) < 1e-10);

    const Matrix Bk = testref::dense_B(pairs, k);
    const Vector r = testsupport::random_rhs(n, seed + 50);
    CHECK(testref::rel_err(pairs.apply_B(k, r), (Bk * r).eval()) < 1e-10);
    CHECK(testref::rel_err(pairs.two_loop_solve(r), testref::dense_solve(Bk, r)) < 1e-10);
  }
}

TEST_CASE("two_loop round-trip property across sizes") {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const Index n = 1 + static_cast<Index>(Rng(seed).next_u64() % 500);
    const int k = static_cast<int>(Rng(seed + 1).next_u64() % 8);
    const auto pairs = gen_random_pairs(n, k, seed, 1e-8, 8);
    const Vector v = testsupport::random_rhs(n, seed);
    CHECK(testref::rel_err(pairs.two_loop_solve(pairs.apply_B(k, v)), v) < 1e-10);
  }
}

TEST_CASE("naive shifted two-loop coincides with the shifted solve only at k=0") {
  LbfgsPairs pairs(3);
  const ScalarShift G(3, 1.0);
  const Vector r = testsupport::random_rhs(3, 9);
  const Vector naive = naive_shifted_two_loop(pairs, G, r);
  CHECK(testref::rel_err(naive, (r / (1.0 / pairs.gamma() + 1.0)).eval()) < 1e-15);
}

TEST_CASE("naive shifted two-loop is wrong for k >= 1") {
  LbfgsPairs pairs(1);
  REQUIRE(pairs.push(vec1(1.0), vec1(2.0)) == LbfgsPairs::PushResult::accepted);
  const ScalarShift G(1, 1.0);
  // true solution of (B_1 + G) x = 3 is 1
  const Vector naive = naive_shifted_two_loop(pairs, G, vec1(3.0));
  CHECK(std::abs(naive[0] - 1.0) > 0.05);
}

TEST_CASE("pairs file round-trip") {
  const auto dir = std::filesystem::temp_directory_path() / "slbfgs_pairs_io";
  std::filesystem::create_directories(dir);
  const auto path = dir / "pairs.txt";

  const auto pairs = gen_random_pairs(17, 3, /*seed=*/23);
  save_pairs(pairs, path);
  const LbfgsPairs loaded = load_pairs(path);
  REQUIRE(loaded.size() == pairs.size());
  REQUIRE(loaded.dim() == pairs.dim());
  CHECK(loaded.gamma() == doctest::Approx(pairs.gamma()).epsilon(1e-15));
  for (int j = 0; j < pairs.size(); ++j) {
    CHECK(testref::rel_err(loaded.s(j), pairs.s(j)) < 1e-15);
    CHECK(testref::rel_err(loaded.y(j), pairs.y(j)) < 1e-15);
  }
}

TEST_CASE("empty pairs file round-trips, keeping gamma from the header") {
  const auto dir = std::filesystem::temp_directory_path() / "slbfgs_pairs_io";
  std::filesystem::create_directories(dir);
  const auto path = dir / "empty_pairs.txt";

  LbfgsPairs pairs(9);
  pairs.set_gamma(0.75);
  save_pairs(pairs, path);
  const LbfgsPairs loaded = load_pairs(path);
  CHECK(loaded.size() == 0);
  CHECK(loaded.dim() == 9);
  CHECK(loaded.gamma() == 0.75);
}

TEST_CASE("pairs loader reports the offending line") {
  const auto dir = std::filesystem::temp_directory_path() / "slbfgs_pairs_io";
  std::filesystem::create_directories(dir);
  const auto path = dir / "bad_pairs.txt";
  {
    std::ofstream out(path);
    out << "2 1 0.5\n1.0\nnot_a_number\n1.0\n2.0\n";
  }
  try {
    load_pairs(path);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
}
