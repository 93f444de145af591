#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dense_reference.hpp"

#include "slbfgs/io.hpp"

// Subprocess tests against the installed command-line surface.
#ifndef SLBFGS_CLI_PATH
#error "SLBFGS_CLI_PATH must point at the slbfgs binary"
#endif

namespace {

namespace fs = std::filesystem;
using slbfgs::Vector;

struct RunResult {
  int exit_code = -1;
  std::string out;
};

fs::path work_dir() {
  const auto dir = fs::temp_directory_path() / "slbfgs_cli_tests";
  fs::create_directories(dir);
  return dir;
}

RunResult run_cli(const std::string& args) {
  const auto out_path = work_dir() / "stdout.txt";
  const std::string cmd = std::string(SLBFGS_CLI_PATH) + " " + args + " > " +
                          out_path.string() + " 2> " + (work_dir() / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  RunResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(out_path);
  std::stringstream buf;
  buf << in.rdbuf();
  result.out = buf.str();
  return result;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream iss(text);
  std::string line;
  while (std::getline(iss, line))
    if (!line.empty()) lines.push_back(line);
  return lines;
}

std::vector<std::string> fields_of(const std::string& line) {
  std::vector<std::string> fields;
  std::istringstream iss(line);
  std::string field;
  while (std::getline(iss, field, ',')) fields.push_back(field);
  return fields;
}

constexpr const char* kHeader =
    "method,n,k,shift,sigma,seed,time_s,iters,rel_residual,inner_products,guard";

}  // namespace

TEST_CASE("solve emits the exact CSV header and a tiny residual") {
  const auto result =
      run_cli("solve --gen tridiag --n 10000 --k 5 --sigma 0.1 --seed 1 --method recursion");
  REQUIRE(result.exit_code == 0);
  const auto lines = lines_of(result.out);
  REQUIRE(lines.size() == 2);
  CHECK(lines[0] == kHeader);
  const auto fields = fields_of(lines[1]);
  REQUIRE(fields.size() == 11);
  CHECK(fields[0] == "recursion");
  CHECK(fields[1] == "10000");
  CHECK(fields[2] == "5");
  CHECK(fields[3] == "tridiag");
  CHECK(std::stod(fields[8]) <= 1e-12);
  CHECK(fields[10] == "ok");
}

TEST_CASE("solve is deterministic given flags and seed, timings excepted") {
  const std::string flags = "solve --gen diag --n 300 --k 4 --seed 17 --method recursion";
  auto strip_time = [](const std::string& line) {
    auto fields = fields_of(line);
    if (fields.size() == 11) fields[6] = "<time>";
    std::string joined;
    for (const auto& f : fields) joined += f + ",";
    return joined;
  };
  const auto a = run_cli(flags);
  const auto b = run_cli(flags);
  REQUIRE(a.exit_code == 0);
  const auto la = lines_of(a.out), lb = lines_of(b.out);
  REQUIRE(la.size() == lb.size());
  for (size_t i = 0; i < la.size(); ++i) CHECK(strip_time(la[i]) == strip_time(lb[i]));
}

TEST_CASE("oracle refuses dimensions above its cap with a nonzero exit") {
  const auto result = run_cli("solve --gen tridiag --n 2500 --k 3 --seed 2 --method oracle");
  CHECK(result.exit_code != 0);
}

TEST_CASE("recursion and oracle solution files agree at n=200") {
  const auto dir = work_dir();
  const std::string p = (dir / "p.txt").string();
  const std::string g = (dir / "g.txt").string();
  const std::string y = (dir / "y.txt").string();
  const std::string xr = (dir / "xr.txt").string();
  const std::string xo = (dir / "xo.txt").string();

  auto gen = run_cli("solve --gen tridiag --n 200 --k 5 --seed 7 --method recursion --out " + xr +
                     " --dump-pairs " + p + " --dump-shift " + g + " --dump-rhs " + y);
  REQUIRE(gen.exit_code == 0);
  auto oracle = run_cli("solve --pairs " + p + " --shift tridiag --shift-file " + g +
                        " --rhs " + y + " --method oracle --out " + xo);
  REQUIRE(oracle.exit_code == 0);

  const Vector a = slbfgs::load_vector(xr);
  const Vector b = slbfgs::load_vector(xo);
  CHECK(slbfgs::testref::rel_err(a, b) <= 1e-10);
}

TEST_CASE("verify recomputes the reported residual to 1e-15") {
  const auto dir = work_dir();
  const std::string p = (dir / "vp.txt").string();
  const std::string g = (dir / "vg.txt").string();
  const std::string y = (dir / "vy.txt").string();
  const std::string x = (dir / "vx.txt").string();

  auto solve = run_cli("solve --gen tridiag --n 400 --k 5 --seed 9 --method recursion --out " + x +
                       " --dump-pairs " + p + " --dump-shift " + g + " --dump-rhs " + y);
  REQUIRE(solve.exit_code == 0);
  const auto fields = fields_of(lines_of(solve.out)[1]);
  const std::string reported = fields[8];

  auto verify = run_cli("verify --pairs " + p + " --shift tridiag --shift-file " + g + " --rhs " +
                        y + " --solution " + x + " --expect " + reported);
  CHECK(verify.exit_code == 0);

  auto mismatch = run_cli("verify --pairs " + p + " --shift tridiag --shift-file " + g +
                          " --rhs " + y + " --solution " + x + " --expect 0.5");
  CHECK(mismatch.exit_code != 0);
}

TEST_CASE("bench emits reps rows plus one median row per cell") {
  const auto result =
      run_cli("bench --sizes 2000,4000 --methods recursion,cg --reps 3 --seed 5");
  REQUIRE(result.exit_code == 0);
  const auto lines = lines_of(result.out);
  REQUIRE(lines.size() >= 1);
  CHECK(lines[0] == kHeader);
  int rep_rows = 0, median_rows = 0;
  for (size_t i = 1; i < lines.size(); ++i) {
    const auto fields = fields_of(lines[i]);
    REQUIRE(fields.size() == 11);
    if (fields[5] == "median")
      ++median_rows;
    else
      ++rep_rows;
    CHECK(std::stod(fields[8]) <= 1e-7);  // every residual within tolerance
  }
  CHECK(rep_rows == 2 * 2 * 3);
  CHECK(median_rows == 2 * 2);
}

TEST_CASE("bench cells can run on worker threads with identical rows") {
  auto strip_time = [](const std::string& line) {
    auto fields = fields_of(line);
    if (fields.size() == 11) fields[6] = "<time>";
    std::string joined;
    for (const auto& f : fields) joined += f + ",";
    return joined;
  };
  const auto serial = run_cli("bench --sizes 1000,2000 --methods recursion,cg --reps 2 --seed 3");
  const auto parallel =
      run_cli("bench --sizes 1000,2000 --methods recursion,cg --reps 2 --seed 3 --threads 4");
  REQUIRE(serial.exit_code == 0);
  REQUIRE(parallel.exit_code == 0);
  const auto ls = lines_of(serial.out), lp = lines_of(parallel.out);
  REQUIRE(ls.size() == lp.size());
  for (size_t i = 0; i < ls.size(); ++i) CHECK(strip_time(ls[i]) == strip_time(lp[i]));
}

TEST_CASE("selftest passes by default and fails with the injected sign flip") {
  CHECK(run_cli("selftest --seeds 15").exit_code == 0);
  CHECK(run_cli("selftest --suite oracle --seeds 15 --inject-sign-flip").exit_code != 0);
  CHECK(run_cli("selftest --suite guard --seeds 10").exit_code == 0);
}

TEST_CASE("solve builds trust-region instances from objectives and manifests") {
  const auto quad =
      run_cli("solve --gen scalar --objective quadratic --n 150 --k 5 --seed 3 --sigma 0.4");
  REQUIRE(quad.exit_code == 0);
  auto fields = fields_of(lines_of(quad.out)[1]);
  CHECK(fields[2] == "5");
  CHECK(std::stod(fields[8]) <= 1e-10);

  const auto dir = work_dir();
  const auto spec_path = dir / "manifest.txt";
  {
    std::ofstream out(spec_path);
    out << "n=150\nk=4\nshift=tridiag\nsigma=0.1\nseed=11\nobjective=none\n";
  }
  const auto spec_run = run_cli("solve --spec " + spec_path.string());
  REQUIRE(spec_run.exit_code == 0);
  fields = fields_of(lines_of(spec_run.out)[1]);
  CHECK(fields[1] == "150");
  CHECK(fields[2] == "4");
  CHECK(fields[3] == "tridiag");
  CHECK(std::stod(fields[8]) <= 1e-12);
}

TEST_CASE("guard rejection exits with code 2 and reports the failed condition") {
  const auto result = run_cli("solve --gen scalar --n 60 --k 3 --sigma 0.5 --seed 2 --epsilon 10");
  CHECK(result.exit_code == 2);
  const auto lines = lines_of(result.out);
  REQUIRE(lines.size() == 2);
  CHECK(fields_of(lines[1])[10] == "reject(scaling)");
}

TEST_CASE("unreachable tolerance exits with code 3") {
  const auto result = run_cli("solve --gen tridiag --n 60 --k 3 --seed 4 --method cg --tol 1e-30");
  CHECK(result.exit_code == 3);
}

TEST_CASE("malformed input files exit with code 4") {
  const auto dir = work_dir();
  const auto bad = dir / "bad_pairs.txt";
  {
    std::ofstream out(bad);
    out << "2 1 0.5\n1.0\noops\n";
  }
  const auto result = run_cli("solve --pairs " + bad.string() + " --shift scalar --sigma 1 --rhs " +
                              bad.string());
  CHECK(result.exit_code == 4);

  CHECK(run_cli("solve --definitely-not-a-flag").exit_code == 4);
}
