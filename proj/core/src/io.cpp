#include "slbfgs/io.hpp"

#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "slbfgs/errors.hpp"

namespace slbfgs {

namespace {

class LineReader {
 public:
  explicit LineReader(const std::filesystem::path& path)
      : path_(path.string()), in_(path) {
    if (!in_) throw ParseError(path_, 0, "cannot open file");
  }

  /// Next non-empty line; throws if the file ends.
  std::string next(const char* what) {
    std::string line;
    while (std::getline(in_, line)) {
      ++lineno_;
      if (line.find_first_not_of(" \t\r\n") != std::string::npos) return line;
    }
    throw ParseError(path_, lineno_, std::string("unexpected end of file, expected ") + what);
  }

  std::vector<double> next_values(size_t count, const char* what) {
    const std::string line = next(what);
    std::istringstream iss(line);
    std::vector<double> values;
    double v;
    while (iss >> v) values.push_back(v);
    if (!iss.eof()) throw ParseError(path_, lineno_, std::string("malformed number in ") + what);
    if (values.size() != count)
      throw ParseError(path_, lineno_,
                       std::string(what) + ": expected " + std::to_string(count) +
                           " values, got " + std::to_string(values.size()));
    return values;
  }

  long lineno() const { return lineno_; }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ifstream in_;
  long lineno_ = 0;
};

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ParseError(path.string(), 0, "cannot open file for writing");
  out << std::setprecision(17);
  return out;
}

Vector to_vector(const std::vector<double>& values) {
  Vector v(static_cast<Index>(values.size()));
  for (size_t i = 0; i < values.size(); ++i) v[static_cast<Index>(i)] = values[i];
  return v;
}

}  // namespace

void save_vector(const Vector& v, const std::filesystem::path& path) {
  auto out = open_out(path);
  for (Index i = 0; i < v.size(); ++i) out << v[i] << '\n';
}

Vector load_vector(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  std::vector<double> values;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    std::istringstream iss(line);
    double v;
    if (!(iss >> v)) throw ParseError(path.string(), lineno, "malformed number");
    values.push_back(v);
    if (iss >> v) throw ParseError(path.string(), lineno, "expected one value per line");
  }
  if (values.empty()) throw ParseError(path.string(), lineno, "empty vector file");
  return to_vector(values);
}

void save_pairs(const LbfgsPairs& pairs, const std::filesystem::path& path) {
  auto out = open_out(path);
  const Index n = pairs.dim();
  const int k = pairs.size();
  out << n << ' ' << k << ' ' << pairs.gamma() << '\n';
  if (k == 0) return;
  for (Index row = 0; row < n; ++row) {
    for (int j = 0; j < k; ++j) out << (j ? " " : "") << pairs.s(j)[row];
    out << '\n';
  }
  for (Index row = 0; row < n; ++row) {
    for (int j = 0; j < k; ++j) out << (j ? " " : "") << pairs.y(j)[row];
    out << '\n';
  }
}

LbfgsPairs load_pairs(const std::filesystem::path& path, int capacity) {
  LineReader reader(path);
  const auto header = reader.next_values(3, "header \"n k gamma\"");
  const Index n = static_cast<Index>(header[0]);
  const int k = static_cast<int>(header[1]);
  const double gamma = header[2];
  if (n < 1 || header[0] != static_cast<double>(n))
    throw ParseError(reader.path(), reader.lineno(), "invalid dimension in header");
  if (k < 0 || header[1] != static_cast<double>(k))
    throw ParseError(reader.path(), reader.lineno(), "invalid pair count in header");
  if (!(gamma > 0.0))
    throw ParseError(reader.path(), reader.lineno(), "gamma must be > 0");

  Matrix S(n, k), Y(n, k);
  if (k > 0) {
    for (Index row = 0; row < n; ++row) {
      const auto values = reader.next_values(static_cast<size_t>(k), "S row");
      for (int j = 0; j < k; ++j) S(row, j) = values[static_cast<size_t>(j)];
    }
    for (Index row = 0; row < n; ++row) {
      const auto values = reader.next_values(static_cast<size_t>(k), "Y row");
      for (int j = 0; j < k; ++j) Y(row, j) = values[static_cast<size_t>(j)];
    }
  }

  if (capacity <= 0) capacity = std::max(k, 6);
  if (capacity < k)
    throw ParseError(reader.path(), reader.lineno(), "capacity below stored pair count");
  // Accept any positive curvature; the producing side enforced its own floor.
  LbfgsPairs pairs(n, capacity, std::numeric_limits<double>::min());
  for (int j = 0; j < k; ++j) {
    if (pairs.push(S.col(j), Y.col(j)) != LbfgsPairs::PushResult::accepted)
      throw ParseError(reader.path(), reader.lineno(),
                       "pair " + std::to_string(j) + " has nonpositive curvature");
  }
  pairs.set_gamma(gamma);
  return pairs;
}

void save_diagonal(const DiagonalShift& G, const std::filesystem::path& path) {
  auto out = open_out(path);
  const Vector d = G.diagonal();
  out << d.size() << '\n';
  for (Index i = 0; i < d.size(); ++i) out << (i ? " " : "") << d[i];
  out << '\n';
}

DiagonalShift load_diagonal(const std::filesystem::path& path) {
  LineReader reader(path);
  const auto head = reader.next_values(1, "dimension line");
  const Index n = static_cast<Index>(head[0]);
  if (n < 1) throw ParseError(reader.path(), reader.lineno(), "invalid dimension");
  return DiagonalShift(to_vector(reader.next_values(static_cast<size_t>(n), "diagonal")));
}

void save_tridiagonal(const TridiagonalShift& G, const std::filesystem::path& path) {
  auto out = open_out(path);
  const Vector& d = G.main_diagonal();
  const Vector& e = G.off_diagonal();
  out << d.size() << '\n';
  for (Index i = 0; i < d.size(); ++i) out << (i ? " " : "") << d[i];
  out << '\n';
  for (Index i = 0; i < e.size(); ++i) out << (i ? " " : "") << e[i];
  out << '\n';
}

TridiagonalShift load_tridiagonal(const std::filesystem::path& path) {
  LineReader reader(path);
  const auto head = reader.next_values(1, "dimension line");
  const Index n = static_cast<Index>(head[0]);
  if (n < 1) throw ParseError(reader.path(), reader.lineno(), "invalid dimension");
  Vector d = to_vector(reader.next_values(static_cast<size_t>(n), "main diagonal"));
  Vector e = n > 1 ? to_vector(reader.next_values(static_cast<size_t>(n - 1), "off-diagonal"))
                   : Vector(0);
  return TridiagonalShift(std::move(d), std::move(e));
}

void save_problem_spec(const ProblemSpec& spec, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "n=" << spec.n << '\n'
      << "k=" << spec.k << '\n'
      << "shift=" << to_string(spec.shift_kind) << '\n'
      << "sigma=" << spec.sigma << '\n'
      << "seed=" << spec.seed << '\n'
      << "objective=" << to_string(spec.objective) << '\n';
}

ProblemSpec load_problem_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  ProblemSpec spec;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(path.string(), lineno, "expected key=value");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    try {
      if (key == "n") {
        spec.n = std::stoll(value);
      } else if (key == "k") {
        spec.k = std::stoi(value);
      } else if (key == "sigma") {
        spec.sigma = std::stod(value);
      } else if (key == "seed") {
        spec.seed = std::stoull(value);
      } else if (key == "shift") {
        if (value == "scalar") spec.shift_kind = ProblemSpec::ShiftKind::scalar;
        else if (value == "diag") spec.shift_kind = ProblemSpec::ShiftKind::diagonal;
        else if (value == "tridiag") spec.shift_kind = ProblemSpec::ShiftKind::tridiagonal;
        else throw ParseError(path.string(), lineno, "unknown shift kind: " + value);
      } else if (key == "objective") {
        if (value == "none") spec.objective = ProblemSpec::ObjectiveKind::none;
        else if (value == "quadratic") spec.objective = ProblemSpec::ObjectiveKind::quadratic;
        else if (value == "extended_rosenbrock")
          spec.objective = ProblemSpec::ObjectiveKind::extended_rosenbrock;
        else throw ParseError(path.string(), lineno, "unknown objective: " + value);
      } else {
        throw ParseError(path.string(), lineno, "unknown key: " + key);
      }
    } catch (const std::invalid_argument&) {
      throw ParseError(path.string(), lineno, "malformed value for key " + key);
    } catch (const std::out_of_range&) {
      throw ParseError(path.string(), lineno, "value out of range for key " + key);
    }
  }
  return spec;
}

}  // namespace slbfgs
