#pragma once

#include <filesystem>

#include "slbfgs/lbfgs_pairs.hpp"
#include "slbfgs/problems.hpp"
#include "slbfgs/shift_ops.hpp"
#include "slbfgs/types.hpp"

namespace slbfgs {

// Plain-text formats, whitespace-separated decimal values.
//
// Pairs:       header "n k gamma", then S and Y as n x k blocks (one row
//              per line, k values each).
// Vector:      one value per line.
// Diagonal:    line 1 "n", line 2 the n diagonal values.
// Tridiagonal: line 1 "n", line 2 the n diagonal values, line 3 the n-1
//              off-diagonal values.
// ProblemSpec: flat key=value lines.
//
// Loaders throw ParseError with the offending line number.

void save_vector(const Vector& v, const std::filesystem::path& path);
Vector load_vector(const std::filesystem::path& path);

void save_pairs(const LbfgsPairs& pairs, const std::filesystem::path& path);
/// capacity <= 0 means max(file k, 6).  Pairs are accepted whenever the
/// stored curvature is positive; gamma comes from the header.
LbfgsPairs load_pairs(const std::filesystem::path& path, int capacity = 0);

void save_diagonal(const DiagonalShift& G, const std::filesystem::path& path);
DiagonalShift load_diagonal(const std::filesystem::path& path);

void save_tridiagonal(const TridiagonalShift& G, const std::filesystem::path& path);
TridiagonalShift load_tridiagonal(const std::filesystem::path& path);

void save_problem_spec(const ProblemSpec& spec, const std::filesystem::path& path);
ProblemSpec load_problem_spec(const std::filesystem::path& path);

}  // namespace slbfgs
