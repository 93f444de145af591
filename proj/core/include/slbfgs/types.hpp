#pragma once

#include <cstdint>
#include <string_view>

#include <Eigen/Core>

namespace slbfgs {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Instrumentation for the O(n) work a solve performs.  An inner product is
/// one length-n dot, a vector update is one length-n axpy, and a shift solve
/// is one application of (G + alpha I)^{-1}.  Dots spent on residual norms
/// are tallied under inner_products; scalings and operator applies are not
/// counted.
struct OpCounters {
  std::uint64_t inner_products = 0;
  std::uint64_t vector_updates = 0;
  std::uint64_t shift_solves = 0;

  OpCounters& operator+=(const OpCounters& o) {
    inner_products += o.inner_products;
    vector_updates += o.vector_updates;
    shift_solves += o.shift_solves;
    return *this;
  }
};

enum class Method {
  recursion,
  cg,
  pcg_diag,
  dense_oracle,
  naive_wrong,
};

std::string_view to_string(Method m);

/// Result of one linear solve plus its instrumentation.
struct SolveReport {
  Vector x;
  double rel_residual = 0.0;  ///< ||(B_k + G) x - y|| / ||y||
  double wall_time = 0.0;     ///< seconds around the solve itself
  int iterations = 0;         ///< 0 for direct methods
  OpCounters counters;
  Method method = Method::recursion;
  bool preconditioner_fallback = false;  ///< pcg fell back to plain cg
};

}  // namespace slbfgs
