#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lyap/matrix.hpp"

namespace lyap {

enum class LpStatus { optimal, infeasible, unbounded };

struct LpOptions {
  /// Phase-one objective above this (relative to 1 + sum |b|) means infeasible.
  double feasibility_tolerance = 1e-9;
  double optimality_tolerance = 1e-10;
  double pivot_tolerance = 1e-9;
};

struct LpResult {
  LpStatus status = LpStatus::optimal;
  std::vector<double> x;
  double objective = 0.0;
  /// Phase-one optimum: sum of artificial values, 0 when feasible.
  double infeasibility = 0.0;
  /// Per constraint row: b_i - (A x)_i at the phase-one optimum.
  std::vector<double> row_slacks;
  std::size_t iterations = 0;
};

/// maximize c^T x subject to A x = b, x >= 0, by a dense two-phase tableau
/// simplex with Bland's rule (smallest eligible index enters and leaves).
LpResult solve_lp(const Matrix& a, std::span<const double> b, std::span<const double> c,
                  const LpOptions& options = {});

}  // namespace lyap
