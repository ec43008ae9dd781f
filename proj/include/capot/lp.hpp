#pragma once

// Dense-basis revised simplex over sparse columns. Two phases with
// artificials, Dantzig pricing with a Bland fallback kicking in on degenerate
// stalls (deterministic either way), incremental dual-price updates, and a
// from-scratch refactorization as the repair path when residuals drift.

#include <cstddef>
#include <utility>
#include <vector>

namespace capot {

enum class Sense { minimize, maximize };
enum class Rel { le, ge, eq };
enum class VarKind { nonneg, nonpos, free_var };

struct LPRow {
  std::vector<std::pair<int, double>> coeffs;  // sparse (variable, coefficient)
  Rel rel = Rel::eq;
  double rhs = 0.0;
};

struct LinearProgram {
  Sense sense = Sense::minimize;
  int num_vars = 0;
  std::vector<double> objective;  // size num_vars
  std::vector<VarKind> kinds;     // size num_vars; empty means all nonneg
  std::vector<LPRow> rows;

  int add_var(double cost, VarKind kind = VarKind::nonneg) {
    objective.push_back(cost);
    kinds.push_back(kind);
    return num_vars++;
  }
};

struct LPSolution {
  enum class Status { optimal, infeasible, unbounded };
  Status status = Status::infeasible;
  double objective = 0.0;
  std::vector<double> x;
  // Row prices in original row order and orientation; at an optimum
  // sum_r row_duals[r] * rhs[r] equals the objective.
  std::vector<double> row_duals;
  std::size_t iterations = 0;
  double primal_residual = 0.0;  // worst row violation at the returned point
};

struct SimplexOptions {
  double pivot_tol = 1e-9;
  double feas_tol = 1e-9;
  std::size_t max_iterations = 2000000;
  // Dense inverse memory guard: rows beyond this are refused.
  std::size_t max_rows = 6000;
  // At optimal status residuals beyond this trigger refactor-and-repair,
  // then an exception if still exceeded.
  double residual_limit = 1e-6;
  // Consecutive degenerate steps before switching to Bland pricing.
  std::size_t stall_limit = 64;
};

LPSolution simplex_solve(const LinearProgram& lp, const SimplexOptions& opts = {});

}  // namespace capot
