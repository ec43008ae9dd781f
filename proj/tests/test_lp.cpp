#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "capot/lp.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace capot;
using testutil::Rng;

namespace {

// Solve a square system by Gaussian elimination; nullopt when singular.
std::optional<std::vector<double>> solve_square(std::vector<std::vector<double>> a,
                                                std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t r = k + 1; r < n; ++r)
      if (std::abs(a[r][k]) > std::abs(a[piv][k])) piv = r;
    if (std::abs(a[piv][k]) < 1e-11) return std::nullopt;
    std::swap(a[piv], a[k]);
    std::swap(b[piv], b[k]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == k) continue;
      const double f = a[r][k] / a[k][k];
      if (f == 0.0) continue;
      for (std::size_t c = k; c < n; ++c) a[r][c] -= f * a[k][c];
      b[r] -= f * b[k];
    }
  }
  for (std::size_t k = 0; k < n; ++k) b[k] /= a[k][k];
  return b;
}

// Brute-force optimum over all vertices of the feasible polytope: every
// choice of n active constraints (rows at equality plus variable sign
// bounds), solved and filtered for feasibility. Requires a bounded feasible
// region; returns nullopt when no feasible vertex exists.
std::optional<double> vertex_oracle(const LinearProgram& lp) {
  const std::size_t n = static_cast<std::size_t>(lp.num_vars);
  // candidate active sets: one entry per row (index) and per sign bound
  // (~index - 1 encodes variable j)
  std::vector<int> cands;
  for (std::size_t r = 0; r < lp.rows.size(); ++r) cands.push_back(static_cast<int>(r));
  for (std::size_t j = 0; j < n; ++j) {
    const VarKind k = lp.kinds.empty() ? VarKind::nonneg : lp.kinds[j];
    if (k != VarKind::free_var) cands.push_back(-static_cast<int>(j) - 1);
  }

  std::optional<double> best;
  std::vector<std::size_t> pick(n);
  const std::size_t c = cands.size();
  if (c < n) return std::nullopt;

  // iterate all n-combinations of candidate indices
  for (std::size_t i = 0; i < n; ++i) pick[i] = i;
  for (;;) {
    // equality rows must always be active for a vertex of the feasible set,
    // but including them in every combination is handled implicitly: a
    // combination missing an equality row yields a point that fails the
    // feasibility filter below unless the row holds anyway.
    std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
    std::vector<double> b(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const int cand = cands[pick[i]];
      if (cand >= 0) {
        for (const auto& [var, coef] : lp.rows[cand].coeffs) a[i][var] = coef;
        b[i] = lp.rows[cand].rhs;
      } else {
        a[i][-cand - 1] = 1.0;
        b[i] = 0.0;
      }
    }
    if (auto x = solve_square(std::move(a), std::move(b))) {
      bool ok = true;
      for (std::size_t r = 0; r < lp.rows.size() && ok; ++r) {
        double ax = 0.0;
        for (const auto& [var, coef] : lp.rows[r].coeffs) ax += coef * (*x)[var];
        if (lp.rows[r].rel == Rel::eq) ok = std::abs(ax - lp.rows[r].rhs) <= 1e-7;
        else if (lp.rows[r].rel == Rel::le) ok = ax <= lp.rows[r].rhs + 1e-7;
        else ok = ax >= lp.rows[r].rhs - 1e-7;
      }
      for (std::size_t j = 0; j < n && ok; ++j) {
        const VarKind k = lp.kinds.empty() ? VarKind::nonneg : lp.kinds[j];
        if (k == VarKind::nonneg) ok = (*x)[j] >= -1e-7;
        if (k == VarKind::nonpos) ok = (*x)[j] <= 1e-7;
      }
      if (ok) {
        double obj = 0.0;
        for (std::size_t j = 0; j < n; ++j) obj += lp.objective[j] * (*x)[j];
        if (!best) best = obj;
        else if (lp.sense == Sense::minimize) best = std::min(*best, obj);
        else best = std::max(*best, obj);
      }
    }

    // next combination
    std::size_t i = n;
    while (i > 0 && pick[i - 1] == c - n + i - 1) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t k = i; k < n; ++k) pick[k] = pick[k - 1] + 1;
  }
  return best;
}

void check_duals(const LinearProgram& lp, const LPSolution& sol) {
  // strong duality through the returned prices
  double yb = 0.0;
  for (std::size_t r = 0; r < lp.rows.size(); ++r) yb += sol.row_duals[r] * lp.rows[r].rhs;
  CHECK(yb == doctest::Approx(sol.objective).epsilon(1e-7));

  for (std::size_t r = 0; r < lp.rows.size(); ++r) {
    const LPRow& row = lp.rows[r];
    if (row.rel == Rel::eq) continue;
    // sign conventions and complementary slackness
    const double y = sol.row_duals[r];
    const bool ge_like = (row.rel == Rel::ge) == (lp.sense == Sense::minimize);
    if (ge_like) CHECK(y >= -1e-7);
    else CHECK(y <= 1e-7);
    double ax = 0.0;
    for (const auto& [var, coef] : row.coeffs) ax += coef * sol.x[var];
    CHECK(std::abs(y * (ax - row.rhs)) < 1e-6);
  }
}

}  // namespace

TEST_CASE("textbook instances") {
  {
    LinearProgram lp;
    lp.sense = Sense::maximize;
    lp.add_var(3.0);
    lp.add_var(5.0);
    lp.rows.push_back({{{0, 1.0}}, Rel::le, 4.0});
    lp.rows.push_back({{{1, 2.0}}, Rel::le, 12.0});
    lp.rows.push_back({{{0, 3.0}, {1, 2.0}}, Rel::le, 18.0});
    const LPSolution sol = simplex_solve(lp);
    REQUIRE(sol.status == LPSolution::Status::optimal);
    CHECK(sol.objective == doctest::Approx(36.0));
    CHECK(sol.x[0] == doctest::Approx(2.0));
    CHECK(sol.x[1] == doctest::Approx(6.0));
    check_duals(lp, sol);
  }
  {
    // equality-constrained with a free variable
    LinearProgram lp;
    lp.add_var(1.0, VarKind::free_var);
    lp.add_var(2.0);
    lp.rows.push_back({{{0, 1.0}, {1, 1.0}}, Rel::eq, 3.0});
    lp.rows.push_back({{{0, 1.0}, {1, -1.0}}, Rel::ge, -1.0});
    const LPSolution sol = simplex_solve(lp);
    REQUIRE(sol.status == LPSolution::Status::optimal);
    // substituting x0 = 3 - x1 gives objective 3 + x1, so x1 = 0, x0 = 3
    CHECK(sol.objective == doctest::Approx(3.0));
    CHECK(sol.x[0] == doctest::Approx(3.0));
    check_duals(lp, sol);
  }
  {
    // nonpositive variable
    LinearProgram lp;
    lp.sense = Sense::maximize;
    lp.add_var(1.0, VarKind::nonpos);
    lp.rows.push_back({{{0, 1.0}}, Rel::ge, -5.0});
    const LPSolution sol = simplex_solve(lp);
    REQUIRE(sol.status == LPSolution::Status::optimal);
    CHECK(sol.objective == doctest::Approx(0.0).scale(1.0));
    CHECK(sol.x[0] == doctest::Approx(0.0).scale(1.0));
  }
  {
    // infeasible
    LinearProgram lp;
    lp.add_var(1.0);
    lp.rows.push_back({{{0, 1.0}}, Rel::le, -2.0});
    CHECK(simplex_solve(lp).status == LPSolution::Status::infeasible);
  }
  {
    // unbounded
    LinearProgram lp;
    lp.add_var(-1.0);
    lp.rows.push_back({{{0, -1.0}}, Rel::le, 1.0});
    CHECK(simplex_solve(lp).status == LPSolution::Status::unbounded);
  }
  {
    // unbounded through a free variable
    LinearProgram lp;
    lp.add_var(1.0, VarKind::free_var);
    lp.add_var(0.0);
    lp.rows.push_back({{{0, 1.0}, {1, 1.0}}, Rel::le, 2.0});
    CHECK(simplex_solve(lp).status == LPSolution::Status::unbounded);
  }
}

TEST_CASE("degenerate cycling example terminates at the optimum") {
  // Beale's example: Dantzig pricing cycles without safeguards
  LinearProgram lp;
  lp.add_var(-0.75);
  lp.add_var(150.0);
  lp.add_var(-0.02);
  lp.add_var(6.0);
  lp.rows.push_back({{{0, 0.25}, {1, -60.0}, {2, -0.04}, {3, 9.0}}, Rel::le, 0.0});
  lp.rows.push_back({{{0, 0.5}, {1, -90.0}, {2, -0.02}, {3, 3.0}}, Rel::le, 0.0});
  lp.rows.push_back({{{2, 1.0}}, Rel::le, 1.0});
  const LPSolution sol = simplex_solve(lp);
  REQUIRE(sol.status == LPSolution::Status::optimal);
  CHECK(sol.objective == doctest::Approx(-0.05));
  CHECK(sol.x[2] == doctest::Approx(1.0));
  check_duals(lp, sol);
}

TEST_CASE("random boxed instances agree with vertex enumeration") {
  Rng rng(97);
  int solved = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t n = 2 + rng.index(3);
    const std::size_t extra = 1 + rng.index(3);
    LinearProgram lp;
    lp.sense = (trial % 2 == 0) ? Sense::minimize : Sense::maximize;
    for (std::size_t j = 0; j < n; ++j) {
      const double r = rng.uniform();
      const VarKind kind = r < 0.7 ? VarKind::nonneg
                          : r < 0.85 ? VarKind::free_var
                                     : VarKind::nonpos;
      lp.add_var(std::round((rng.uniform() * 4.0 - 2.0) * 8.0) / 8.0, kind);
    }
    // box: -1 <= x_j <= 1 keeps everything bounded whatever the kind; the
    // lower bounds exercise negative rhs handling
    for (std::size_t j = 0; j < n; ++j) {
      lp.rows.push_back({{{static_cast<int>(j), 1.0}}, Rel::le, 1.0});
      lp.rows.push_back({{{static_cast<int>(j), 1.0}}, Rel::ge, -1.0});
    }
    for (std::size_t e = 0; e < extra; ++e) {
      LPRow row;
      for (std::size_t j = 0; j < n; ++j)
        if (rng.uniform() < 0.8)
          row.coeffs.emplace_back(static_cast<int>(j),
                                  std::round((rng.uniform() * 4.0 - 2.0) * 8.0) / 8.0);
      const double r = rng.uniform();
      row.rel = r < 0.45 ? Rel::le : r < 0.9 ? Rel::ge : Rel::eq;
      row.rhs = std::round((rng.uniform() * 2.0 - 1.0) * 8.0) / 8.0;
      lp.rows.push_back(std::move(row));
    }

    const std::optional<double> want = vertex_oracle(lp);
    const LPSolution sol = simplex_solve(lp);
    if (!want) {
      CHECK(sol.status == LPSolution::Status::infeasible);
      continue;
    }
    REQUIRE(sol.status == LPSolution::Status::optimal);
    CHECK(sol.objective == doctest::Approx(*want).epsilon(1e-7));
    CHECK(sol.primal_residual < 1e-7);
    check_duals(lp, sol);
    ++solved;
  }
  // the mix must actually exercise the optimal path most of the time
  CHECK(solved > 250);
}

TEST_CASE("redundant equality rows are tolerated") {
  LinearProgram lp;
  lp.add_var(1.0);
  lp.add_var(1.0);
  lp.rows.push_back({{{0, 1.0}, {1, 1.0}}, Rel::eq, 1.0});
  lp.rows.push_back({{{0, 2.0}, {1, 2.0}}, Rel::eq, 2.0});  // same hyperplane
  lp.rows.push_back({{{0, 1.0}}, Rel::ge, 0.25});
  const LPSolution sol = simplex_solve(lp);
  REQUIRE(sol.status == LPSolution::Status::optimal);
  CHECK(sol.objective == doctest::Approx(1.0));
  double yb = 0.0;
  for (std::size_t r = 0; r < lp.rows.size(); ++r) yb += sol.row_duals[r] * lp.rows[r].rhs;
  CHECK(yb == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("row guard rejects oversized systems") {
  LinearProgram lp;
  lp.add_var(1.0);
  lp.rows.resize(7000, LPRow{{{0, 1.0}}, Rel::le, 1.0});
  CHECK_THROWS_AS(simplex_solve(lp), std::invalid_argument);
}
