#include "capot/capacity_lp.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "capot/choquet.hpp"
#include "capot/transport.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace capot;

namespace {

ProductSpace make_space(std::size_t p, std::size_t q) {
  return ProductSpace(GroundSet::indexed(p, "x"), GroundSet::indexed(q, "y"));
}

LossMatrix random_loss(const ProductSpace& sp, testutil::Rng& rng, int levels = 0) {
  return LossMatrix(sp, testutil::random_values(sp.size(), rng, levels));
}

double solve_objective(const LinearProgram& lp) {
  const LPSolution sol = simplex_solve(lp);
  REQUIRE(sol.status == LPSolution::Status::optimal);
  return sol.objective;
}

}  // namespace

TEST_CASE("coupling layout: counts, ordering and index guards") {
  const ProductSpace sp = make_space(2, 2);
  const CouplingLayout layout(sp);

  CHECK(layout.cells() == 4);
  CHECK(layout.pi_count() == 15);
  CHECK(layout.marginal_count() == 6);
  CHECK(layout.mono_count() == 32);  // 4 * 2^3 covering pairs

  // Pair order is (A ascending, w ascending); ranks round-trip.
  const auto& pairs = layout.covering_pairs();
  REQUIRE(pairs.size() == 32);
  CHECK(pairs.front() == std::pair<std::uint32_t, unsigned>{0u, 0u});
  CHECK(pairs.back() == std::pair<std::uint32_t, unsigned>{14u, 0u});
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto [a, w] = pairs[i];
    CHECK(layout.mono_index(a, w) == static_cast<int>(layout.marginal_count() + i));
  }

  CHECK(layout.pi_index(1) == 0);
  CHECK(layout.pi_index(15) == 14);
  CHECK(layout.mu_index(1) == 0);
  CHECK(layout.nu_index(1) == 3);
  CHECK(layout.nu_index(3) == 5);

  CHECK_THROWS_AS(layout.pi_index(0), std::invalid_argument);
  CHECK_THROWS_AS(layout.pi_index(16), std::invalid_argument);
  CHECK_THROWS_AS(layout.mu_index(4), std::invalid_argument);
  CHECK_THROWS_AS(layout.mono_index(1, 0), std::invalid_argument);  // w already in A
  CHECK_THROWS_AS(layout.mono_index(0, 4), std::invalid_argument);
}

TEST_CASE("direct model: shape and the objective as integral coefficients") {
  const ProductSpace sp = make_space(2, 2);
  const Capacity mu = make_additive(sp.x(), {0.5, 0.5});
  const Capacity nu = make_additive(sp.y(), {0.5, 0.5});
  const LossMatrix f(sp, {3.0, 1.0, 2.0, 5.0});
  const CouplingLayout layout(sp);

  const LinearProgram lp = build_capacity_ot(f, mu, nu, Sense::minimize);
  CHECK(lp.num_vars == 15);
  CHECK(lp.rows.size() == 6 + 32);
  for (const auto& kind : lp.kinds) CHECK(kind == VarKind::free_var);

  // Marginal rows carry the capacity values of the cylinder sets.
  CHECK(lp.rows[layout.mu_index(0b01)].rhs == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(lp.rows[layout.mu_index(0b11)].rhs == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(lp.rows[layout.nu_index(0b10)].rhs == doctest::Approx(0.5).epsilon(1e-12));
  // Cell order is row-major: x0 row occupies cells {0,1}, y0 column {0,2}.
  CHECK(lp.rows[layout.mu_index(0b01)].coeffs.front().first == layout.pi_index(0b0011));
  CHECK(lp.rows[layout.nu_index(0b01)].coeffs.front().first == layout.pi_index(0b0101));

  // The objective applied to any coupling table reproduces its Choquet
  // integral; checked on the densified lower coupling.
  const Capacity lower = lower_coupling(sp, mu, nu).densified();
  const auto& table = lower.dense_values();
  double agg = 0.0;
  for (std::uint32_t b = 1; b <= layout.pi_count(); ++b)
    agg += lp.objective[layout.pi_index(b)] * table[b];
  const double direct = choquet_layercake(f.flatten(), lower);
  CHECK(agg == doctest::Approx(direct).epsilon(1e-10));
}

TEST_CASE("two by two uniform marginals with a 0/1 diagonal cost") {
  const ProductSpace sp = make_space(2, 2);
  const Capacity mu = make_additive(sp.x(), {0.5, 0.5});
  const Capacity nu = make_additive(sp.y(), {0.5, 0.5});
  const LossMatrix f(sp, {0.0, 1.0, 1.0, 0.0});

  CHECK(solve_objective(build_capacity_ot(f, mu, nu, Sense::minimize)) ==
        doctest::Approx(0.0).epsilon(1e-9));
  CHECK(solve_objective(build_capacity_ot(f, mu, nu, Sense::maximize)) ==
        doctest::Approx(1.0).epsilon(1e-9));

  const CouplingBounds bounds = choquet_bounds(f, mu, nu, false);
  CHECK(bounds.lower == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(bounds.upper == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("degenerate 1 x 2 product pins the coupling to the Y marginal") {
  const ProductSpace sp = make_space(1, 2);
  const Capacity mu = make_additive(sp.x(), {1.0});
  testutil::Rng rng(0xC0FFEEu);
  for (int trial = 0; trial < 5; ++trial) {
    const Capacity nu = testutil::random_capacity(sp.y(), rng);
    const LossMatrix f(sp, testutil::random_values(2, rng));
    const GroundFunction fy(sp.y(), f.values());
    const double integral = choquet_layercake(fy, nu);
    CHECK(solve_objective(build_capacity_ot(f, mu, nu, Sense::minimize)) ==
          doctest::Approx(integral).epsilon(1e-9));
    CHECK(solve_objective(build_capacity_ot(f, mu, nu, Sense::maximize)) ==
          doctest::Approx(integral).epsilon(1e-9));
  }
}

TEST_CASE("LP optima match the closed-form bounds on random instances") {
  testutil::Rng rng(0x5EEDED01u);
  const struct {
    std::size_t p, q;
    int trials;
  } plan[] = {{2, 2, 25}, {2, 3, 10}, {3, 2, 5}};

  for (const auto& [p, q, trials] : plan) {
    const ProductSpace sp = make_space(p, q);
    for (int t = 0; t < trials; ++t) {
      const Capacity mu = testutil::random_capacity(sp.x(), rng);
      const Capacity nu = testutil::random_capacity(sp.y(), rng);
      const LossMatrix f = random_loss(sp, rng, t % 2 ? 4 : 0);
      const CouplingBounds bounds = choquet_bounds(f, mu, nu, false);

      const double lo = solve_objective(build_capacity_ot(f, mu, nu, Sense::minimize));
      const double hi = solve_objective(build_capacity_ot(f, mu, nu, Sense::maximize));
      CHECK(lo == doctest::Approx(bounds.lower).epsilon(1e-8));
      CHECK(hi == doctest::Approx(bounds.upper).epsilon(1e-8));
      CHECK(lo <= hi + 1e-10);
    }
  }
}

TEST_CASE("dual model: transposed shape and multiplier signs") {
  const ProductSpace sp = make_space(2, 3);
  testutil::Rng rng(0xD0Au);
  const Capacity mu = testutil::random_capacity(sp.x(), rng);
  const Capacity nu = testutil::random_capacity(sp.y(), rng);
  const LossMatrix f = random_loss(sp, rng);
  const CouplingLayout layout(sp);

  const LinearProgram dual_min = build_capacity_ot_dual(f, mu, nu, Sense::minimize);
  CHECK(dual_min.sense == Sense::maximize);
  CHECK(dual_min.num_vars ==
        static_cast<int>(layout.marginal_count() + layout.mono_count()));
  CHECK(dual_min.rows.size() == layout.pi_count());
  for (std::size_t v = 0; v < layout.marginal_count(); ++v)
    CHECK(dual_min.kinds[v] == VarKind::free_var);
  for (std::size_t v = layout.marginal_count(); v < dual_min.kinds.size(); ++v)
    CHECK(dual_min.kinds[v] == VarKind::nonneg);

  const LinearProgram dual_max = build_capacity_ot_dual(f, mu, nu, Sense::maximize);
  CHECK(dual_max.sense == Sense::minimize);
  for (std::size_t v = layout.marginal_count(); v < dual_max.kinds.size(); ++v)
    CHECK(dual_max.kinds[v] == VarKind::nonpos);

  // Every set row references its covering multipliers: |B| entering plus
  // cells - |B| leaving, and the marginal variable only on cylinder sets.
  const std::uint32_t full = (1u << sp.size()) - 1;
  for (std::uint32_t b = 1; b <= full; ++b) {
    const auto& row = dual_min.rows[layout.pi_index(b)];
    std::size_t marg = 0;
    for (const auto& [var, coef] : row.coeffs)
      if (var < static_cast<int>(layout.marginal_count())) {
        ++marg;
        CHECK(coef == 1.0);
      }
    const bool is_row_cyl =
        b == static_cast<std::uint32_t>(
                 sp.row_cylinder(project_exists(sp, SubsetMask(sp.size(), b), Axis::x))
                     .low_bits());
    const bool is_col_cyl =
        b == static_cast<std::uint32_t>(
                 sp.col_cylinder(project_exists(sp, SubsetMask(sp.size(), b), Axis::y))
                     .low_bits());
    CHECK(marg == static_cast<std::size_t>(is_row_cyl) + static_cast<std::size_t>(is_col_cyl));
    CHECK(row.coeffs.size() == marg + sp.size());
  }
}

TEST_CASE("transformed dual: right-hand sides are set minima of the cost") {
  const ProductSpace sp = make_space(2, 2);
  const Capacity mu = make_additive(sp.x(), {0.4, 0.6});
  const Capacity nu = make_additive(sp.y(), {0.7, 0.3});
  const LossMatrix f(sp, {3.0, 1.0, 2.0, 5.0});
  const CouplingLayout layout(sp);

  const LinearProgram lp = build_dual_transformed(f, mu, nu, Sense::minimize);
  CHECK(lp.rows.size() == layout.pi_count());
  CHECK(lp.rows[layout.pi_index(0b1001)].rhs == doctest::Approx(3.0).epsilon(1e-12));  // {c0,c3}
  CHECK(lp.rows[layout.pi_index(0b0110)].rhs == doctest::Approx(1.0).epsilon(1e-12));  // {c1,c2}
  CHECK(lp.rows[layout.pi_index(0b1111)].rhs == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(lp.rows[layout.pi_index(0b1000)].rhs == doctest::Approx(5.0).epsilon(1e-12));

  // Additive marginals put all Moebius weight on singleton aggregates.
  for (std::uint32_t g = 1; g < 4; ++g) {
    const double mass = lp.objective[layout.mu_index(g)];
    if (g == 1 || g == 2)
      CHECK(std::fabs(mass) > 0.1);
    else
      CHECK(mass == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("strong duality and complementary slackness across the three models") {
  testutil::Rng rng(0xABCD1234u);
  const struct {
    std::size_t p, q;
    int trials;
  } plan[] = {{2, 2, 10}, {2, 3, 4}};

  for (const auto& [p, q, trials] : plan) {
    const ProductSpace sp = make_space(p, q);
    const CouplingLayout layout(sp);
    for (int t = 0; t < trials; ++t) {
      const Capacity mu = testutil::random_capacity(sp.x(), rng);
      const Capacity nu = testutil::random_capacity(sp.y(), rng);
      const LossMatrix f = random_loss(sp, rng);
      const CouplingBounds bounds = choquet_bounds(f, mu, nu, false);

      for (const Sense sense : {Sense::minimize, Sense::maximize}) {
        const DualityReport rep = verify_duality(f, mu, nu, sense);
        REQUIRE(rep.all_optimal);
        CHECK(rep.primal_dual_gap < 1e-8);
        CHECK(rep.dual_transformed_gap < 1e-8);
        CHECK(rep.max_slackness_violation < 1e-8);
        const double closed = sense == Sense::minimize ? bounds.lower : bounds.upper;
        CHECK(rep.primal.objective == doctest::Approx(closed).epsilon(1e-8));

        // Slackness also holds against the closed-form extremal coupling,
        // which is itself an optimal solution of the direct program.
        const Capacity extremal = sense == Sense::minimize
                                      ? lower_coupling(sp, mu, nu).densified()
                                      : upper_coupling(sp, mu, nu).densified();
        const auto& table = extremal.dense_values();
        for (const auto& [a, w] : layout.covering_pairs()) {
          const double rho = rep.dual.x[static_cast<std::size_t>(layout.mono_index(a, w))];
          const double step = table[a | (1u << w)] - table[a];
          CHECK(std::fabs(rho * step) < 1e-8);
        }

        // The direct solve prices its rows consistently: duals times
        // right-hand sides reproduce the objective.
        double yb = 0.0;
        const LinearProgram primal = build_capacity_ot(f, mu, nu, sense);
        for (std::size_t r = 0; r < primal.rows.size(); ++r)
          yb += rep.primal.row_duals[r] * primal.rows[r].rhs;
        CHECK(yb == doctest::Approx(rep.primal.objective).epsilon(1e-8));
      }
    }
  }
}

TEST_CASE("three by three instance agrees with the closed form at timing scale") {
  const ProductSpace sp = make_space(3, 3);
  testutil::Rng rng(0x3333u);
  const Capacity mu = testutil::random_capacity(sp.x(), rng);
  const Capacity nu = testutil::random_capacity(sp.y(), rng);
  const LossMatrix f = random_loss(sp, rng);
  const CouplingBounds bounds = choquet_bounds(f, mu, nu, false);

  const auto start = std::chrono::steady_clock::now();
  const LPSolution lo = simplex_solve(build_capacity_ot(f, mu, nu, Sense::minimize));
  const LPSolution hi = simplex_solve(build_capacity_ot(f, mu, nu, Sense::maximize));
  const double ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - start)
                        .count();
  MESSAGE("3x3 direct solves: ", ms, " ms, iterations ", lo.iterations, " + ", hi.iterations);

  REQUIRE(lo.status == LPSolution::Status::optimal);
  REQUIRE(hi.status == LPSolution::Status::optimal);
  CHECK(lo.objective == doctest::Approx(bounds.lower).epsilon(1e-8));
  CHECK(hi.objective == doctest::Approx(bounds.upper).epsilon(1e-8));
}

TEST_CASE("model builders validate their inputs") {
  const ProductSpace sp = make_space(2, 2);
  const Capacity mu = make_additive(sp.x(), {0.5, 0.5});
  const Capacity nu = make_additive(sp.y(), {0.5, 0.5});
  const LossMatrix f(sp, {0.0, 1.0, 1.0, 0.0});

  // Non-normalized marginal.
  const Capacity bad = Capacity::dense(sp.x(), {0.0, 0.3, 0.4, 0.8});
  CHECK_THROWS_AS(build_capacity_ot(f, bad, nu, Sense::minimize), std::domain_error);
  CHECK_THROWS_AS(build_capacity_ot_dual(f, bad, nu, Sense::minimize), std::domain_error);
  CHECK_THROWS_AS(build_dual_transformed(f, bad, nu, Sense::minimize), std::domain_error);

  // Marginal on the wrong ground set.
  const Capacity other = make_additive(GroundSet::indexed(2, "w"), {0.5, 0.5});
  CHECK_THROWS_AS(build_capacity_ot(f, other, nu, Sense::minimize), std::invalid_argument);

  // Product too large to enumerate.
  const ProductSpace big = make_space(4, 4);
  const LossMatrix bigf(big, std::vector<double>(16, 0.0));
  const Capacity bmu = make_additive(big.x(), {0.25, 0.25, 0.25, 0.25});
  const Capacity bnu = make_additive(big.y(), {0.25, 0.25, 0.25, 0.25});
  CHECK_THROWS_AS(build_capacity_ot(bigf, bmu, bnu, Sense::minimize), std::invalid_argument);
  CHECK_THROWS_AS((void)CouplingLayout(big), std::invalid_argument);
}
