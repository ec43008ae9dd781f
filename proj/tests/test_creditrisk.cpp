#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "capot/choquet.hpp"
#include "capot/creditrisk.hpp"
#include "capot/gauss.hpp"
#include "capot/ot.hpp"
#include "capot/transport.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace capot;

namespace {

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i)
    g[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return g;
}

std::size_t argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

// mask of exposure pairs with x1 + x2 >= t on the (n1+1)(n2+1) grid
SubsetMask exposure_upper_set(const ProductSpace& sp, unsigned n2, double t) {
  SubsetMask m(sp.x().size());
  for (std::size_t c = 0; c < sp.x().size(); ++c)
    if (static_cast<double>(c / (n2 + 1) + c % (n2 + 1)) >= t) m.set(c);
  return m;
}

}  // namespace

TEST_CASE("credit model assembly") {
  CreditModel m;
  const CreditSpaces cs = build_model(m);

  CHECK(cs.space.x().size() == 41 * 26);
  CHECK(cs.space.y().size() == 16);
  CHECK(cs.mu.at_full() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(cs.prob.at_full() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(cs.nu.at_full() == doctest::Approx(1.0).epsilon(1e-9));

  // worst cell: both counterparties at full exposure, both defaulted
  CHECK(cs.loss.at(40 * 26 + 25, 0) == doctest::Approx(65.0).epsilon(1e-12));
  CHECK(cs.loss.at(0, 0) == doctest::Approx(0.0).epsilon(1e-12));
  // both migrate to the top rating: zero severity
  CHECK(cs.loss.at(40 * 26 + 25, 15) == doctest::Approx(0.0).epsilon(1e-12));
  // one unit of exposure each, ratings (B, C): severities 0.1 and 0.2
  CHECK(cs.loss.at(1 * 26 + 1, 2 * 4 + 1) == doctest::Approx(0.3).epsilon(1e-12));

  // double-default mass equals the copula corner at the rating correlation
  const double q = norm_quantile(0.005);
  CHECK(cs.prob.at_bits(1) == doctest::Approx(bvn_cdf(q, q, m.rho_y)).epsilon(1e-12));

  // the rating capacity is the square-root distortion of the rating law
  testutil::Rng rng(2026);
  for (int t = 0; t < 20; ++t) {
    const SubsetMask b(16, rng.next() & 0xffff);
    CHECK(cs.nu(b) == doctest::Approx(std::pow(cs.prob(b), 0.5)).epsilon(1e-12));
  }

  CreditModel plain = m;
  plain.s = 1.0;
  const CreditSpaces ps = build_model(plain);
  for (int t = 0; t < 20; ++t) {
    const SubsetMask b(16, rng.next() & 0xffff);
    CHECK(ps.nu(b) == doctest::Approx(ps.prob(b)).epsilon(1e-12));
  }
}

TEST_CASE("credit model validation") {
  const CreditModel base;
  auto reject = [](CreditModel bad) { CHECK_THROWS_AS(build_model(bad), std::invalid_argument); };

  CreditModel m = base;
  m.s = 0.0;
  reject(m);
  m = base;
  m.s = 1.2;
  reject(m);
  m = base;
  m.alpha = 1.0;
  reject(m);
  m = base;
  m.p1 = 0.0;
  reject(m);
  m = base;
  m.rho_x = 1.5;
  reject(m);
  m = base;
  m.rho_y = std::nan("");
  reject(m);
  m = base;
  m.initial1 = 4;
  reject(m);
  m = base;
  m.transition[1][2] += 0.01;  // row no longer sums to one
  reject(m);
  m = base;
  m.transition[2][0] = -0.005;
  reject(m);
  m = base;
  m.severity = {1.0, 0.2, 0.1, 0.05};  // nonzero at the top rating
  reject(m);
  m = base;
  m.severity = {1.0, 0.1, 0.2, 0.0};  // severity rising with quality
  reject(m);
  m = base;
  m.severity = {0.9, 0.2, 0.1, 0.0};  // not total at default
  reject(m);
}

TEST_CASE("reduced model equals direct layercake") {
  CreditModel m;
  m.n1 = 2;
  m.n2 = 2;
  const CreditSpaces cs = build_model(m);
  REQUIRE(cs.space.size() == 9 * 16);

  const GroundFunction f = cs.loss.flatten();
  const CouplingBounds b = choquet_bounds(cs.loss, cs.mu, cs.nu, false);
  const double up = choquet_layercake(f, upper_coupling(cs.space, cs.mu, cs.nu));
  const double lo = choquet_layercake(f, lower_coupling(cs.space, cs.mu, cs.nu));
  CHECK(b.upper == doctest::Approx(up).epsilon(1e-9));
  CHECK(b.lower == doctest::Approx(lo).epsilon(1e-9));
  CHECK(b.lower <= b.upper + 1e-12);
}

TEST_CASE("simplified model grids") {
  const CreditSpaces cs = build_simplified(-0.3, 0.25);
  REQUIRE(cs.space.x().size() == 9);
  REQUIRE(cs.space.y().size() == 16);

  // exposure upper-set masses of x1 + x2 at the reference correlation -0.3
  CHECK(cs.mu(exposure_upper_set(cs.space, 2, 4.0)) == doctest::Approx(0.0494).epsilon(1e-3));
  CHECK(cs.mu(exposure_upper_set(cs.space, 2, 3.0)) == doctest::Approx(0.35).epsilon(1e-3));
  CHECK(cs.mu(exposure_upper_set(cs.space, 2, 2.0)) == doctest::Approx(0.8162).epsilon(1e-3));
  CHECK(cs.mu(exposure_upper_set(cs.space, 2, 1.0)) == doctest::Approx(0.9843).epsilon(1e-3));

  // rating mass lives on {D, C} x {D, C}
  SubsetMask live(16);
  live.set(0).set(1).set(4).set(5);
  CHECK(cs.prob(live) == doctest::Approx(1.0).epsilon(1e-12));

  // distorted capacities of the two rating upper sets: sqrt of double default,
  // sqrt of at-least-one-default
  const double q = norm_quantile(0.005);
  const double pdd = bvn_cdf(q, q, 0.25);
  CHECK(cs.nu(SubsetMask(16, 1)) == doctest::Approx(std::sqrt(pdd)).epsilon(1e-9));
  SubsetMask any_d(16);
  for (std::size_t r1 = 0; r1 < 4; ++r1)
    for (std::size_t r2 = 0; r2 < 4; ++r2)
      if (r1 == 0 || r2 == 0) any_d.set(r1 * 4 + r2);
  CHECK(cs.nu(any_d) == doctest::Approx(std::sqrt(0.01 - pdd)).epsilon(1e-9));

  // loss is the number of defaulted exposure units
  CHECK(cs.loss.at(8, 0) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(cs.loss.at(8, 5) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(cs.loss.at(2 * 3 + 1, 0 * 4 + 1) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("simplified closed form matches the pipeline") {
  const std::vector<double> grid = linspace(-0.999, 0.999, 41);
  const auto pts = simplified_closed_form(grid);
  REQUIRE(pts.size() == grid.size());

  const CreditSpaces probe = build_simplified(-0.3, 0.0);
  const double corner = probe.mu.at_bits(1ULL << 8);
  CHECK(corner == doctest::Approx(0.0494).epsilon(1e-3));

  bool clamped_seen = false, unclamped_seen = false;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& pt = pts[i];
    CHECK(pt.rho_y == doctest::Approx(grid[i]).epsilon(1e-15));
    CHECK(pt.p_dd >= 0.0);
    CHECK(pt.p_dd <= 0.005 + 1e-12);
    CHECK(std::fabs(pt.pipeline - pt.closed_form) < 1e-9);
    if (std::sqrt(pt.p_dd) >= corner) {
      unclamped_seen = true;
      CHECK(pt.printed_form == pt.closed_form);
    } else {
      clamped_seen = true;
      CHECK(pt.printed_form > pt.closed_form);
      CHECK(pt.printed_form - pt.closed_form ==
            doctest::Approx(corner - std::sqrt(pt.p_dd)).epsilon(1e-12));
    }
  }
  // both regimes of the corner term occur across the correlation range
  CHECK(clamped_seen);
  CHECK(unclamped_seen);

  // the worst case sits strictly inside the correlation range, near the
  // switch point p_dd = corner^2
  std::vector<double> risks;
  for (const auto& pt : pts) risks.push_back(pt.pipeline);
  const std::size_t best = argmax(risks);
  CHECK(best > 0);
  CHECK(best + 1 < risks.size());
  CHECK(risks[best] > risks.front() + 1e-6);
  CHECK(risks[best] > risks.back() + 1e-6);
  CHECK(std::fabs(pts[best].p_dd - corner * corner) < 5e-4);
}

TEST_CASE("simplified comonotone exposures") {
  const std::vector<double> grid = linspace(-0.999, 0.999, 21);
  const auto pts = simplified_closed_form(grid, 1.0);

  for (const auto& pt : pts) {
    const double expect = 2.0 * (std::sqrt(pt.p_dd) + std::sqrt(0.01 - pt.p_dd));
    CHECK(std::fabs(pt.pipeline - expect) < 1e-9);
  }
  // with the corner no longer binding, the bound increases with the rating
  // correlation throughout
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    CHECK(pts[i + 1].pipeline >= pts[i].pipeline - 1e-12);
  CHECK(pts.back().pipeline > pts.front().pipeline + 1e-4);
}

TEST_CASE("parameter sweeps") {
  const CreditModel base;

  SUBCASE("distortion exponent: risk falls and is convex") {
    const SweepResult r = sweep(base, SweepParam::distortion, linspace(0.1, 1.0, 10));
    REQUIRE(r.risk.size() == 10);
    for (std::size_t i = 0; i + 1 < r.risk.size(); ++i) CHECK(r.risk[i + 1] <= r.risk[i] + 1e-9);
    for (std::size_t i = 0; i + 2 < r.risk.size(); ++i)
      CHECK(r.risk[i + 2] - 2 * r.risk[i + 1] + r.risk[i] >= -1e-6);
    for (double sec : r.seconds) CHECK(sec < 1.0);
  }

  SUBCASE("exposure correlation: risk rises") {
    const SweepResult r = sweep(base, SweepParam::rho_x, linspace(-0.9, 0.9, 7));
    for (std::size_t i = 0; i + 1 < r.risk.size(); ++i) CHECK(r.risk[i + 1] >= r.risk[i] - 1e-9);
    CHECK(r.risk.back() > r.risk.front());
  }

  SUBCASE("rating correlation: worst case inside the range") {
    const SweepResult r = sweep(base, SweepParam::rho_y, linspace(-0.95, 0.95, 13));
    const std::size_t best = argmax(r.risk);
    CHECK(best > 0);
    CHECK(best + 1 < r.risk.size());
  }

  SUBCASE("grid validation") {
    CHECK_THROWS_AS(sweep(base, SweepParam::rho_x, {}), std::invalid_argument);
    CHECK_THROWS_AS(sweep(base, SweepParam::rho_x, {0.2, 0.2}), std::invalid_argument);
    CHECK_THROWS_AS(sweep(base, SweepParam::rho_x, {0.4, 0.1}), std::invalid_argument);
    // domain violations surface from the model build
    CHECK_THROWS_AS(sweep(base, SweepParam::distortion, {0.5, 1.5}), std::invalid_argument);
  }
}

TEST_CASE("expected shortfall relaxation") {
  // toy: uniform 2x2 marginals, loss 2i + j, alpha = 1/2; the worst-case
  // shortfall and its Choquet relaxation both hit the maximal loss
  {
    const ProductSpace sp(GroundSet::indexed(2, "x"), GroundSet::indexed(2, "y"));
    const LossMatrix f(sp, {0.0, 1.0, 2.0, 3.0});
    const Capacity u = make_additive(sp.x(), {0.5, 0.5});
    const Capacity v = make_additive(sp.y(), {0.5, 0.5});
    const double m = mes(f, {0.5, 0.5}, {0.5, 0.5}, 0.5);
    const double c =
        choquet_bounds(f, es_distortion(u, 0.5), es_distortion(v, 0.5), false).upper;
    CHECK(m == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(c == doctest::Approx(3.0).epsilon(1e-9));
  }

  const CreditModel base;
  const MesCmesResult r = mes_vs_cmes(base);
  CHECK(r.mes > 0.0);
  CHECK(r.cmes >= r.mes - 1e-9);
  CHECK(r.ratio == doctest::Approx(r.cmes / r.mes).epsilon(1e-15));
  // the relaxation premium stays in the documented band at the base point
  CHECK(r.ratio >= 1.2);
  CHECK(r.ratio <= 1.7);
}
