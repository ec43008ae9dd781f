#include "capot/gamecore.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <future>
#include <limits>
#include <stdexcept>
#include <thread>

#include "capot/choquet.hpp"
#include "capot/ot.hpp"

namespace capot {
namespace {

// Subset sums of point weights over every mask, by peeling the lowest bit.
std::vector<double> subset_sums(const std::vector<double>& w) {
  const std::size_t n = w.size();
  std::vector<double> s(std::size_t{1} << n, 0.0);
  for (std::uint64_t m = 1; m < s.size(); ++m)
    s[m] = s[m & (m - 1)] + w[static_cast<std::size_t>(std::countr_zero(m))];
  return s;
}

std::vector<double> dense_table(const Capacity& gamma) {
  const Capacity d = gamma.densified();
  return d.dense_values();
}

// Cover program shared by balancedness and exactness: one equality row per
// point, one column per nonempty subset A with objective gamma(A) hitting
// the rows of its members, rhs = indicator of a target set. With every
// column nonnegative the dual minimizes the total mass of an additive
// measure dominating gamma on all sets (the balancedness form: the optimum
// exceeds gamma(full) exactly when the core is empty). Letting the full-set
// column run free pins the dual total to gamma(full), so against the
// all-ones rhs replaced by the indicator of S the optimum becomes the least
// mass a core element places on S (the exactness form; unbounded iff the
// core is empty).
LinearProgram cover_program(const std::vector<double>& g, std::size_t n, bool pin_total) {
  LinearProgram lp;
  lp.sense = Sense::maximize;
  lp.rows.resize(n);
  for (auto& row : lp.rows) row.rel = Rel::eq;
  const std::uint64_t full = (std::uint64_t{1} << n) - 1;
  for (std::uint64_t a = 1; a <= full; ++a) {
    const VarKind kind = pin_total && a == full ? VarKind::free_var : VarKind::nonneg;
    const int col = lp.add_var(g[a], kind);
    for (std::uint64_t rest = a; rest; rest &= rest - 1)
      lp.rows[static_cast<std::size_t>(std::countr_zero(rest))].coeffs.emplace_back(col, 1.0);
  }
  return lp;
}

void set_cover_target(LinearProgram& lp, std::uint64_t target) {
  for (std::size_t z = 0; z < lp.rows.size(); ++z)
    lp.rows[z].rhs = (target >> z) & 1u ? 1.0 : 0.0;
}

CoreCertificate dense_core_nonempty(const Capacity& gamma, double tol) {
  const std::size_t n = gamma.n();
  if (n > 16) throw std::invalid_argument("core: ground set too large for the cover program");
  if (n == 0) return {true, std::vector<double>{}, 0.0};

  const std::vector<double> g = dense_table(gamma);
  LinearProgram lp = cover_program(g, n, false);
  set_cover_target(lp, (std::uint64_t{1} << n) - 1);
  const LPSolution sol = simplex_solve(lp);
  if (sol.status != LPSolution::Status::optimal)
    throw std::runtime_error("core: cover program did not reach an optimum");

  CoreCertificate cert;
  cert.balanced_excess = std::max(0.0, sol.objective - g.back());
  if (cert.balanced_excess > tol) return cert;

  // The row prices of the optimal cover dominate gamma columnwise and sum to
  // the optimum, so at excess zero they are a core element.
  std::vector<double> w = sol.row_duals;
  for (double& x : w)
    if (x < 0.0 && x > -tol) x = 0.0;
  if (!core_contains(gamma, w, std::max(tol, 1e-7)))
    throw std::runtime_error("core: cover prices failed the membership check");
  cert.nonempty = true;
  cert.witness = std::move(w);
  return cert;
}

}  // namespace

bool core_contains(const Capacity& gamma, const std::vector<double>& weights, double tol) {
  const std::size_t n = gamma.n();
  if (n > 20) throw std::invalid_argument("core: ground set too large to check membership");
  if (weights.size() != n)
    throw std::invalid_argument("core: weight count does not match the ground set");
  const std::vector<double> g = dense_table(gamma);
  const std::vector<double> s = subset_sums(weights);
  for (std::uint64_t a = 1; a < s.size(); ++a)
    if (s[a] < g[a] - tol) return false;
  return std::abs(s.back() - g.back()) <= tol;
}

CoreCertificate core_nonempty(const Capacity& gamma, double tol) {
  const auto tag = gamma.product_tag();
  if (!tag) return dense_core_nonempty(gamma, tol);

  // A one-point factor collapses the coupling onto the other marginal: every
  // cell set is a cylinder, so the cores coincide (cell index == point index).
  if (tag->p == 1) return core_nonempty(*tag->nu, tol);
  if (tag->q == 1) return core_nonempty(*tag->mu, tol);

  if (tag->kind == ProductTag::Kind::upper_coupling) {
    // Two disjoint crossed cylinder unions both carry value one under the
    // largest coupling, so no additive measure of total one dominates it.
    CoreCertificate cert;
    cert.balanced_excess = std::numeric_limits<double>::infinity();
    return cert;
  }

  const CoreCertificate cu = core_nonempty(*tag->mu, tol);
  const CoreCertificate cv = core_nonempty(*tag->nu, tol);
  CoreCertificate cert;
  cert.balanced_excess = std::max(cu.balanced_excess, cv.balanced_excess);
  cert.nonempty = cu.nonempty && cv.nonempty;
  if (!cert.nonempty) return cert;

  // Any coupling of marginal core elements dominates the smallest coupling;
  // the product coupling is the canonical witness.
  std::vector<double> w(tag->p * tag->q);
  for (std::size_t i = 0; i < tag->p; ++i)
    for (std::size_t j = 0; j < tag->q; ++j)
      w[i * tag->q + j] = (*cu.witness)[i] * (*cv.witness)[j];
  if (tag->p * tag->q <= 12 && !core_contains(gamma, w, std::max(tol, 1e-7)))
    throw std::runtime_error("core: product witness failed the membership check");
  cert.witness = std::move(w);
  return cert;
}

bool core_pistar_membership(const ProductSpace& sp, const std::vector<double>& weights,
                            const Capacity& mu, const Capacity& nu, double tol) {
  if (weights.size() != sp.size())
    throw std::invalid_argument("core: weight count does not match the cell count");
  if (!(mu.ground() == sp.x()) || !(nu.ground() == sp.y()))
    throw std::invalid_argument("core: marginals must live on the factor grounds");

  // Cell masses must be nonnegative (the smallest coupling vanishes on
  // singletons), and the additive marginals must lie in the factor cores.
  std::vector<double> u(sp.p(), 0.0), v(sp.q(), 0.0);
  for (std::size_t i = 0; i < sp.p(); ++i)
    for (std::size_t j = 0; j < sp.q(); ++j) {
      const double w = weights[sp.cell(i, j)];
      if (w < -tol) return false;
      u[i] += w;
      v[j] += w;
    }
  return core_contains(mu, u, tol) && core_contains(nu, v, tol);
}

ExactnessReport is_exact(const Capacity& gamma, double tol) {
  const std::size_t n = gamma.n();
  if (n > 12) throw std::invalid_argument("exactness: ground set too large");
  if (n == 0) return {true, false, {0.0}, {}};

  ExactnessReport report;
  const std::vector<double> g = dense_table(gamma);
  {
    const Capacity d = Capacity::dense_unchecked(gamma.ground(), g);
    const CoreCertificate cert = dense_core_nonempty(d, tol);
    if (!cert.nonempty) {
      report.core_empty = true;
      return report;
    }
  }

  const std::uint64_t full = (std::uint64_t{1} << n) - 1;
  report.core_minimum.assign(full + 1, 0.0);
  const LinearProgram base = cover_program(g, n, true);

  // The per-set programs share their columns and differ only in the rhs;
  // each worker owns a copy and sweeps a stride of targets.
  const std::size_t workers =
      std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), 8);
  std::vector<std::future<void>> tasks;
  std::vector<double>& minima = report.core_minimum;
  for (std::size_t t = 0; t < workers; ++t) {
    tasks.push_back(std::async(std::launch::async, [&, t]() {
      LinearProgram lp = base;
      for (std::uint64_t s = 1 + t; s <= full; s += workers) {
        set_cover_target(lp, s);
        const LPSolution sol = simplex_solve(lp);
        if (sol.status != LPSolution::Status::optimal)
          throw std::runtime_error("exactness: cover program did not reach an optimum");
        minima[s] = sol.objective;
      }
    }));
  }
  for (auto& f : tasks) f.get();

  for (std::uint64_t s = 1; s <= full; ++s)
    if (minima[s] > g[s] + tol) report.failures.push_back(s);
  report.exact = report.failures.empty();
  return report;
}

double tilde_pi(const ProductSpace& sp, const Capacity& mu, const Capacity& nu,
                const SubsetMask& cells, double tol) {
  if (!(mu.ground() == sp.x()) || !(nu.ground() == sp.y()))
    throw std::invalid_argument("tilde: marginals must live on the factor grounds");
  if (cells.universe() != sp.size())
    throw std::invalid_argument("tilde: cell mask does not match the product space");
  if (std::abs(mu.at_full() - 1.0) > tol || std::abs(nu.at_full() - 1.0) > tol)
    throw std::domain_error("tilde: marginal capacities must be normalized");
  if (sp.p() > 12 || sp.q() > 12)
    throw std::invalid_argument("tilde: factors too large for the marginal-core program");

  // Additive marginals have singleton cores, so the optimum is a plain
  // transportation solve against the indicator cost of the cell set.
  const bool both_additive = [&] {
    try {
      (void)extract_additive_weights(mu, tol);
      (void)extract_additive_weights(nu, tol);
      return true;
    } catch (const std::exception&) {
      return false;
    }
  }();
  if (both_additive) {
    std::vector<double> cost(sp.size(), 0.0);
    cells.for_each([&](std::size_t c) { cost[c] = 1.0; });
    const LPSolution sol =
        ot_classic(LossMatrix(sp, std::move(cost)), extract_additive_weights(mu, tol),
                   extract_additive_weights(nu, tol), Sense::minimize);
    return std::max(0.0, sol.objective);
  }

  // General marginals: minimize the mass on the cell set over nonnegative
  // couplings whose marginals dominate mu and nu (total pinned to one).
  LinearProgram lp;
  lp.sense = Sense::minimize;
  for (std::size_t c = 0; c < sp.size(); ++c) lp.add_var(cells.test(c) ? 1.0 : 0.0);
  const auto dominate_rows = [&](std::size_t points, Axis axis, const Capacity& marg) {
    const std::uint64_t mfull = (std::uint64_t{1} << points) - 1;
    for (std::uint64_t a = 1; a < mfull; ++a) {
      LPRow row;
      row.rel = Rel::ge;
      row.rhs = marg.at_bits(a);
      for (std::size_t c = 0; c < sp.size(); ++c) {
        const std::size_t pt = axis == Axis::x ? sp.row_of(c) : sp.col_of(c);
        if ((a >> pt) & 1u) row.coeffs.emplace_back(static_cast<int>(c), 1.0);
      }
      lp.rows.push_back(std::move(row));
    }
  };
  dominate_rows(sp.p(), Axis::x, mu);
  dominate_rows(sp.q(), Axis::y, nu);
  LPRow total;
  total.rel = Rel::eq;
  total.rhs = 1.0;
  for (std::size_t c = 0; c < sp.size(); ++c) total.coeffs.emplace_back(static_cast<int>(c), 1.0);
  lp.rows.push_back(std::move(total));

  const LPSolution sol = simplex_solve(lp);
  if (sol.status == LPSolution::Status::infeasible)
    throw std::domain_error("tilde: a marginal core is empty");
  if (sol.status != LPSolution::Status::optimal)
    throw std::runtime_error("tilde: marginal-core program did not reach an optimum");
  return std::max(0.0, sol.objective);
}

}  // namespace capot
