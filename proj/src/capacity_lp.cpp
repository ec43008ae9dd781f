#include "capot/capacity_lp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "capot/choquet.hpp"

namespace capot {

namespace {

constexpr std::size_t kMaxCells = 12;

void require_model_inputs(const ProductSpace& sp, const Capacity& mu, const Capacity& nu,
                          double tol) {
  if (sp.size() == 0 || sp.size() > kMaxCells)
    throw std::invalid_argument("capacity ot: model requires 1 <= p*q <= 12");
  if (!(mu.ground() == sp.x()) || !(nu.ground() == sp.y()))
    throw std::invalid_argument("capacity ot: marginals must live on the factor grounds");
  if (std::fabs(mu.at_full() - 1.0) > tol || std::fabs(nu.at_full() - 1.0) > tol)
    throw std::domain_error("capacity ot: marginal capacities must be normalized");
}

// Cell masks of the marginal rectangles G x Y / X x F, indexed by the
// marginal mask. Entry 0 is unused.
std::vector<std::uint32_t> row_cylinder_masks(const ProductSpace& sp) {
  const std::size_t p = sp.p();
  std::vector<std::uint32_t> out(std::size_t{1} << p, 0);
  for (std::uint32_t g = 1; g < out.size(); ++g)
    out[g] = static_cast<std::uint32_t>(sp.row_cylinder(SubsetMask(p, g)).low_bits());
  return out;
}

std::vector<std::uint32_t> col_cylinder_masks(const ProductSpace& sp) {
  const std::size_t q = sp.q();
  std::vector<std::uint32_t> out(std::size_t{1} << q, 0);
  for (std::uint32_t f = 1; f < out.size(); ++f)
    out[f] = static_cast<std::uint32_t>(sp.col_cylinder(SubsetMask(q, f)).low_bits());
  return out;
}

}  // namespace

CouplingLayout::CouplingLayout(const ProductSpace& sp)
    : p_(sp.p()), q_(sp.q()), cells_(sp.size()) {
  if (cells_ == 0 || cells_ > kMaxCells)
    throw std::invalid_argument("CouplingLayout: requires 1 <= p*q <= 12");
  const std::size_t full = std::size_t{1} << cells_;
  rank_.assign(full * cells_, -1);
  pairs_.reserve(cells_ << (cells_ - 1));
  for (std::uint32_t a = 0; a < full; ++a)
    for (unsigned w = 0; w < cells_; ++w) {
      if ((a >> w) & 1u) continue;
      rank_[a * cells_ + w] = static_cast<int>(pairs_.size());
      pairs_.emplace_back(a, w);
    }
}

int CouplingLayout::pi_index(std::uint32_t b) const {
  if (b == 0 || b >= (std::uint32_t{1} << cells_))
    throw std::invalid_argument("CouplingLayout: pi index needs a nonempty cell mask");
  return static_cast<int>(b) - 1;
}

int CouplingLayout::mu_index(std::uint32_t g) const {
  if (g == 0 || g >= (std::uint32_t{1} << p_))
    throw std::invalid_argument("CouplingLayout: mu index needs a nonempty X mask");
  return static_cast<int>(g) - 1;
}

int CouplingLayout::nu_index(std::uint32_t f) const {
  if (f == 0 || f >= (std::uint32_t{1} << q_))
    throw std::invalid_argument("CouplingLayout: nu index needs a nonempty Y mask");
  return static_cast<int>(((std::uint32_t{1} << p_) - 1) + f) - 1;
}

int CouplingLayout::mono_index(std::uint32_t a, unsigned w) const {
  if (a >= (std::uint32_t{1} << cells_) || w >= cells_ || ((a >> w) & 1u))
    throw std::invalid_argument("CouplingLayout: covering pair needs w outside A");
  return static_cast<int>(marginal_count()) + rank_[a * cells_ + w];
}

LinearProgram build_capacity_ot(const LossMatrix& f, const Capacity& mu, const Capacity& nu,
                                Sense sense, double tol) {
  const ProductSpace& sp = f.space();
  require_model_inputs(sp, mu, nu, tol);
  const CouplingLayout layout(sp);
  const IntegralCoefficients k = integral_coefficients(f.flatten());

  LinearProgram lp;
  lp.sense = sense;
  for (std::uint32_t b = 1; b <= layout.pi_count(); ++b)
    lp.add_var(k.values[b], VarKind::free_var);

  const auto rows = row_cylinder_masks(sp);
  const auto cols = col_cylinder_masks(sp);
  lp.rows.reserve(layout.marginal_count() + layout.mono_count());
  for (std::uint32_t g = 1; g < rows.size(); ++g) {
    LPRow r;
    r.coeffs.emplace_back(layout.pi_index(rows[g]), 1.0);
    r.rel = Rel::eq;
    r.rhs = mu.at_bits(g);
    lp.rows.push_back(std::move(r));
  }
  for (std::uint32_t fm = 1; fm < cols.size(); ++fm) {
    LPRow r;
    r.coeffs.emplace_back(layout.pi_index(cols[fm]), 1.0);
    r.rel = Rel::eq;
    r.rhs = nu.at_bits(fm);
    lp.rows.push_back(std::move(r));
  }
  for (const auto& [a, w] : layout.covering_pairs()) {
    LPRow r;
    r.coeffs.emplace_back(layout.pi_index(a | (1u << w)), 1.0);
    if (a != 0) r.coeffs.emplace_back(layout.pi_index(a), -1.0);
    r.rel = Rel::ge;
    r.rhs = 0.0;
    lp.rows.push_back(std::move(r));
  }
  return lp;
}

LinearProgram build_capacity_ot_dual(const LossMatrix& f, const Capacity& mu, const Capacity& nu,
                                     Sense sense, double tol) {
  const ProductSpace& sp = f.space();
  require_model_inputs(sp, mu, nu, tol);
  const CouplingLayout layout(sp);
  const IntegralCoefficients k = integral_coefficients(f.flatten());
  const std::size_t cells = layout.cells();

  LinearProgram lp;
  lp.sense = sense == Sense::minimize ? Sense::maximize : Sense::minimize;
  for (std::uint32_t g = 1; g < (std::uint32_t{1} << layout.p()); ++g)
    lp.add_var(mu.at_bits(g), VarKind::free_var);
  for (std::uint32_t fm = 1; fm < (std::uint32_t{1} << layout.q()); ++fm)
    lp.add_var(nu.at_bits(fm), VarKind::free_var);
  const VarKind rho_kind = sense == Sense::minimize ? VarKind::nonneg : VarKind::nonpos;
  for (std::size_t i = 0; i < layout.mono_count(); ++i) lp.add_var(0.0, rho_kind);

  // Inverse cylinder lookup: cell mask -> marginal mask, 0 when not of that shape.
  const auto rows = row_cylinder_masks(sp);
  const auto cols = col_cylinder_masks(sp);
  std::vector<std::uint32_t> as_row(layout.pi_count() + 1, 0), as_col(layout.pi_count() + 1, 0);
  for (std::uint32_t g = 1; g < rows.size(); ++g) as_row[rows[g]] = g;
  for (std::uint32_t fm = 1; fm < cols.size(); ++fm) as_col[cols[fm]] = fm;

  lp.rows.reserve(layout.pi_count());
  for (std::uint32_t b = 1; b <= layout.pi_count(); ++b) {
    LPRow r;
    if (as_row[b] != 0) r.coeffs.emplace_back(layout.mu_index(as_row[b]), 1.0);
    if (as_col[b] != 0) r.coeffs.emplace_back(layout.nu_index(as_col[b]), 1.0);
    for (unsigned w = 0; w < cells; ++w) {
      if ((b >> w) & 1u)
        r.coeffs.emplace_back(layout.mono_index(b & ~(1u << w), w), 1.0);
      else
        r.coeffs.emplace_back(layout.mono_index(b, w), -1.0);
    }
    r.rel = Rel::eq;
    r.rhs = k.values[b];
    lp.rows.push_back(std::move(r));
  }
  return lp;
}

LinearProgram build_dual_transformed(const LossMatrix& f, const Capacity& mu, const Capacity& nu,
                                     Sense sense, double tol) {
  const ProductSpace& sp = f.space();
  require_model_inputs(sp, mu, nu, tol);
  const CouplingLayout layout(sp);
  const std::size_t cells = layout.cells();
  const std::uint32_t full = (std::uint32_t{1} << cells) - 1;
  const MobiusVector m_mu = mobius(mu);
  const MobiusVector m_nu = mobius(nu);

  LinearProgram lp;
  lp.sense = sense == Sense::minimize ? Sense::maximize : Sense::minimize;
  for (std::uint32_t g = 1; g < (std::uint32_t{1} << layout.p()); ++g)
    lp.add_var(m_mu.values[g], VarKind::free_var);
  for (std::uint32_t fm = 1; fm < (std::uint32_t{1} << layout.q()); ++fm)
    lp.add_var(m_nu.values[fm], VarKind::free_var);
  const VarKind rho_kind = sense == Sense::minimize ? VarKind::nonneg : VarKind::nonpos;
  for (std::size_t i = 0; i < layout.mono_count(); ++i) lp.add_var(0.0, rho_kind);

  const std::vector<double>& cost = f.values();
  lp.rows.reserve(layout.pi_count());
  for (std::uint32_t a = 1; a <= full; ++a) {
    LPRow r;
    const SubsetMask am(cells, a);
    const std::uint32_t ax =
        static_cast<std::uint32_t>(project_exists(sp, am, Axis::x).low_bits());
    const std::uint32_t ay =
        static_cast<std::uint32_t>(project_exists(sp, am, Axis::y).low_bits());
    r.coeffs.emplace_back(layout.mu_index(ax), 1.0);
    r.coeffs.emplace_back(layout.nu_index(ay), 1.0);
    // Multiplier rho(D - w, w) enters for every superset D of A and w in A;
    // distinct (D, w) hit distinct columns, so no merging is needed.
    for (std::uint32_t d = a;; d = (d + 1) | a) {
      for (unsigned w = 0; w < cells; ++w)
        if ((a >> w) & 1u) r.coeffs.emplace_back(layout.mono_index(d & ~(1u << w), w), 1.0);
      if (d == full) break;
    }
    double lo = cost[std::countr_zero(a)];
    for (unsigned c = 0; c < cells; ++c)
      if ((a >> c) & 1u) lo = std::min(lo, cost[c]);
    r.rel = Rel::eq;
    r.rhs = lo;
    lp.rows.push_back(std::move(r));
  }
  return lp;
}

std::vector<double> coupling_from_solution(const LPSolution& sol, const CouplingLayout& layout) {
  if (sol.x.size() < layout.pi_count())
    throw std::invalid_argument("coupling_from_solution: solution does not fit the layout");
  std::vector<double> table(layout.pi_count() + 1, 0.0);
  for (std::uint32_t b = 1; b <= layout.pi_count(); ++b)
    table[b] = sol.x[static_cast<std::size_t>(layout.pi_index(b))];
  return table;
}

DualityReport verify_duality(const LossMatrix& f, const Capacity& mu, const Capacity& nu,
                             Sense sense, const SimplexOptions& options, double tol) {
  const CouplingLayout layout(f.space());
  DualityReport rep;
  rep.primal = simplex_solve(build_capacity_ot(f, mu, nu, sense, tol), options);
  rep.dual = simplex_solve(build_capacity_ot_dual(f, mu, nu, sense, tol), options);
  rep.transformed = simplex_solve(build_dual_transformed(f, mu, nu, sense, tol), options);
  rep.all_optimal = rep.primal.status == LPSolution::Status::optimal &&
                    rep.dual.status == LPSolution::Status::optimal &&
                    rep.transformed.status == LPSolution::Status::optimal;
  if (!rep.all_optimal) return rep;

  rep.primal_dual_gap = std::fabs(rep.primal.objective - rep.dual.objective);
  rep.dual_transformed_gap = std::fabs(rep.dual.objective - rep.transformed.objective);

  const std::vector<double> pi = coupling_from_solution(rep.primal, layout);
  double worst = 0.0;
  for (const auto& [a, w] : layout.covering_pairs()) {
    const double rho = rep.dual.x[static_cast<std::size_t>(layout.mono_index(a, w))];
    const double step = pi[a | (1u << w)] - (a == 0 ? 0.0 : pi[a]);
    worst = std::max(worst, std::fabs(rho * step));
  }
  rep.max_slackness_violation = worst;
  return rep;
}

}  // namespace capot
