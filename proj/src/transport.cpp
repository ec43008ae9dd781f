#include "capot/transport.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "capot/lattice.hpp"

namespace capot {

namespace {

void require_factors(const ProductSpace& sp, const Capacity& mu, const Capacity& nu) {
  if (!(mu.ground() == sp.x()) || !(nu.ground() == sp.y()))
    throw std::invalid_argument("product coupling: marginals must live on the factor grounds");
}

void require_normalized_pair(const Capacity& mu, const Capacity& nu, double tol) {
  if (std::fabs(mu.at_full() - 1.0) > tol || std::fabs(nu.at_full() - 1.0) > tol)
    throw std::domain_error("product coupling: marginal capacities must be normalized");
}

std::shared_ptr<const ProductTag> make_tag(ProductTag::Kind kind, const ProductSpace& sp,
                                           const Capacity& mu, const Capacity& nu) {
  auto tag = std::make_shared<ProductTag>();
  tag->kind = kind;
  tag->p = sp.p();
  tag->q = sp.q();
  tag->mu = std::make_shared<const Capacity>(mu);
  tag->nu = std::make_shared<const Capacity>(nu);
  return tag;
}

}  // namespace

Capacity lower_coupling(const ProductSpace& sp, const Capacity& mu, const Capacity& nu,
                        double tol) {
  require_factors(sp, mu, nu);
  require_normalized_pair(mu, nu, tol);
  Capacity c = Capacity::rule_backed(sp.cells(), [sp, mu, nu](const SubsetMask& n) {
    const double mx = mu(project_forall(sp, n, Axis::x));
    const double my = nu(project_forall(sp, n, Axis::y));
    return std::max(mx, my);
  });
  return c.with_product_tag(make_tag(ProductTag::Kind::lower_coupling, sp, mu, nu));
}

Capacity upper_coupling(const ProductSpace& sp, const Capacity& mu, const Capacity& nu,
                        double tol) {
  require_factors(sp, mu, nu);
  require_normalized_pair(mu, nu, tol);
  Capacity c = Capacity::rule_backed(sp.cells(), [sp, mu, nu](const SubsetMask& n) {
    if (n.none()) return 0.0;
    const double mx = mu(project_exists(sp, n, Axis::x));
    const double my = nu(project_exists(sp, n, Axis::y));
    return std::min(mx, my);
  });
  return c.with_product_tag(make_tag(ProductTag::Kind::upper_coupling, sp, mu, nu));
}

std::pair<Capacity, Capacity> marginals_of(const Capacity& pi, const ProductSpace& sp) {
  if (!(pi.ground() == sp.cells()))
    throw std::invalid_argument("marginals_of: coupling does not live on the cell ground");
  if (sp.p() > kDenseLimit || sp.q() > kDenseLimit)
    throw std::invalid_argument("marginals_of: factor too large to tabulate");
  std::vector<double> mx(std::size_t{1} << sp.p()), my(std::size_t{1} << sp.q());
  for (std::size_t a = 0; a < mx.size(); ++a)
    mx[a] = pi(sp.row_cylinder(SubsetMask(sp.p(), a)));
  for (std::size_t b = 0; b < my.size(); ++b)
    my[b] = pi(sp.col_cylinder(SubsetMask(sp.q(), b)));
  return {Capacity::dense_unchecked(sp.x(), std::move(mx)),
          Capacity::dense_unchecked(sp.y(), std::move(my))};
}

bool is_feasible(const Capacity& pi, const ProductSpace& sp, const Capacity& mu,
                 const Capacity& nu, double tol) {
  require_factors(sp, mu, nu);
  if (!(pi.ground() == sp.cells()))
    throw std::invalid_argument("is_feasible: coupling does not live on the cell ground");

  if (sp.size() <= kDenseLimit) {
    const Capacity table = pi.densified();
    const auto& v = table.dense_values();
    if (std::fabs(v[0]) > tol) return false;
    for (std::size_t s = 0; s < v.size(); ++s)
      for (std::size_t b = 0; b < sp.size(); ++b) {
        if (s >> b & 1) continue;
        if (v[s | (std::size_t{1} << b)] < v[s] - tol) return false;
      }
  } else {
    if (sp.p() > kDenseLimit || sp.q() > kDenseLimit)
      throw std::invalid_argument("is_feasible: product too large to check");
    if (std::fabs(pi(SubsetMask(sp.size()))) > tol) return false;
  }

  for (std::size_t a = 0; a < (std::size_t{1} << sp.p()); ++a) {
    const SubsetMask am(sp.p(), a);
    if (std::fabs(pi(sp.row_cylinder(am)) - mu(am)) > tol) return false;
  }
  for (std::size_t b = 0; b < (std::size_t{1} << sp.q()); ++b) {
    const SubsetMask bm(sp.q(), b);
    if (std::fabs(pi(sp.col_cylinder(bm)) - nu(bm)) > tol) return false;
  }
  return true;
}

Capacity envelope_outer(const ProductSpace& sp, const Capacity& mu, const Capacity& nu,
                        RectangleFamily family, double tol) {
  require_factors(sp, mu, nu);
  require_normalized_pair(mu, nu, tol);
  if (family == RectangleFamily::marginal_rectangles) return upper_coupling(sp, mu, nu, tol);
  // Covering rectangles of N shrink to (exists-projection) x (exists-projection).
  return Capacity::rule_backed(sp.cells(), [sp, mu, nu](const SubsetMask& n) {
    if (n.none()) return 0.0;
    return mu(project_exists(sp, n, Axis::x)) * nu(project_exists(sp, n, Axis::y));
  });
}

Capacity envelope_inner(const ProductSpace& sp, const Capacity& mu, const Capacity& nu,
                        RectangleFamily family, double tol) {
  require_factors(sp, mu, nu);
  require_normalized_pair(mu, nu, tol);
  if (family == RectangleFamily::marginal_rectangles) return lower_coupling(sp, mu, nu, tol);
  return Capacity::rule_backed(sp.cells(), [sp, mu, nu](const SubsetMask& n) {
    if (n.none()) return 0.0;
    // Largest rectangle value inside N: enumerate subsets A of the shorter
    // existential projection; the best partner is the intersection of the
    // slices of A's members.
    const SubsetMask nx = project_exists(sp, n, Axis::x);
    const SubsetMask ny = project_exists(sp, n, Axis::y);
    const bool by_rows = nx.count() <= ny.count();
    const std::vector<std::size_t> side = (by_rows ? nx : ny).members();
    if (side.size() > 20)
      throw std::invalid_argument("envelope_inner: projection too large to enumerate");
    const std::size_t other_n = by_rows ? sp.q() : sp.p();
    // Slice masks of the enumerated side.
    std::vector<SubsetMask> slices;
    slices.reserve(side.size());
    for (std::size_t s : side) {
      SubsetMask sl(other_n);
      for (std::size_t t = 0; t < other_n; ++t)
        if (n.test(by_rows ? sp.cell(s, t) : sp.cell(t, s))) sl.set(t);
      slices.push_back(std::move(sl));
    }
    const Capacity& near = by_rows ? mu : nu;
    const Capacity& far = by_rows ? nu : mu;
    const std::size_t near_n = by_rows ? sp.p() : sp.q();
    double best = 0.0;
    for (std::size_t pick = 1; pick < (std::size_t{1} << side.size()); ++pick) {
      SubsetMask a(near_n);
      SubsetMask b = SubsetMask::full(other_n);
      for (std::size_t i = 0; i < side.size(); ++i)
        if (pick >> i & 1) {
          a.set(side[i]);
          b = b & slices[i];
        }
      if (b.none()) continue;
      best = std::max(best, near(a) * far(b));
    }
    return best;
  });
}

Capacity product_mobius_unchecked(const ProductSpace& sp, const Capacity& mu,
                                  const Capacity& nu) {
  require_factors(sp, mu, nu);
  if (sp.size() > 20)
    throw std::invalid_argument("product_mobius: p*q <= 20 required");
  const MobiusVector ma = mobius(mu);
  const MobiusVector mb = mobius(nu);
  const std::size_t p = sp.p(), q = sp.q();
  std::vector<double> m(std::size_t{1} << sp.size(), 0.0);
  for (std::size_t a = 1; a < ma.values.size(); ++a) {
    if (ma.values[a] == 0.0) continue;
    // Cell mask of the rectangle a x b, built by spreading b over a's rows.
    for (std::size_t b = 1; b < mb.values.size(); ++b) {
      if (mb.values[b] == 0.0) continue;
      std::size_t rect = 0;
      for (std::size_t i = 0; i < p; ++i)
        if (a >> i & 1) rect |= b << (i * q);
      m[rect] += ma.values[a] * mb.values[b];
    }
  }
  zeta_subsets(m, static_cast<int>(sp.size()));
  return Capacity::dense_unchecked(sp.cells(), std::move(m));
}

Capacity product_mobius(const ProductSpace& sp, const Capacity& mu, const Capacity& nu,
                        double tol) {
  for (const Capacity* c : {&mu, &nu}) {
    const MobiusVector m = mobius(*c);
    for (double v : m.values)
      if (v < -tol)
        throw std::domain_error(
            "product_mobius: factors must be totally monotone (negative Moebius mass)");
  }
  const Capacity c = product_mobius_unchecked(sp, mu, nu);
  // Totally monotone factors yield a totally monotone product; revalidate.
  return Capacity::dense(sp.cells(), c.dense_values(), tol);
}

Capacity product_possibility(const ProductSpace& sp, const Capacity& mu, const Capacity& nu,
                             double tol) {
  require_factors(sp, mu, nu);
  auto degrees_of = [tol](const Capacity& c) {
    if (c.form() == CapacityForm::possibility) return c.point_data();
    if (c.is_dense()) {
      std::vector<double> d(c.n());
      for (std::size_t i = 0; i < c.n(); ++i) d[i] = c.at_bits(std::uint64_t{1} << i);
      const auto& v = c.dense_values();
      for (std::size_t s = 0; s < v.size(); ++s) {
        double mx = 0.0;
        for (std::size_t i = 0; i < c.n(); ++i)
          if (s >> i & 1) mx = std::max(mx, d[i]);
        if (std::fabs(v[s] - mx) > tol)
          throw std::domain_error("product_possibility: factor is not a possibility measure");
      }
      return d;
    }
    throw std::domain_error("product_possibility: unsupported factor form");
  };
  const std::vector<double> dx = degrees_of(mu);
  const std::vector<double> dy = degrees_of(nu);
  std::vector<double> cells(sp.size());
  for (std::size_t i = 0; i < sp.p(); ++i)
    for (std::size_t j = 0; j < sp.q(); ++j) cells[sp.cell(i, j)] = dx[i] * dy[j];
  return make_possibility(sp.cells(), std::move(cells), tol);
}

CouplingBounds choquet_bounds(const LossMatrix& f, const Capacity& mu, const Capacity& nu,
                              bool with_trace, double tol) {
  const ProductSpace& sp = f.space();
  require_factors(sp, mu, nu);
  require_normalized_pair(mu, nu, tol);

  std::vector<double> levels = f.values();
  std::sort(levels.begin(), levels.end(), std::greater<>());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  const std::vector<double> rmin = f.row_min(), rmax = f.row_max();
  const std::vector<double> cmin = f.col_min(), cmax = f.col_max();

  // Level sets of the four slice statistics grow as the threshold drops;
  // walk each in its own descending order and extend a running mask.
  struct Sweep {
    const std::vector<double>* v;
    std::vector<std::size_t> order;
    std::size_t pos = 0;
    SubsetMask mask;
    explicit Sweep(const std::vector<double>& vals) : v(&vals), mask(vals.size()) {
      order.resize(vals.size());
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(),
                [&](std::size_t a, std::size_t b) { return vals[a] > vals[b]; });
    }
    const SubsetMask& at_least(double t) {
      while (pos < order.size() && (*v)[order[pos]] >= t) mask.set(order[pos++]);
      return mask;
    }
  };
  Sweep lo_x(rmin), lo_y(cmin), up_x(rmax), up_y(cmax);

  CouplingBounds out;
  if (with_trace) out.trace.reserve(levels.size());
  for (std::size_t k = 0; k < levels.size(); ++k) {
    const double t = levels[k];
    LevelTrace row;
    row.t = t;
    row.lower_mu = mu(lo_x.at_least(t));
    row.lower_nu = nu(lo_y.at_least(t));
    row.lower = std::max(row.lower_mu, row.lower_nu);
    row.upper_mu = mu(up_x.at_least(t));
    row.upper_nu = nu(up_y.at_least(t));
    row.upper = std::min(row.upper_mu, row.upper_nu);
    const double width = (k + 1 < levels.size()) ? t - levels[k + 1] : t;
    out.lower += width * row.lower;
    out.upper += width * row.upper;
    if (with_trace) out.trace.push_back(row);
  }
  return out;
}

}  // namespace capot
