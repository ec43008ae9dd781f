#include "capot/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "capot/lattice.hpp"

namespace capot {

namespace {

void require_table_size(const GroundSet& g, const std::vector<double>& values) {
  if (g.size() > kDenseLimit)
    throw std::invalid_argument("capacity: dense tables are capped at 2^" +
                                std::to_string(kDenseLimit) + " entries (n = " +
                                std::to_string(g.size()) + ")");
  if (values.size() != (std::size_t{1} << g.size()))
    throw std::invalid_argument("capacity: table needs 2^n values, got " +
                                std::to_string(values.size()));
  for (double v : values)
    if (!std::isfinite(v)) throw std::invalid_argument("capacity: non-finite table entry");
}

double sum_over(const std::vector<double>& w, const SubsetMask& a) {
  double s = 0.0;
  a.for_each([&](std::size_t i) { s += w[i]; });
  return s;
}

double max_over(const std::vector<double>& w, const SubsetMask& a) {
  double s = 0.0;  // empty set evaluates to 0
  a.for_each([&](std::size_t i) { s = std::max(s, w[i]); });
  return s;
}

}  // namespace

Capacity Capacity::make(Impl&& i) { return Capacity(std::make_shared<const Impl>(std::move(i))); }

Capacity Capacity::dense(GroundSet g, std::vector<double> values, double tol) {
  require_table_size(g, values);
  if (std::fabs(values[0]) > tol)
    throw std::invalid_argument("capacity: table must vanish on the empty set, got " +
                                std::to_string(values[0]));
  const std::size_t n = g.size();
  for (std::size_t s = 0; s < values.size(); ++s) {
    if (values[s] < -tol)
      throw std::invalid_argument("capacity: negative value at subset " + std::to_string(s));
    for (std::size_t d = 0; d < n; ++d) {
      if (s >> d & 1) continue;
      const std::size_t t = s | (std::size_t{1} << d);
      if (values[t] < values[s] - tol)
        throw std::invalid_argument("capacity: monotonicity violated between subset " +
                                    std::to_string(s) + " and subset " + std::to_string(t) +
                                    " (adding point '" + g.label(d) + "')");
    }
  }
  values[0] = 0.0;
  return dense_unchecked(std::move(g), std::move(values));
}

Capacity Capacity::dense_unchecked(GroundSet g, std::vector<double> values) {
  require_table_size(g, values);
  Impl i;
  i.ground = std::move(g);
  i.form = CapacityForm::dense;
  i.full_value = values.back();
  i.data = std::move(values);
  return make(std::move(i));
}

Capacity Capacity::additive(GroundSet g, std::vector<double> weights) {
  if (weights.size() != g.size())
    throw std::invalid_argument("additive capacity: one weight per point required");
  double total = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0)
      throw std::invalid_argument("additive capacity: weights must be finite and nonnegative");
    total += w;
  }
  Impl i;
  i.ground = std::move(g);
  i.form = CapacityForm::additive;
  i.data = std::move(weights);
  i.full_value = total;
  return make(std::move(i));
}

Capacity Capacity::rule_backed(GroundSet g, Rule r) {
  if (!r) throw std::invalid_argument("rule capacity: empty rule");
  Impl i;
  i.full_value = r(SubsetMask::full(g.size()));
  i.ground = std::move(g);
  i.form = CapacityForm::rule;
  i.rule = std::move(r);
  return make(std::move(i));
}

double Capacity::operator()(const SubsetMask& a) const {
  const Impl& im = impl();
  if (a.universe() != im.ground.size())
    throw std::invalid_argument("capacity: mask universe does not match ground set");
  switch (im.form) {
    case CapacityForm::dense:
      return im.data[a.low_bits()];
    case CapacityForm::additive:
      return sum_over(im.data, a);
    case CapacityForm::distorted:
      return im.distortion(sum_over(im.data, a));
    case CapacityForm::possibility:
      return max_over(im.data, a);
    case CapacityForm::rule:
      return im.rule(a);
  }
  throw std::logic_error("capacity: unknown form");
}

const std::vector<double>& Capacity::dense_values() const {
  if (!is_dense()) throw std::logic_error("capacity: not in dense form");
  return impl().data;
}

bool Capacity::has_point_data() const {
  const auto f = impl().form;
  return f == CapacityForm::additive || f == CapacityForm::distorted ||
         f == CapacityForm::possibility;
}

const std::vector<double>& Capacity::point_data() const {
  if (!has_point_data()) throw std::logic_error("capacity: no point-level data in this form");
  return impl().data;
}

Capacity Capacity::densified() const {
  const Impl& im = impl();
  const std::size_t n = im.ground.size();
  if (n > kDenseLimit)
    throw std::invalid_argument("capacity: ground set too large to tabulate (n = " +
                                std::to_string(n) + ")");
  if (im.form == CapacityForm::dense) return *this;
  const std::size_t size = std::size_t{1} << n;
  std::vector<double> table(size, 0.0);
  switch (im.form) {
    case CapacityForm::additive:
    case CapacityForm::distorted:
      for (std::size_t s = 1; s < size; ++s)
        table[s] = table[s & (s - 1)] + im.data[std::countr_zero(s)];
      if (im.form == CapacityForm::distorted)
        for (std::size_t s = 0; s < size; ++s) table[s] = im.distortion(table[s]);
      break;
    case CapacityForm::possibility:
      for (std::size_t s = 1; s < size; ++s)
        table[s] = std::max(table[s & (s - 1)], im.data[std::countr_zero(s)]);
      break;
    default:
      for (std::size_t s = 0; s < size; ++s) table[s] = im.rule(SubsetMask(n, s));
      break;
  }
  // Deliberately untagged: a tabulated copy is a plain set function again.
  return dense_unchecked(im.ground, std::move(table));
}

Capacity Capacity::with_product_tag(std::shared_ptr<const ProductTag> t) const {
  Impl copy = impl();
  copy.tag = std::move(t);
  return make(std::move(copy));
}

Capacity make_additive(GroundSet g, std::vector<double> weights) {
  return Capacity::additive(std::move(g), std::move(weights));
}

Capacity make_unanimity(GroundSet g, const SubsetMask& focal) {
  if (focal.universe() != g.size())
    throw std::invalid_argument("unanimity game: focal mask universe mismatch");
  if (focal.none()) throw std::invalid_argument("unanimity game: focal set must be nonempty");
  if (g.size() <= kDenseLimit) {
    std::vector<double> table(std::size_t{1} << g.size(), 0.0);
    const std::uint64_t f = focal.low_bits();
    for (std::size_t s = 0; s < table.size(); ++s)
      if ((s & f) == f) table[s] = 1.0;
    return Capacity::dense_unchecked(std::move(g), std::move(table));
  }
  return Capacity::rule_backed(std::move(g), [focal](const SubsetMask& a) {
    return focal.subset_of(a) ? 1.0 : 0.0;
  });
}

Capacity make_possibility(GroundSet g, std::vector<double> degrees, double tol) {
  if (degrees.size() != g.size())
    throw std::invalid_argument("possibility measure: one degree per point required");
  double top = 0.0;
  for (double d : degrees) {
    if (!std::isfinite(d) || d < -tol || d > 1.0 + tol)
      throw std::invalid_argument("possibility measure: degrees must lie in [0,1]");
    top = std::max(top, d);
  }
  if (std::fabs(top - 1.0) > tol)
    throw std::invalid_argument("possibility measure: maximal degree must be 1");
  Capacity::Impl i;
  i.ground = std::move(g);
  i.form = CapacityForm::possibility;
  i.data = std::move(degrees);
  i.full_value = top;
  return Capacity::make(std::move(i));
}

Capacity make_necessity(GroundSet g, std::vector<double> degrees, double tol) {
  return conjugate(make_possibility(std::move(g), std::move(degrees), tol));
}

Capacity distort(const Capacity& p, Capacity::Distortion g, double tol) {
  if (!g) throw std::invalid_argument("distort: empty distortion");
  // Accept an additive form directly, or a dense table that is additive.
  std::vector<double> weights;
  if (p.form() == CapacityForm::additive) {
    weights = p.point_data();
  } else if (p.is_dense()) {
    const std::size_t n = p.n();
    weights.resize(n);
    for (std::size_t i = 0; i < n; ++i) weights[i] = p.at_bits(std::uint64_t{1} << i);
    MobiusVector m = mobius(p);
    for (std::size_t s = 1; s < m.values.size(); ++s)
      if ((s & (s - 1)) != 0 && std::fabs(m.values[s]) > tol)
        throw std::domain_error("distort: base measure is not additive");
  } else {
    throw std::domain_error("distort: base measure must be additive");
  }
  double total = 0.0;
  for (double w : weights) total += w;
  if (std::fabs(total - 1.0) > tol)
    throw std::domain_error("distort: base measure must be normalized, mass = " +
                            std::to_string(total));
  if (std::fabs(g(0.0)) > tol || std::fabs(g(1.0) - 1.0) > tol)
    throw std::invalid_argument("distort: distortion must satisfy g(0)=0 and g(1)=1");
  double prev = g(0.0);
  for (int i = 1; i <= 64; ++i) {
    const double cur = g(i / 64.0);
    if (cur < prev - tol) throw std::invalid_argument("distort: distortion must be nondecreasing");
    prev = cur;
  }
  Capacity::Impl i;
  i.ground = p.ground();
  i.form = CapacityForm::distorted;
  i.data = std::move(weights);
  i.distortion = std::move(g);
  i.full_value = i.distortion(total);
  return Capacity::make(std::move(i));
}

Capacity conjugate(const Capacity& gamma) {
  if (gamma.is_dense()) {
    const auto& v = gamma.dense_values();
    const double full = gamma.at_full();
    std::vector<double> out(v.size());
    const std::size_t all = v.size() - 1;
    for (std::size_t s = 0; s < v.size(); ++s) out[s] = full - v[all ^ s];
    return Capacity::dense_unchecked(gamma.ground(), std::move(out));
  }
  const double full = gamma.at_full();
  return Capacity::rule_backed(gamma.ground(), [gamma, full](const SubsetMask& a) {
    return full - gamma(a.complement());
  });
}

MobiusVector mobius(const Capacity& gamma) {
  if (gamma.n() > kDenseLimit)
    throw std::invalid_argument("mobius: representation too large to tabulate");
  const Capacity d = gamma.densified();
  std::vector<double> v = d.dense_values();
  mobius_subsets(v, static_cast<int>(gamma.n()));
  return MobiusVector{gamma.ground(), std::move(v)};
}

Capacity zeta(const MobiusVector& m) {
  std::vector<double> v = m.values;
  zeta_subsets(v, static_cast<int>(m.ground.size()));
  return Capacity::dense_unchecked(m.ground, std::move(v));
}

namespace {

// k-monotonicity by brute force over sorted k-tuples of subsets (the
// defining inequality is symmetric in the tuple).
bool k_monotone_brute(const std::vector<double>& t, std::size_t n, int k, double tol) {
  const std::size_t size = std::size_t{1} << n;
  std::vector<std::size_t> tuple(static_cast<std::size_t>(k));
  bool ok = true;
  auto rec = [&](auto&& self, int depth, std::size_t start) -> void {
    if (!ok) return;
    if (depth == k) {
      std::size_t un = 0;
      for (auto a : tuple) un |= a;
      double rhs = 0.0;
      for (std::size_t j = 1; j < (std::size_t{1} << k); ++j) {
        std::size_t inter = size - 1;
        for (int b = 0; b < k; ++b)
          if (j >> b & 1) inter &= tuple[static_cast<std::size_t>(b)];
        rhs += (std::popcount(j) % 2 == 1 ? 1.0 : -1.0) * t[inter];
      }
      if (t[un] < rhs - tol) ok = false;
      return;
    }
    for (std::size_t a = start; a < size; ++a) {
      tuple[static_cast<std::size_t>(depth)] = a;
      self(self, depth + 1, a);
      if (!ok) return;
    }
  };
  rec(rec, 0, 0);
  return ok;
}

}  // namespace

PropertyReport check_properties(const Capacity& gamma, const PropertyCheckOptions& opts) {
  if (gamma.n() > kDenseLimit)
    throw std::invalid_argument("check_properties: representation too large to tabulate");
  const double tol = opts.tol;
  const Capacity d = gamma.densified();
  const std::vector<double>& v = d.dense_values();
  const std::size_t n = gamma.n();
  const std::size_t size = v.size();

  PropertyReport rep;
  rep.tol = tol;
  rep.grounded = std::fabs(v[0]) <= tol;
  rep.nonnegative = true;
  for (double x : v)
    if (x < -tol) rep.nonnegative = false;

  rep.worst_monotone_gap = 0.0;
  for (std::size_t s = 0; s < size; ++s)
    for (std::size_t b = 0; b < n; ++b) {
      if (s >> b & 1) continue;
      rep.worst_monotone_gap =
          std::min(rep.worst_monotone_gap, v[s | (std::size_t{1} << b)] - v[s]);
    }
  rep.monotone = rep.worst_monotone_gap >= -tol;
  rep.is_capacity = rep.grounded && rep.nonnegative && rep.monotone;
  rep.normalized = std::fabs(d.at_full() - 1.0) <= tol;

  std::vector<double> m = v;
  mobius_subsets(m, static_cast<int>(n));
  rep.additive = rep.grounded;
  for (std::size_t s = 1; s < size && rep.additive; ++s)
    if ((s & (s - 1)) != 0 && std::fabs(m[s]) > tol) rep.additive = false;

  double tot_min = 0.0;
  for (double x : m) tot_min = std::min(tot_min, x);
  rep.totally_monotone =
      (rep.grounded && tot_min >= -tol) ? CheckResult::yes : CheckResult::no;

  if (opts.k_max >= 2) {
    // Local covering characterization of 2-monotonicity, O(n^2 2^n).
    double gap = 0.0;
    for (std::size_t s = 0; s < size; ++s)
      for (std::size_t i = 0; i < n; ++i) {
        if (s >> i & 1) continue;
        for (std::size_t j = i + 1; j < n; ++j) {
          if (s >> j & 1) continue;
          const std::size_t si = s | (std::size_t{1} << i);
          const std::size_t sj = s | (std::size_t{1} << j);
          gap = std::min(gap, v[si | sj] + v[s] - v[si] - v[sj]);
        }
      }
    rep.worst_supermodular_gap = gap;
    rep.supermodular = gap >= -tol ? CheckResult::yes : CheckResult::no;
    double co_gap = 0.0;
    for (std::size_t s = 0; s < size; ++s)
      for (std::size_t i = 0; i < n; ++i) {
        if (s >> i & 1) continue;
        for (std::size_t j = i + 1; j < n; ++j) {
          if (s >> j & 1) continue;
          const std::size_t si = s | (std::size_t{1} << i);
          const std::size_t sj = s | (std::size_t{1} << j);
          co_gap = std::min(co_gap, v[si] + v[sj] - v[si | sj] - v[s]);
        }
      }
    rep.submodular = co_gap >= -tol ? CheckResult::yes : CheckResult::no;
  }

  std::vector<double> conj(size);
  for (std::size_t s = 0; s < size; ++s) conj[s] = d.at_full() - v[(size - 1) ^ s];
  for (int k = 3; k <= opts.k_max; ++k) {
    if (n > opts.brute_force_n_limit || k > opts.brute_force_k_limit) {
      rep.k_monotone[k] = CheckResult::skipped;
      rep.k_alternating[k] = CheckResult::skipped;
      continue;
    }
    rep.k_monotone[k] =
        k_monotone_brute(v, n, k, tol) ? CheckResult::yes : CheckResult::no;
    // k-alternating iff the conjugate is k-monotone.
    rep.k_alternating[k] =
        k_monotone_brute(conj, n, k, tol) ? CheckResult::yes : CheckResult::no;
  }
  return rep;
}

}  // namespace capot
