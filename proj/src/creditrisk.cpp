#include "capot/creditrisk.hpp"

#include <chrono>
#include <cmath>
#include <cstddef>
#include <future>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "capot/choquet.hpp"
#include "capot/gauss.hpp"
#include "capot/ot.hpp"
#include "capot/transport.hpp"

namespace capot {

namespace {

std::vector<double> binomial_breakpoints(unsigned n, double p) {
  std::vector<double> cdf(n + 1);
  double acc = 0.0;
  for (unsigned k = 0; k <= n; ++k) {
    acc += binomial_pmf(n, p, k);
    cdf[k] = acc;
  }
  cdf.back() = 1.0;  // cumulation drift would otherwise leak past one
  return cdf;
}

std::vector<double> transition_breakpoints(const std::array<double, kRatings>& row) {
  std::vector<double> cdf(kRatings);
  double acc = 0.0;
  for (std::size_t k = 0; k < kRatings; ++k) {
    acc += row[k];
    cdf[k] = acc;
  }
  cdf.back() = 1.0;
  return cdf;
}

GroundSet exposure_ground(unsigned n1, unsigned n2) {
  std::vector<std::string> labels;
  labels.reserve(static_cast<std::size_t>(n1 + 1) * (n2 + 1));
  for (unsigned i = 0; i <= n1; ++i)
    for (unsigned j = 0; j <= n2; ++j)
      labels.push_back(std::to_string(i) + "," + std::to_string(j));
  return GroundSet(std::move(labels));
}

GroundSet rating_ground() {
  std::vector<std::string> labels;
  labels.reserve(kRatings * kRatings);
  for (std::size_t r1 = 0; r1 < kRatings; ++r1)
    for (std::size_t r2 = 0; r2 < kRatings; ++r2)
      labels.push_back(std::string(kRatingName[r1]) + kRatingName[r2]);
  return GroundSet(std::move(labels));
}

void validate(const CreditModel& m) {
  if (!(m.p1 > 0.0 && m.p1 < 1.0) || !(m.p2 > 0.0 && m.p2 < 1.0))
    throw std::invalid_argument("credit: exposure success probabilities must lie in (0, 1)");
  if (!(std::fabs(m.rho_x) <= 1.0) || !(std::fabs(m.rho_y) <= 1.0))
    throw std::invalid_argument("credit: copula correlations must lie in [-1, 1]");
  if (!(m.s > 0.0 && m.s <= 1.0))
    throw std::invalid_argument("credit: distortion exponent must lie in (0, 1]");
  if (!(m.alpha > 0.0 && m.alpha < 1.0))
    throw std::invalid_argument("credit: shortfall level must lie in (0, 1)");
  if (m.initial1 >= kRatings || m.initial2 >= kRatings)
    throw std::invalid_argument("credit: initial ratings must index a rating");
  for (std::size_t r = 0; r < kRatings; ++r) {
    double total = 0.0;
    for (double t : m.transition[r]) {
      if (t < -1e-12) throw std::invalid_argument("credit: negative transition probability");
      total += t;
    }
    if (std::fabs(total - 1.0) > 1e-9)
      throw std::invalid_argument("credit: transition rows must sum to one");
  }
  if (std::fabs(m.severity.front() - 1.0) > 1e-12 || std::fabs(m.severity.back()) > 1e-12)
    throw std::invalid_argument("credit: severity must be one at default and zero at the top rating");
  for (std::size_t r = 0; r + 1 < kRatings; ++r)
    if (m.severity[r] < m.severity[r + 1] - 1e-12)
      throw std::invalid_argument("credit: severity must not increase with rating quality");
}

std::vector<double> loss_table(const ProductSpace& sp, unsigned n2,
                               const std::array<double, kRatings>& severity) {
  const std::size_t p = sp.x().size();
  const std::size_t q = sp.y().size();
  std::vector<double> values(p * q);
  for (std::size_t cx = 0; cx < p; ++cx) {
    const auto x1 = static_cast<double>(cx / (n2 + 1));
    const auto x2 = static_cast<double>(cx % (n2 + 1));
    for (std::size_t cy = 0; cy < q; ++cy)
      values[cx * q + cy] = x1 * severity[cy / kRatings] + x2 * severity[cy % kRatings];
  }
  return values;
}

}  // namespace

CreditSpaces build_model(const CreditModel& m) {
  validate(m);
  const CopulaGrid gx = copula_discretize(binomial_breakpoints(m.n1, m.p1),
                                          binomial_breakpoints(m.n2, m.p2), m.rho_x);
  const CopulaGrid gy = copula_discretize(transition_breakpoints(m.transition[m.initial1]),
                                          transition_breakpoints(m.transition[m.initial2]), m.rho_y);

  GroundSet X = exposure_ground(m.n1, m.n2);
  GroundSet Y = rating_ground();
  Capacity mu = make_additive(X, gx.pmf);
  Capacity prob = make_additive(Y, gy.pmf);
  Capacity nu = m.s == 1.0
                    ? prob
                    : distort(prob, [s = m.s](double t) { return std::pow(t, s); });

  ProductSpace space(std::move(X), std::move(Y));
  LossMatrix loss(space, loss_table(space, m.n2, m.severity));
  return CreditSpaces{std::move(space), std::move(mu), std::move(prob), std::move(nu),
                      std::move(loss)};
}

double max_choquet_risk(const CreditSpaces& spaces) {
  return choquet_bounds(spaces.loss, spaces.mu, spaces.nu, false).upper;
}

double max_choquet_risk(const CreditModel& m) { return max_choquet_risk(build_model(m)); }

CreditSpaces build_simplified(double rho_x, double rho_y) {
  // Collapse the rating system to default / survive with the double-B default
  // probability; only the D row and column of the severity matter.
  CreditModel m;
  m.n1 = 2;
  m.p1 = 0.4;
  m.n2 = 2;
  m.p2 = 0.7;
  m.rho_x = rho_x;
  m.rho_y = rho_y;
  m.s = 0.5;
  m.transition = {{
      {1.0, 0.0, 0.0, 0.0},
      {0.005, 0.995, 0.0, 0.0},
      {0.005, 0.995, 0.0, 0.0},
      {0.001, 0.999, 0.0, 0.0},
  }};
  m.initial1 = 2;
  m.initial2 = 1;
  m.severity = {1.0, 0.0, 0.0, 0.0};
  return build_model(m);
}

std::vector<SimplifiedPoint> simplified_closed_form(const std::vector<double>& rho_y_grid,
                                                    double rho_x) {
  const double q = norm_quantile(0.005);
  // Corner mass P(X1 = 2, X2 = 2) of the exposure copula (0.0494 at the
  // reference correlation -0.3). It does not depend on rho_y, so one probe
  // build suffices; the exposure ground is 3 x 3 and the corner is its last
  // point.
  const CreditSpaces probe = build_simplified(rho_x, 0.0);
  const double corner = probe.mu.at_bits(1ULL << (probe.space.x().size() - 1));

  std::vector<SimplifiedPoint> out;
  out.reserve(rho_y_grid.size());
  for (double r : rho_y_grid) {
    SimplifiedPoint pt;
    pt.rho_y = r;
    pt.p_dd = bvn_cdf(q, q, r);
    pt.pipeline = max_choquet_risk(build_simplified(rho_x, r));
    const double sd = std::sqrt(pt.p_dd);
    const double so = std::sqrt(0.01 - pt.p_dd);
    pt.closed_form = 2.0 * so + sd + std::min(corner, sd);
    pt.printed_form = 2.0 * so + sd + corner;
    out.push_back(pt);
  }
  return out;
}

SweepResult sweep(const CreditModel& base, SweepParam parameter, const std::vector<double>& grid) {
  if (grid.empty()) throw std::invalid_argument("sweep: empty grid");
  for (std::size_t i = 0; i + 1 < grid.size(); ++i)
    if (!(grid[i] < grid[i + 1]))
      throw std::invalid_argument("sweep: grid must be strictly increasing");

  SweepResult res;
  res.parameter = parameter;
  res.grid = grid;
  res.risk.assign(grid.size(), 0.0);
  res.seconds.assign(grid.size(), 0.0);

  auto eval = [&](std::size_t i) {
    CreditModel m = base;
    switch (parameter) {
      case SweepParam::distortion: m.s = grid[i]; break;
      case SweepParam::rho_x: m.rho_x = grid[i]; break;
      case SweepParam::rho_y: m.rho_y = grid[i]; break;
    }
    const auto t0 = std::chrono::steady_clock::now();
    res.risk[i] = max_choquet_risk(m);
    res.seconds[i] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>({workers, 8u, static_cast<unsigned>(grid.size())});
  std::vector<std::future<void>> tasks;
  tasks.reserve(workers);
  for (unsigned w = 0; w < workers; ++w)
    tasks.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < grid.size(); i += workers) eval(i);
    }));
  for (auto& t : tasks) t.get();
  return res;
}

MesCmesResult mes_vs_cmes(const CreditModel& m) {
  const CreditSpaces cs = build_model(m);
  const std::vector<double> u = extract_additive_weights(cs.mu);
  const std::vector<double> v = extract_additive_weights(cs.prob);
  MesCmesResult r;
  r.mes = mes(cs.loss, u, v, m.alpha);
  r.cmes = choquet_bounds(cs.loss, es_distortion(cs.mu, m.alpha),
                          es_distortion(cs.prob, m.alpha), false)
               .upper;
  r.ratio = r.cmes / r.mes;
  return r;
}

}  // namespace capot
