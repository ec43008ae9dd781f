#include "capot/choquet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "capot/lattice.hpp"

namespace capot {

namespace {

void require_same_ground(const GroundFunction& f, const Capacity& gamma) {
  if (!(f.ground == gamma.ground()))
    throw std::invalid_argument("choquet: function and capacity live on different ground sets");
}

void require_normalized(const Capacity& gamma, double tol) {
  if (std::fabs(gamma.at_full() - 1.0) > tol)
    throw std::domain_error("choquet: capacity must be normalized, full mass = " +
                            std::to_string(gamma.at_full()));
}

}  // namespace

double choquet_layercake(const GroundFunction& f, const Capacity& gamma, double tol) {
  require_same_ground(f, gamma);
  require_normalized(gamma, tol);
  const std::size_t n = f.size();
  if (n == 0) return 0.0;
  for (double v : f.values)
    if (!std::isfinite(v)) throw std::invalid_argument("choquet: non-finite function value");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return f[a] > f[b]; });

  // v_1 > ... > v_m distinct values, S_k = {f >= v_k}:
  //   integral = sum_{k<m} (v_k - v_{k+1}) gamma(S_k) + v_m gamma(full).
  SubsetMask level(n);
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    level.set(order[k]);
    const double v = f[order[k]];
    if (k + 1 == n) {
      total += v * gamma(level);
    } else {
      const double vnext = f[order[k + 1]];
      if (v != vnext) total += (v - vnext) * gamma(level);
    }
  }
  return total;
}

IntegralCoefficients integral_coefficients(const GroundFunction& f) {
  const std::size_t n = f.size();
  if (n > 20) throw std::invalid_argument("integral_coefficients: n <= 20");
  std::vector<double> k = min_over_subset_table(f.values);
  mobius_supersets(k, static_cast<int>(n));
  return IntegralCoefficients{f.ground, std::move(k)};
}

double choquet_mobius(const GroundFunction& f, const Capacity& gamma, double tol) {
  require_same_ground(f, gamma);
  require_normalized(gamma, tol);
  const MobiusVector m = mobius(gamma);
  const std::vector<double> mins = min_over_subset_table(f.values);
  double total = 0.0;
  for (std::size_t s = 1; s < m.values.size(); ++s) total += m.values[s] * mins[s];
  return total;
}

bool is_comonotone(const GroundFunction& f, const GroundFunction& g) {
  if (!(f.ground == g.ground))
    throw std::invalid_argument("is_comonotone: mismatched ground sets");
  for (std::size_t i = 0; i < f.size(); ++i)
    for (std::size_t j = i + 1; j < f.size(); ++j)
      if ((f[i] - f[j]) * (g[i] - g[j]) < 0.0) return false;
  return true;
}

double expected_shortfall(const std::vector<double>& values,
                          const std::vector<double>& weights, double alpha) {
  if (values.size() != weights.size())
    throw std::invalid_argument("expected_shortfall: value/weight size mismatch");
  if (!(alpha >= 0.0 && alpha < 1.0))
    throw std::domain_error("expected_shortfall: alpha must lie in [0, 1)");
  double mass = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw std::invalid_argument("expected_shortfall: negative weight");
    mass += w;
  }
  if (std::fabs(mass - 1.0) > 1e-9)
    throw std::invalid_argument("expected_shortfall: weights must sum to 1");

  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  // Mean of the top (1 - alpha) probability mass, splitting the atom that
  // straddles the boundary.
  double need = 1.0 - alpha;
  double acc = 0.0;
  for (std::size_t idx : order) {
    const double take = std::min(weights[idx], need);
    acc += values[idx] * take;
    need -= take;
    if (need <= 0.0) break;
  }
  return acc / (1.0 - alpha);
}

double expected_shortfall(const GroundFunction& f, const Capacity& p, double alpha,
                          double tol) {
  require_same_ground(f, p);
  return expected_shortfall(f.values, extract_additive_weights(p, tol), alpha);
}

double g_alpha(double x, double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0))
    throw std::domain_error("g_alpha: alpha must lie in [0, 1)");
  return std::min(x / (1.0 - alpha), 1.0);
}

Capacity es_distortion(const Capacity& p, double alpha, double tol) {
  if (!(alpha >= 0.0 && alpha < 1.0))
    throw std::domain_error("es_distortion: alpha must lie in [0, 1)");
  return distort(p, [alpha](double x) { return std::min(x / (1.0 - alpha), 1.0); }, tol);
}

std::vector<double> extract_additive_weights(const Capacity& p, double tol) {
  if (p.form() == CapacityForm::additive) {
    const auto& w = p.point_data();
    double total = 0.0;
    for (double x : w) total += x;
    if (std::fabs(total - 1.0) > tol)
      throw std::domain_error("additive weights: law must be normalized");
    return w;
  }
  if (p.is_dense()) {
    MobiusVector m = mobius(p);
    std::vector<double> w(p.n());
    for (std::size_t s = 1; s < m.values.size(); ++s) {
      if ((s & (s - 1)) == 0) {
        w[std::countr_zero(s)] = m.values[s];
      } else if (std::fabs(m.values[s]) > tol) {
        throw std::domain_error("additive weights: capacity is not additive");
      }
    }
    for (double x : w)
      if (x < -tol) throw std::domain_error("additive weights: negative point mass");
    if (std::fabs(p.at_full() - 1.0) > tol)
      throw std::domain_error("additive weights: law must be normalized");
    return w;
  }
  throw std::domain_error("additive weights: unsupported capacity form");
}

}  // namespace capot
