#include "capot/gauss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace capot {
namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Gauss-Legendre half-rules (positive abscissae) for the angle integral;
// rule size keyed to |rho| so the integrand's curvature stays resolved.
constexpr double kW6[3] = {0.1713244923791705, 0.3607615730481384, 0.4679139345726904};
constexpr double kX6[3] = {0.9324695142031522, 0.6612093864662647, 0.2386191860831970};
constexpr double kW12[6] = {0.04717533638651177, 0.1069393259953183, 0.1600783285433464,
                            0.2031674267230659, 0.2334925365383547, 0.2491470458134029};
constexpr double kX12[6] = {0.9815606342467191, 0.9041172563704750, 0.7699026741943050,
                            0.5873179542866171, 0.3678314989981802, 0.1252334085114692};
constexpr double kW20[10] = {0.01761400713915212, 0.04060142980038694, 0.06267204833410906,
                             0.08327674157670475, 0.1019301198172404,  0.1181945319615184,
                             0.1316886384491766,  0.1420961093183821,  0.1491729864726037,
                             0.1527533871307259};
constexpr double kX20[10] = {0.9931285991850949, 0.9639719272779138, 0.9122344282513259,
                             0.8391169718222188, 0.7463319064601508, 0.6360536807265150,
                             0.5108670019508271, 0.3737060887154196, 0.2277858511416451,
                             0.07652652113349733};

// Upper-tail probability P(V1 > h, V2 > k) for |r| < 1, r != 0.
double bvn_upper(double h, double k, double r) {
  const double* w;
  const double* x;
  int lg;
  const double ar = std::abs(r);
  if (ar < 0.3) {
    w = kW6, x = kX6, lg = 3;
  } else if (ar < 0.75) {
    w = kW12, x = kX12, lg = 6;
  } else {
    w = kW20, x = kX20, lg = 10;
  }

  double hk = h * k;
  double bvn = 0.0;
  if (ar < 0.925) {
    const double hs = (h * h + k * k) / 2;
    const double asr = std::asin(r);
    for (int i = 0; i < lg; ++i)
      for (int is = -1; is <= 1; is += 2) {
        const double sn = std::sin(asr * (is * x[i] + 1) / 2);
        bvn += w[i] * std::exp((sn * hk - hs) / (1 - sn * sn));
      }
    return bvn * asr / (2 * kTwoPi) + norm_cdf(-h) * norm_cdf(-k);
  }

  // large |r|: expand about the singular ray, then integrate the remainder
  if (r < 0) {
    k = -k;
    hk = -hk;
  }
  const double as = (1 - r) * (1 + r);
  double a = std::sqrt(as);
  const double bs = (h - k) * (h - k);
  const double c = (4 - hk) / 8;
  const double d = (12 - hk) / 16;
  double asr = -(bs / as + hk) / 2;
  if (asr > -100)
    bvn = a * std::exp(asr) * (1 - c * (bs - as) * (1 - d * bs / 5) / 3 + c * d * as * as / 5);
  if (-hk < 100) {
    const double b = std::sqrt(bs);
    const double sp = std::sqrt(kTwoPi) * norm_cdf(-b / a);
    bvn -= std::exp(-hk / 2) * sp * b * (1 - c * bs * (1 - d * bs / 5) / 3);
  }
  a /= 2;
  for (int i = 0; i < lg; ++i)
    for (int is = -1; is <= 1; is += 2) {
      const double xs = a * (is * x[i] + 1) * a * (is * x[i] + 1);
      const double rs = std::sqrt(1 - xs);
      asr = -(bs / xs + hk) / 2;
      if (asr > -100) {
        const double sp = 1 + c * xs * (1 + d * xs);
        const double ep = std::exp(-hk * (1 - rs) / (2 * (1 + rs))) / rs;
        bvn += a * w[i] * std::exp(asr) * (ep - sp);
      }
    }
  bvn = -bvn / kTwoPi;
  if (r > 0) return bvn + norm_cdf(-std::max(h, k));
  bvn = -bvn;
  if (k > h) bvn += norm_cdf(k) - norm_cdf(h);
  return bvn;
}

// Like bvn_cdf but tolerating +infinity arguments (terminal breakpoints).
double bvn_ext(double a, double b, double rho) {
  const bool ia = std::isinf(a) && a > 0, ib = std::isinf(b) && b > 0;
  if (ia && ib) return 1.0;
  if (ia) return norm_cdf(b);
  if (ib) return norm_cdf(a);
  return bvn_cdf(a, b, rho);
}

void check_breakpoints(const std::vector<double>& cdf, const char* which) {
  if (cdf.empty()) throw std::invalid_argument(std::string("copula: empty breakpoints for ") + which);
  // accumulated cdfs can overshoot 1 by a few ulps and then step back to an
  // exact 1, so ordering is enforced only beyond rounding noise
  double prev = 0.0;
  for (double c : cdf) {
    if (!(c > 0.0) || c > 1.0 + 1e-9 || c < prev - 1e-12)
      throw std::invalid_argument(
          std::string("copula: breakpoints must be positive, nondecreasing and end at one (") +
          which + ")");
    prev = std::max(prev, c);
  }
  if (std::abs(cdf.back() - 1.0) > 1e-12)
    throw std::invalid_argument(std::string("copula: breakpoints must end at one (") + which + ")");
}

}  // namespace

double norm_cdf(double x) { return 0.5 * std::erfc(-x * 0.70710678118654752440084436210485); }

double norm_quantile(double p) {
  if (!(p > 0.0) || !(p < 1.0)) throw std::domain_error("norm_quantile: p must lie in (0, 1)");

  // rational approximation in three regions, |error| < 1.2e-9
  static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                  -2.759285104469687e+02, 1.383577518672690e+02,
                                  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                  -1.556989798598866e+02, 6.680131188771972e+01,
                                  -1.328068155288572e+01};
  static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                  -2.400758277161838e+00, -2.549732539343734e+00,
                                  4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                  2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else if (p <= 1 - p_low) {
    const double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  } else {
    const double q = std::sqrt(-2 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }

  // Halley polish; skipped in the far tail where exp(x^2/2) would overflow
  // and the rational form is already past double round-trip accuracy.
  for (int pass = 0; pass < 2 && std::abs(x) < 37; ++pass) {
    const double e = norm_cdf(x) - p;
    const double u = e * std::sqrt(kTwoPi) * std::exp(x * x / 2);
    x -= u / (1 + x * u / 2);
  }
  return x;
}

double bvn_cdf(double a, double b, double rho) {
  if (std::isnan(rho) || std::abs(rho) > 1)
    throw std::invalid_argument("bvn_cdf: correlation must lie in [-1, 1]");
  if (rho == 0.0) return norm_cdf(a) * norm_cdf(b);
  if (rho == 1.0) return std::min(norm_cdf(a), norm_cdf(b));
  if (rho == -1.0) return std::max(0.0, norm_cdf(a) + norm_cdf(b) - 1.0);
  // P(V1 <= a, V2 <= b) = P(-V1 > -a, -V2 > -b), same correlation. The
  // quadrature can undershoot zero by ~1e-20 deep in a tail; clamp to keep
  // the result a probability.
  return std::min(1.0, std::max(0.0, bvn_upper(-a, -b, rho)));
}

double binomial_pmf(unsigned n, double p, unsigned k) {
  if (k > n) throw std::invalid_argument("binomial_pmf: k out of range");
  if (!(p >= 0.0) || p > 1.0) throw std::invalid_argument("binomial_pmf: p outside [0, 1]");
  if (p == 0.0) return k == 0 ? 1.0 : 0.0;
  if (p == 1.0) return k == n ? 1.0 : 0.0;
  const double lg = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
  return std::exp(lg + k * std::log(p) + (n - k) * std::log1p(-p));
}

CopulaGrid copula_discretize(const std::vector<double>& cdf1, const std::vector<double>& cdf2,
                             double rho) {
  check_breakpoints(cdf1, "factor 1");
  check_breakpoints(cdf2, "factor 2");
  if (std::isnan(rho) || std::abs(rho) > 1)
    throw std::invalid_argument("copula: correlation must lie in [-1, 1]");

  const auto thresholds = [](const std::vector<double>& cdf) {
    std::vector<double> t(cdf.size());
    for (std::size_t i = 0; i < cdf.size(); ++i)
      t[i] = cdf[i] >= 1.0 ? std::numeric_limits<double>::infinity() : norm_quantile(cdf[i]);
    return t;
  };
  const std::vector<double> t1 = thresholds(cdf1);
  const std::vector<double> t2 = thresholds(cdf2);

  CopulaGrid grid;
  grid.cdf1 = cdf1;
  grid.cdf2 = cdf2;
  grid.rho = rho;
  const std::size_t m = cdf1.size(), k = cdf2.size();

  // joint cdf at every breakpoint pair, then rectangle inclusion-exclusion
  std::vector<double> joint(m * k);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < k; ++j) joint[i * k + j] = bvn_ext(t1[i], t2[j], rho);

  grid.pmf.resize(m * k);
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      double mass = joint[i * k + j];
      if (i > 0) mass -= joint[(i - 1) * k + j];
      if (j > 0) mass -= joint[i * k + j - 1];
      if (i > 0 && j > 0) mass += joint[(i - 1) * k + (j - 1)];
      if (mass < -1e-12) throw std::runtime_error("copula: negative cell mass");
      if (mass < 0) mass = 0;
      grid.pmf[i * k + j] = mass;
      total += mass;
    }
  grid.mass_drift = std::abs(total - 1.0);
  if (grid.mass_drift > 1e-9)
    for (double& v : grid.pmf) v /= total;
  return grid;
}

std::vector<double> comonotone_coupling(const std::vector<double>& cdf1,
                                        const std::vector<double>& cdf2) {
  check_breakpoints(cdf1, "factor 1");
  check_breakpoints(cdf2, "factor 2");
  const std::size_t m = cdf1.size(), k = cdf2.size();
  std::vector<double> out(m * k, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const double lo1 = i == 0 ? 0.0 : cdf1[i - 1];
    for (std::size_t j = 0; j < k; ++j) {
      const double lo2 = j == 0 ? 0.0 : cdf2[j - 1];
      const double overlap = std::min(cdf1[i], cdf2[j]) - std::max(lo1, lo2);
      if (overlap > 0) out[i * k + j] = overlap;
    }
  }
  return out;
}

}  // namespace capot
