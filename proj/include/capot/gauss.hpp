#pragma once

// Normal-distribution numerics and Gaussian-copula discretization of
// bivariate discrete marginals: univariate cdf/quantile, bivariate cdf,
// binomial pmf, rectangle-probability grids, and the comonotone coupling.

#include <cstddef>
#include <vector>

namespace capot {

double norm_cdf(double x);

// Inverse of norm_cdf on (0, 1): high-accuracy rational approximation
// polished by Halley steps, |norm_cdf(norm_quantile(p)) - p| < 1e-12.
// Throws std::domain_error outside the open interval.
double norm_quantile(double p);

// Standard bivariate normal P(V1 <= a, V2 <= b) with correlation rho, by
// the single-integral angle reduction (Gauss-Legendre rules keyed to |rho|,
// separate large-|rho| branch). Exact product / min / shifted-max formulas
// at rho = 0, 1, -1. Throws std::invalid_argument when |rho| > 1.
double bvn_cdf(double a, double b, double rho);

// Exact binomial mass through log-gamma; p in [0, 1], k <= n.
double binomial_pmf(unsigned n, double p, unsigned k);

// Joint law of two discrete variables coupled by a Gaussian copula. Cells
// are rectangle probabilities of the quantile-transformed breakpoints.
struct CopulaGrid {
  std::vector<double> cdf1, cdf2;  // marginal cdf breakpoints, ending at 1
  double rho = 0.0;
  std::vector<double> pmf;  // row-major, cdf1 cells x cdf2 cells
  // |total mass - 1| before any renormalization; the table is rescaled only
  // when this exceeds 1e-9.
  double mass_drift = 0.0;

  std::size_t rows() const { return cdf1.size(); }
  std::size_t cols() const { return cdf2.size(); }
  double at(std::size_t i, std::size_t j) const { return pmf[i * cols() + j]; }
};

// Breakpoints must be positive, nondecreasing and end at 1 (ties yield
// zero-mass cells); entries below -1e-12 mean the quadrature failed and
// raise std::runtime_error, smaller negatives are clamped to zero.
CopulaGrid copula_discretize(const std::vector<double>& cdf1, const std::vector<double>& cdf2,
                             double rho);

// Comonotone coupling of two discrete laws: cell mass is the overlap of the
// cdf intervals (the rho -> 1 limit of the copula grid).
std::vector<double> comonotone_coupling(const std::vector<double>& cdf1,
                                        const std::vector<double>& cdf2);

}  // namespace capot
