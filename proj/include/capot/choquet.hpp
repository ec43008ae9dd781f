#pragma once

// Choquet integration of point functions against normalized capacities, in
// two independent routes (layer-cake sweep and Moebius aggregation), plus the
// linear coefficients of the integral in the capacity, comonotonicity, and
// exact expected shortfall for discrete laws.

#include "capot/capacity.hpp"
#include "capot/ground.hpp"

namespace capot {

// Layer-cake evaluation: sweeps the distinct values of f from the top and
// accumulates level-set capacities. Handles signed f; requires gamma
// normalized (the signed layer-cake form is translation-consistent only
// then). Works for any capacity form, including lazy rules.
double choquet_layercake(const GroundFunction& f, const Capacity& gamma,
                         double tol = kDefaultTol);

// Coefficients K with  integral(f, gamma) = sum_B K[B] * gamma(B)  for every
// normalized capacity gamma; K is the superset Moebius transform of the
// subset-minimum table of f. n <= 20.
struct IntegralCoefficients {
  GroundSet ground;
  std::vector<double> values;  // indexed by subset bits
};
IntegralCoefficients integral_coefficients(const GroundFunction& f);

// Moebius-route evaluation: sum_A m[A] * min_{i in A} f_i. Dense-capable
// capacities only. Agrees with the layer-cake route to ~1e-10.
double choquet_mobius(const GroundFunction& f, const Capacity& gamma,
                      double tol = kDefaultTol);

// No strictly opposite value pair: (f_i - f_j)(g_i - g_j) >= 0 for all i, j.
bool is_comonotone(const GroundFunction& f, const GroundFunction& g);

// Exact expected shortfall of a discrete law at level alpha in [0, 1):
// mean of the upper (1 - alpha) tail, splitting an atom if needed.
double expected_shortfall(const std::vector<double>& values,
                          const std::vector<double>& weights, double alpha);
double expected_shortfall(const GroundFunction& f, const Capacity& p, double alpha,
                          double tol = kDefaultTol);

// Tail distortion x -> min(x / (1 - alpha), 1); expected shortfall is the
// Choquet integral against the correspondingly distorted law.
double g_alpha(double x, double alpha);
Capacity es_distortion(const Capacity& p, double alpha, double tol = kDefaultTol);

// Point weights of an additive normalized law (additive form, or a dense
// table verified additive). Shared precondition helper.
std::vector<double> extract_additive_weights(const Capacity& p, double tol = kDefaultTol);

}  // namespace capot
