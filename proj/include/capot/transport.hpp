#pragma once

// Coupling capacities on a product space with prescribed marginal capacities,
// the extremal (lower/upper) couplings, envelope constructions over rectangle
// families, special product constructions, and the sharp Choquet-integral
// bounds computed by a level-set sweep (never by enumerating product subsets).

#include <utility>

#include "capot/capacity.hpp"
#include "capot/product.hpp"

namespace capot {

// Smallest coupling: N -> max(mu(universal X-projection), nu(universal
// Y-projection)). Lazy rule on the cell ground set, tagged with its factors.
// Marginals must be normalized capacities on the factor ground sets.
Capacity lower_coupling(const ProductSpace& sp, const Capacity& mu, const Capacity& nu,
                        double tol = kDefaultTol);

// Largest coupling: N -> min over existential projections.
Capacity upper_coupling(const ProductSpace& sp, const Capacity& mu, const Capacity& nu,
                        double tol = kDefaultTol);

// Marginal capacities of a coupling, tabulated densely (p, q <= kDenseLimit).
std::pair<Capacity, Capacity> marginals_of(const Capacity& pi, const ProductSpace& sp);

// True iff pi is a capacity on the cells whose rectangle marginals equal mu
// and nu. With p*q <= kDenseLimit the capacity axioms are checked
// exhaustively; beyond that only the marginal rectangles are verified.
bool is_feasible(const Capacity& pi, const ProductSpace& sp, const Capacity& mu,
                 const Capacity& nu, double tol = kDefaultTol);

// Rectangle families for the envelope constructions: every product rectangle
// A x B carrying mu(A) * nu(B), or only the marginal cylinders A x Y / X x B.
enum class RectangleFamily { all_rectangles, marginal_rectangles };

// Outer envelope: infimum of family values over covering family sets.
Capacity envelope_outer(const ProductSpace& sp, const Capacity& mu, const Capacity& nu,
                        RectangleFamily family, double tol = kDefaultTol);

// Inner envelope: supremum over contained family sets. For all_rectangles the
// evaluation enumerates subsets of the shorter projection (<= 2^20 states).
Capacity envelope_inner(const ProductSpace& sp, const Capacity& mu, const Capacity& nu,
                        RectangleFamily family, double tol = kDefaultTol);

// Product through Moebius coefficients: m(A x B) = m_mu(A) * m_nu(B), other
// coefficients zero. Requires totally monotone factors (p*q <= 20); for other
// factors the construction can break monotonicity, so it is rejected here and
// available unchecked below for inspection.
Capacity product_mobius(const ProductSpace& sp, const Capacity& mu, const Capacity& nu,
                        double tol = kDefaultTol);
Capacity product_mobius_unchecked(const ProductSpace& sp, const Capacity& mu,
                                  const Capacity& nu);

// Product of possibility measures: degree(x, y) = deg_mu(x) * deg_nu(y).
Capacity product_possibility(const ProductSpace& sp, const Capacity& mu,
                             const Capacity& nu, double tol = kDefaultTol);

// Sharp bounds on the Choquet integral of f over all couplings of (mu, nu).
// One row per distinct value of f recording both marginal terms and the
// chosen value for each bound.
struct LevelTrace {
  double t;
  double lower_mu, lower_nu, lower;
  double upper_mu, upper_nu, upper;
};

struct CouplingBounds {
  double lower = 0.0, upper = 0.0;
  std::vector<LevelTrace> trace;
};

// Level-set sweep over the distinct values of f: the lower bound integrates
// max(mu{row-min >= t}, nu{col-min >= t}), the upper bound integrates
// min(mu{row-max >= t}, nu{col-max >= t}). O(V * (p + q)) capacity work.
CouplingBounds choquet_bounds(const LossMatrix& f, const Capacity& mu, const Capacity& nu,
                              bool with_trace = true, double tol = kDefaultTol);

}  // namespace capot
