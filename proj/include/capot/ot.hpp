#pragma once

// Classical optimal transport between additive marginals on a product grid,
// solved by a dense transportation simplex over the p x q cells, and the
// worst-case expected shortfall of a loss over all additive couplings.

#include <vector>

#include "capot/lp.hpp"
#include "capot/product.hpp"

namespace capot {

// Optimal coupling of the weight vectors u (on X) and v (on Y) for the given
// cost, minimized or maximized. The solution stores the coupling row-major in
// x; row_duals holds the p row potentials followed by the q column
// potentials, scaled so that sum u*y_rows + sum v*y_cols equals the
// objective. Requires nonnegative weights with equal totals (1e-10).
LPSolution ot_classic(const LossMatrix& cost, const std::vector<double>& u,
                      const std::vector<double>& v, Sense sense);

// Worst-case expected shortfall at level alpha in (0, 1) over all couplings:
// the minimum over thresholds t of  t + (worst expected excess above t) /
// (1 - alpha). The distinct loss values are scanned first (convexity-based
// shrinking search with a guard window when there are many), but the exact
// minimizer generally sits between two of them, where the worst coupling
// switches; the two intervals around the best scanned value are therefore
// finished off exactly by supporting-line intersection.
double mes(const LossMatrix& loss, const std::vector<double>& u,
           const std::vector<double>& v, double alpha);

}  // namespace capot
