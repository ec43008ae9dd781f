#pragma once

// Two-counterparty credit risk application: binomial exposures and rating
// migrations coupled by Gaussian copulas, a distorted rating capacity,
// worst-case Choquet risk of the migration loss, parameter sweeps, the
// two-state simplified model with its closed form, and the comparison of
// maximum expected shortfall against its Choquet relaxation.

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "capot/capacity.hpp"
#include "capot/product.hpp"

namespace capot {

// Ratings are indexed worst to best: D = 0, C = 1, B = 2, A = 3, so that
// cumulative transition probabilities in index order are exactly the
// latent-variable thresholds of the copula construction.
inline constexpr std::size_t kRatings = 4;
inline constexpr const char* kRatingName[kRatings] = {"D", "C", "B", "A"};

struct CreditModel {
  unsigned n1 = 40;
  double p1 = 0.4;
  unsigned n2 = 25;
  double p2 = 0.7;
  double rho_x = 0.35;  // exposure copula correlation
  double rho_y = 0.25;  // rating copula correlation
  double s = 0.5;       // distortion exponent of the rating capacity, (0, 1]
  double alpha = 0.9;   // expected-shortfall level
  // transition[initial][end], both axes in worst-to-best order
  std::array<std::array<double, kRatings>, kRatings> transition = {{
      {1.0, 0.0, 0.0, 0.0},
      {0.005, 0.960, 0.020, 0.015},
      {0.005, 0.015, 0.950, 0.030},
      {0.001, 0.002, 0.007, 0.990},
  }};
  std::size_t initial1 = 2;  // counterparty 1 starts at B
  std::size_t initial2 = 1;  // counterparty 2 starts at C
  // loss-given-rating fraction per rating index: total at default, zero at A
  std::array<double, kRatings> severity = {1.0, 0.2, 0.1, 0.0};
};

// The assembled spaces: exposure pairs (n1+1)(n2+1) on the first factor,
// the 16 rating pairs on the second; mu is the additive exposure law, prob
// the additive rating law, nu its s-distortion (prob itself when s = 1).
struct CreditSpaces {
  ProductSpace space;
  Capacity mu;
  Capacity prob;
  Capacity nu;
  LossMatrix loss;
};

// Throws std::invalid_argument on parameters outside their domains,
// transition rows that do not sum to one, or non-monotone severities.
CreditSpaces build_model(const CreditModel& m);

// Sharp upper bound on the Choquet risk over all couplings of (mu, nu),
// via the level-set sweep of the largest coupling.
double max_choquet_risk(const CreditSpaces& spaces);
double max_choquet_risk(const CreditModel& m);

// Two-state (default / no-default) reduction: exposures binomial(2, 0.4)
// and binomial(2, 0.7), default probability 0.005 per counterparty,
// square-root distortion of the rating law.
CreditSpaces build_simplified(double rho_x, double rho_y);

struct SimplifiedPoint {
  double rho_y = 0.0;
  double p_dd = 0.0;      // double-default probability at this correlation
  double pipeline = 0.0;  // general machinery on the two-state model
  // band expression 2*sqrt(0.01 - p_dd) + sqrt(p_dd) + min(corner, sqrt(p_dd))
  // with the copula corner mass P(X1 = 2, X2 = 2)
  double closed_form = 0.0;
  // same expression with the corner term not clamped; agrees with
  // closed_form exactly when sqrt(p_dd) >= corner
  double printed_form = 0.0;
};

std::vector<SimplifiedPoint> simplified_closed_form(const std::vector<double>& rho_y_grid,
                                                    double rho_x = -0.3);

enum class SweepParam { distortion, rho_x, rho_y };

struct SweepResult {
  SweepParam parameter = SweepParam::distortion;
  std::vector<double> grid;
  std::vector<double> risk;     // worst-case Choquet risk per grid point
  std::vector<double> seconds;  // wall time per grid point
};

// Worst-case risk across a strictly increasing parameter grid; points are
// evaluated in parallel and reported in grid order.
SweepResult sweep(const CreditModel& base, SweepParam parameter, const std::vector<double>& grid);

struct MesCmesResult {
  double mes = 0.0;    // sup over additive couplings of expected shortfall
  double cmes = 0.0;   // Choquet bound with shortfall-distorted marginals
  double ratio = 0.0;  // cmes / mes, always >= 1
};

// Both risk figures use the undistorted laws (the s parameter is unused).
MesCmesResult mes_vs_cmes(const CreditModel& m);

}  // namespace capot
