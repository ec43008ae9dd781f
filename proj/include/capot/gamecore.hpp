#pragma once

// Cooperative-game analysis of capacities: core membership, balancedness via
// the balanced-cover linear program (solved in column form so the row count
// stays at n), the marginal characterization of the extremal couplings'
// cores, per-set exactness, and the smallest capacity induced by the core of
// the smallest coupling.

#include <cstdint>
#include <optional>
#include <vector>

#include "capot/capacity.hpp"
#include "capot/lp.hpp"
#include "capot/product.hpp"

namespace capot {

// True iff the additive weights dominate gamma on every subset, with
// equality on the full set. Any dense-capable form, n <= 20.
bool core_contains(const Capacity& gamma, const std::vector<double>& weights,
                   double tol = 1e-8);

struct CoreCertificate {
  bool nonempty = false;
  // Additive weights of a core element when one exists. On the routed
  // product paths this is the product of marginal witnesses (smallest
  // coupling) or the delegated marginal witness (degenerate factor).
  std::optional<std::vector<double>> witness;
  // Best balanced-cover value minus gamma(full): positive exactly when the
  // core is empty. +infinity on the structural largest-coupling route, where
  // disjoint crossed cylinders force emptiness without a cover bound.
  double balanced_excess = 0.0;
};

// Balancedness: the cover LP  max sum_A lambda_A gamma(A)  over lambda >= 0
// with sum_{A owning z} lambda_A = 1 stays at gamma(full) iff the core is
// nonempty, and its row prices then form a core element. Dense path n <= 16.
// Capacities tagged as extremal couplings route through their marginals:
// the smallest coupling's core is nonempty iff both marginal cores are, and
// the largest coupling's core is empty whenever both factors have >= 2
// points; a one-point factor delegates to the other marginal.
CoreCertificate core_nonempty(const Capacity& gamma, double tol = 1e-8);

// Membership in the core of the smallest coupling of (mu, nu) through its
// characterization: the additive marginals of the weights must lie in the
// marginal cores. Equivalent to dominating the smallest coupling directly.
bool core_pistar_membership(const ProductSpace& sp, const std::vector<double>& weights,
                            const Capacity& mu, const Capacity& nu, double tol = 1e-8);

struct ExactnessReport {
  bool exact = false;
  bool core_empty = false;
  // Per subset mask: least mass a core element can place on the set (the
  // full-set entry equals gamma(full)); empty when the core is empty.
  std::vector<double> core_minimum;
  // Sets whose least core mass exceeds gamma by more than the tolerance.
  std::vector<std::uint64_t> failures;
};

// Exactness: for every nonempty S the least core mass on S (one cover-form
// LP per set, solved in parallel) must meet gamma(S). n <= 12.
ExactnessReport is_exact(const Capacity& gamma, double tol = 1e-8);

// Least value p(N) over additive couplings whose marginals dominate mu and
// nu (equivalently, over the core of the smallest coupling). Additive
// marginals reduce to a transportation solve with the indicator cost of N;
// general capacities solve the joint program with marginal-core rows.
// Throws std::domain_error when either marginal core is empty.
double tilde_pi(const ProductSpace& sp, const Capacity& mu, const Capacity& nu,
                const SubsetMask& cells, double tol = 1e-8);

}  // namespace capot
