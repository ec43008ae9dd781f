#pragma once

// Linear-programming models of the sharp coupling bounds on small products
// (p*q <= 12): the direct program in the coupling values pi(B), its dual in
// marginal multipliers and monotonicity multipliers, and the transformed dual
// obtained by aggregating the multipliers over supersets. All three optima
// coincide with the closed-form bound for the requested sense; the builders
// exist so that this can be verified rather than assumed.

#include <cstdint>
#include <utility>
#include <vector>

#include "capot/capacity.hpp"
#include "capot/lp.hpp"
#include "capot/product.hpp"

namespace capot {

// Shared index layout. The dual is the exact transpose of the direct model,
// so one numbering serves both: pi columns double as dual rows, and marginal /
// monotonicity rows double as the phi / psi / rho columns of the dual.
//
//   pi_index(B)      column of pi(B), B a nonempty cell mask   (= dual row of B)
//   mu_index(G)      row pi(G x Y) = mu(G), G nonempty         (= column of phi(G))
//   nu_index(F)      row pi(X x F) = nu(F), F nonempty         (= column of psi(F))
//   mono_index(A,w)  row pi(A+w) - pi(A) >= 0, w not in A      (= column of rho(A,w))
//
// Orders are deterministic: masks ascending; covering pairs by (A, w)
// lexicographically. A = empty is included (the rows pin pi({w}) >= 0).
class CouplingLayout {
 public:
  explicit CouplingLayout(const ProductSpace& sp);

  std::size_t p() const { return p_; }
  std::size_t q() const { return q_; }
  std::size_t cells() const { return cells_; }

  std::size_t pi_count() const { return (std::size_t{1} << cells_) - 1; }
  std::size_t marginal_count() const { return ((std::size_t{1} << p_) - 1) + ((std::size_t{1} << q_) - 1); }
  std::size_t mono_count() const { return pairs_.size(); }

  int pi_index(std::uint32_t b) const;
  int mu_index(std::uint32_t g) const;
  int nu_index(std::uint32_t f) const;
  int mono_index(std::uint32_t a, unsigned w) const;

  // Covering pairs (A, w) in row order.
  const std::vector<std::pair<std::uint32_t, unsigned>>& covering_pairs() const { return pairs_; }

 private:
  std::size_t p_ = 0, q_ = 0, cells_ = 0;
  std::vector<int> rank_;  // (a * cells + w) -> pair rank, -1 when w in a
  std::vector<std::pair<std::uint32_t, unsigned>> pairs_;
};

// Direct program: free variables pi(B) per nonempty B, objective
// sum_B K(B) pi(B) with K the integral coefficients of f, equality rows for
// every marginal rectangle (both full-set rows are kept even though one is
// redundant), and one inequality per covering pair. sense selects whether the
// optimum is the lower or the upper sharp bound.
LinearProgram build_capacity_ot(const LossMatrix& f, const Capacity& mu, const Capacity& nu,
                                Sense sense, double tol = kDefaultTol);

// Dual of the direct program: free phi(G), psi(F) maximizing (resp.
// minimizing) sum phi(G) mu(G) + sum psi(F) nu(F), monotonicity multipliers
// rho(A, w) >= 0 for the lower problem and <= 0 for the upper one, and one
// equality row per nonempty B. `sense` is the sense of the coupling problem,
// not of the emitted LP (the dual of a minimization is a maximization).
LinearProgram build_capacity_ot_dual(const LossMatrix& f, const Capacity& mu, const Capacity& nu,
                                     Sense sense, double tol = kDefaultTol);

// Transformed dual after the change of variables L(G) = sum over supersets of
// the phi there (same for psi): objective sum_G m_mu(G) L_phi(G) + sum_F
// m_nu(F) L_psi(F) against the Moebius weights of the marginals, and one
// equality row per nonempty cell set A with right-hand side min over A of f.
// Optimum equals the untransformed dual optimum.
LinearProgram build_dual_transformed(const LossMatrix& f, const Capacity& mu, const Capacity& nu,
                                     Sense sense, double tol = kDefaultTol);

// Coupling table recovered from a solution of the direct program, indexed by
// cell mask with entry 0 for the empty set.
std::vector<double> coupling_from_solution(const LPSolution& sol, const CouplingLayout& layout);

// Solves all three models and cross-checks them: objective agreement and the
// complementary-slackness products rho(A, w) * (pi(A+w) - pi(A)) at the
// computed optima.
struct DualityReport {
  LPSolution primal, dual, transformed;
  double primal_dual_gap = 0.0;
  double dual_transformed_gap = 0.0;
  double max_slackness_violation = 0.0;
  bool all_optimal = false;
};

DualityReport verify_duality(const LossMatrix& f, const Capacity& mu, const Capacity& nu,
                             Sense sense, const SimplexOptions& options = {},
                             double tol = kDefaultTol);

}  // namespace capot
