#pragma once

// Monotone set functions (capacities) on finite ground sets. Small ground
// sets use a dense table of 2^n values indexed by subset bits; large ones use
// structured forms (additive weights, distorted additive, possibility) or an
// arbitrary lazy rule, because product spaces with thousands of points can
// never be tabulated. Instances are immutable after construction and cheap to
// copy (shared internals), hence safe to share across threads.

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "capot/ground.hpp"

namespace capot {

enum class CapacityForm { dense, additive, distorted, possibility, rule };

class Capacity;

// Provenance note attached to the extremal product couplings so that core
// analysis can route through the marginal characterizations instead of the
// 2^(p*q) constraint set.
struct ProductTag {
  enum class Kind { lower_coupling, upper_coupling };
  Kind kind;
  std::size_t p = 0, q = 0;
  std::shared_ptr<const Capacity> mu, nu;
};

class Capacity {
 public:
  using Rule = std::function<double(const SubsetMask&)>;
  using Distortion = std::function<double(double)>;

  Capacity() = default;

  // Dense table, validated: value[0] == 0, nonnegative, monotone along
  // covering pairs. Throws std::invalid_argument naming the first offence.
  static Capacity dense(GroundSet g, std::vector<double> values, double tol = kDefaultTol);

  // Dense table without validation; check_properties() reports on it.
  static Capacity dense_unchecked(GroundSet g, std::vector<double> values);

  static Capacity additive(GroundSet g, std::vector<double> weights);
  static Capacity rule_backed(GroundSet g, Rule r);

  const GroundSet& ground() const { return impl().ground; }
  std::size_t n() const { return impl().ground.size(); }
  CapacityForm form() const { return impl().form; }

  double operator()(const SubsetMask& a) const;
  // Convenience for universes that fit one word.
  double at_bits(std::uint64_t bits) const { return (*this)(SubsetMask(n(), bits)); }
  double at_full() const { return impl().full_value; }

  bool is_dense() const { return impl().form == CapacityForm::dense; }
  const std::vector<double>& dense_values() const;

  // Point weights of the additive / distorted-additive / possibility forms.
  bool has_point_data() const;
  const std::vector<double>& point_data() const;

  // Evaluate every subset into a dense (unchecked) table; n <= kDenseLimit.
  Capacity densified() const;

  std::shared_ptr<const ProductTag> product_tag() const { return impl().tag; }
  Capacity with_product_tag(std::shared_ptr<const ProductTag> t) const;

 private:
  struct Impl {
    GroundSet ground;
    CapacityForm form = CapacityForm::dense;
    std::vector<double> data;  // dense table, or point weights/degrees
    Distortion distortion;     // distorted form only
    Rule rule;                 // rule form only
    double full_value = 0.0;
    std::shared_ptr<const ProductTag> tag;
  };

  explicit Capacity(std::shared_ptr<const Impl> i) : impl_(std::move(i)) {}
  const Impl& impl() const {
    if (!impl_) throw std::logic_error("Capacity: empty handle");
    return *impl_;
  }
  static Capacity make(Impl&& i);

  std::shared_ptr<const Impl> impl_;

  friend Capacity make_possibility(GroundSet, std::vector<double>, double);
  friend Capacity distort(const Capacity&, Capacity::Distortion, double);
};

// Moebius coefficients of a set function, indexed like a dense table.
struct MobiusVector {
  GroundSet ground;
  std::vector<double> values;
};

// ---- constructors ----

// Additive capacity from nonnegative point weights.
Capacity make_additive(GroundSet g, std::vector<double> weights);

// Unanimity game of a nonempty focal set F: 1 on supersets of F, else 0.
Capacity make_unanimity(GroundSet g, const SubsetMask& focal);

// Possibility measure from point degrees in [0,1] with max 1:
// gamma(A) = max over members. make_necessity is its conjugate.
Capacity make_possibility(GroundSet g, std::vector<double> degrees, double tol = kDefaultTol);
Capacity make_necessity(GroundSet g, std::vector<double> degrees, double tol = kDefaultTol);

// Distorted probability g(p(A)) for additive normalized p and a monotone
// distortion with g(0)=0, g(1)=1.
Capacity distort(const Capacity& p, Capacity::Distortion g, double tol = kDefaultTol);

// Conjugate capacity A -> gamma(full) - gamma(complement of A).
Capacity conjugate(const Capacity& gamma);

// ---- transforms ----

// Moebius transform; dense representation required (n <= kDenseLimit after
// densify). Round-trips with zeta to ~1e-12 * 2^n.
MobiusVector mobius(const Capacity& gamma);

// Subset-sum aggregation of a Moebius vector. No capacity validation: the
// result of an arbitrary vector need not be monotone.
Capacity zeta(const MobiusVector& m);

// ---- property checks ----

enum class CheckResult { yes, no, skipped };

struct PropertyReport {
  double tol = kDefaultTol;
  bool grounded = false, nonnegative = false, monotone = false;
  bool is_capacity = false;
  bool normalized = false;
  bool additive = false;
  CheckResult supermodular = CheckResult::skipped;   // 2-monotone
  CheckResult submodular = CheckResult::skipped;     // 2-alternating
  CheckResult totally_monotone = CheckResult::skipped;
  std::map<int, CheckResult> k_monotone;     // k >= 3 brute-force checks
  std::map<int, CheckResult> k_alternating;  // via the conjugate
  // Most negative covering increment gamma(A+w) - gamma(A); >= -tol iff monotone.
  double worst_monotone_gap = 0.0;
  double worst_supermodular_gap = 0.0;
};

struct PropertyCheckOptions {
  double tol = kDefaultTol;
  int k_max = 2;            // check k-monotonicity / alternation up to this k
  // Brute-force k >= 3 checks are skipped beyond these sizes.
  std::size_t brute_force_n_limit = 6;
  int brute_force_k_limit = 4;
};

PropertyReport check_properties(const Capacity& gamma, const PropertyCheckOptions& opts = {});

}  // namespace capot
