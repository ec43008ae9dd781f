#include "capot/ot.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

namespace capot {

namespace {

// Dense primal transportation simplex. Minimizes; callers flip signs for the
// maximization. The basis is a spanning tree on the bipartite node set
// (p rows, q columns) with exactly p + q - 1 basic cells throughout.
class TransportSimplex {
 public:
  TransportSimplex(std::size_t p, std::size_t q, const std::vector<double>& cost,
                   std::vector<double> a, std::vector<double> b)
      : p_(p), q_(q), cost_(cost), a_(std::move(a)), b_(std::move(b)) {}

  LPSolution solve() {
    northwest_corner();
    const double scale = 1.0 + max_abs_cost();
    const double enter_tol = 1e-11 * scale;
    std::size_t iterations = 0, stall = 0;
    bool bland = false;
    for (;; ++iterations) {
      if (iterations > kMaxIterations)
        throw std::runtime_error("transportation simplex: iteration limit");
      compute_potentials();
      const std::size_t enter = pick_entering(enter_tol, bland);
      if (enter == kNone) break;
      const double theta = pivot(enter);
      if (theta <= 1e-13) {
        if (++stall >= 64) bland = true;
      } else {
        stall = 0;
        bland = false;
      }
    }
    return finish(iterations);
  }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  static constexpr std::size_t kMaxIterations = 2000000;

  std::size_t cell(std::size_t i, std::size_t j) const { return i * q_ + j; }

  double max_abs_cost() const {
    double m = 0.0;
    for (double c : cost_) m = std::max(m, std::fabs(c));
    return m;
  }

  // Exactly p + q - 1 basic cells: each step records one cell and advances
  // one of the two pointers.
  void northwest_corner() {
    x_.assign(p_ * q_, 0.0);
    basic_.assign(p_ * q_, false);
    std::vector<double> ra = a_, rb = b_;
    std::size_t i = 0, j = 0;
    for (;;) {
      const double t = std::min(ra[i], rb[j]);
      x_[cell(i, j)] = std::max(t, 0.0);
      basic_[cell(i, j)] = true;
      ra[i] -= t;
      rb[j] -= t;
      if (i + 1 == p_ && j + 1 == q_) break;
      if (j + 1 == q_)
        ++i;
      else if (i + 1 == p_)
        ++j;
      else if (ra[i] <= rb[j])
        ++i;
      else
        ++j;
    }
  }

  // Tree traversal from row 0; basic cells satisfy upot + vpot = cost.
  void compute_potentials() {
    adj_.assign(p_ + q_, {});
    for (std::size_t i = 0; i < p_; ++i)
      for (std::size_t j = 0; j < q_; ++j)
        if (basic_[cell(i, j)]) {
          adj_[i].push_back(cell(i, j));
          adj_[p_ + j].push_back(cell(i, j));
        }
    upot_.assign(p_, 0.0);
    vpot_.assign(q_, 0.0);
    std::vector<char> seen(p_ + q_, 0);
    std::vector<std::size_t> queue{0};
    seen[0] = 1;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const std::size_t node = queue[head];
      for (const std::size_t c : adj_[node]) {
        const std::size_t i = c / q_, j = c % q_;
        const std::size_t other = node < p_ ? p_ + j : i;
        if (seen[other]) continue;
        seen[other] = 1;
        if (node < p_)
          vpot_[j] = cost_[c] - upot_[i];
        else
          upot_[i] = cost_[c] - vpot_[j];
        queue.push_back(other);
      }
    }
    if (queue.size() != p_ + q_)
      throw std::runtime_error("transportation simplex: basis is not a spanning tree");
  }

  std::size_t pick_entering(double tol, bool bland) const {
    std::size_t best = kNone;
    double best_score = -tol;
    for (std::size_t i = 0; i < p_; ++i)
      for (std::size_t j = 0; j < q_; ++j) {
        const std::size_t c = cell(i, j);
        if (basic_[c]) continue;
        const double d = cost_[c] - upot_[i] - vpot_[j];
        if (d < best_score) {
          if (bland) return c;
          best_score = d;
          best = c;
        }
      }
    return best;
  }

  // Unique tree path from the entering cell's row node to its column node;
  // the closed cycle alternates signs starting with + on the entering cell.
  double pivot(std::size_t enter) {
    const std::size_t ei = enter / q_, ej = enter % q_;
    std::vector<std::size_t> parent_edge(p_ + q_, kNone), parent(p_ + q_, kNone);
    std::vector<char> seen(p_ + q_, 0);
    std::vector<std::size_t> queue{ei};
    seen[ei] = 1;
    for (std::size_t head = 0; head < queue.size() && !seen[p_ + ej]; ++head) {
      const std::size_t node = queue[head];
      for (const std::size_t c : adj_[node]) {
        const std::size_t i = c / q_, j = c % q_;
        const std::size_t other = node < p_ ? p_ + j : i;
        if (seen[other]) continue;
        seen[other] = 1;
        parent[other] = node;
        parent_edge[other] = c;
        queue.push_back(other);
      }
    }
    if (!seen[p_ + ej])
      throw std::runtime_error("transportation simplex: entering cell closes no cycle");

    // Path cells from the column end back to the row end get -, +, -, ...
    std::vector<std::size_t> minus, plus;
    bool negative = true;
    for (std::size_t node = p_ + ej; node != ei; node = parent[node]) {
      (negative ? minus : plus).push_back(parent_edge[node]);
      negative = !negative;
    }

    double theta = std::numeric_limits<double>::infinity();
    for (const std::size_t c : minus) theta = std::min(theta, x_[c]);
    std::size_t leave = kNone;
    for (const std::size_t c : minus)
      if (x_[c] <= theta + 1e-15 && (leave == kNone || c < leave)) leave = c;
    x_[enter] += theta;
    for (const std::size_t c : plus) x_[c] += theta;
    for (const std::size_t c : minus) x_[c] = std::max(x_[c] - theta, 0.0);
    basic_[leave] = false;
    basic_[enter] = true;
    x_[leave] = 0.0;
    return theta;
  }

  LPSolution finish(std::size_t iterations) const {
    LPSolution sol;
    sol.status = LPSolution::Status::optimal;
    sol.x = x_;
    sol.iterations = iterations;
    double obj = 0.0;
    for (std::size_t c = 0; c < x_.size(); ++c) obj += cost_[c] * x_[c];
    sol.objective = obj;
    sol.row_duals.reserve(p_ + q_);
    sol.row_duals.insert(sol.row_duals.end(), upot_.begin(), upot_.end());
    sol.row_duals.insert(sol.row_duals.end(), vpot_.begin(), vpot_.end());

    double residual = 0.0, dual_obj = 0.0;
    for (std::size_t i = 0; i < p_; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < q_; ++j) s += x_[cell(i, j)];
      residual = std::max(residual, std::fabs(s - a_[i]));
      dual_obj += upot_[i] * a_[i];
    }
    for (std::size_t j = 0; j < q_; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < p_; ++i) s += x_[cell(i, j)];
      residual = std::max(residual, std::fabs(s - b_[j]));
      dual_obj += vpot_[j] * b_[j];
    }
    sol.primal_residual = residual;
    const double scale = 1.0 + std::fabs(obj) + max_abs_cost();
    if (residual > 1e-8 * scale || std::fabs(dual_obj - obj) > 1e-8 * scale)
      throw std::runtime_error("transportation simplex: self-check failed");
    return sol;
  }

  std::size_t p_, q_;
  std::vector<double> cost_;
  std::vector<double> a_, b_;
  std::vector<double> x_;
  std::vector<char> basic_;
  std::vector<double> upot_, vpot_;
  std::vector<std::vector<std::size_t>> adj_;
};

}  // namespace

LPSolution ot_classic(const LossMatrix& cost, const std::vector<double>& u,
                      const std::vector<double>& v, Sense sense) {
  const std::size_t p = cost.space().p(), q = cost.space().q();
  if (u.size() != p || v.size() != q)
    throw std::invalid_argument("ot_classic: marginal sizes do not match the grid");
  double su = 0.0, sv = 0.0;
  for (const double w : u) {
    if (w < -1e-12) throw std::invalid_argument("ot_classic: negative marginal weight");
    su += w;
  }
  for (const double w : v) {
    if (w < -1e-12) throw std::invalid_argument("ot_classic: negative marginal weight");
    sv += w;
  }
  if (std::fabs(su - sv) > 1e-10)
    throw std::invalid_argument("ot_classic: marginal totals differ");

  std::vector<double> c = cost.values();
  if (sense == Sense::maximize)
    for (double& ci : c) ci = -ci;
  TransportSimplex solver(p, q, c, u, v);
  LPSolution sol = solver.solve();
  if (sense == Sense::maximize) {
    sol.objective = -sol.objective;
    for (double& y : sol.row_duals) y = -y;
  }
  return sol;
}

namespace {

// One evaluation of the threshold objective g(t) = t + (worst expected
// excess above t) / (1 - alpha), together with the supporting lines induced
// by the attaining coupling. The excess under a fixed coupling is affine in
// t on either side of t with tail mass {loss >= t} to the left and
// {loss > t} to the right, so the two one-sided slopes differ exactly when
// the coupling loads cells at level t.
struct ThresholdEval {
  double value = 0.0;
  double slope_below = 0.0;  // supporting slope of g on thresholds <= t
  double slope_above = 0.0;  // supporting slope on thresholds >= t
};

ThresholdEval eval_threshold(const LossMatrix& loss, const std::vector<double>& u,
                             const std::vector<double>& v, double alpha, double t) {
  std::vector<double> excess = loss.values();
  for (double& e : excess) e = std::max(e - t, 0.0);
  const LPSolution worst =
      ot_classic(LossMatrix(loss.space(), std::move(excess)), u, v, Sense::maximize);
  double strictly_above = 0.0, at_level = 0.0;
  for (std::size_t c = 0; c < worst.x.size(); ++c) {
    if (loss.values()[c] > t)
      strictly_above += worst.x[c];
    else if (loss.values()[c] == t)
      at_level += worst.x[c];
  }
  ThresholdEval e;
  e.value = t + worst.objective / (1.0 - alpha);
  e.slope_below = 1.0 - (strictly_above + at_level) / (1.0 - alpha);
  e.slope_above = 1.0 - strictly_above / (1.0 - alpha);
  return e;
}

// Exact minimum of the convex g over one breakpoint interval [a, b]. Between
// adjacent breakpoints g is a maximum of affine functions of t (one per
// coupling), whose minimizer generally sits at a crossing strictly inside
// the interval; supporting-line intersection converges to it finitely.
double refine_interval(const LossMatrix& loss, const std::vector<double>& u,
                       const std::vector<double>& v, double alpha, double a, double b,
                       const ThresholdEval& at_a, const ThresholdEval& at_b) {
  double best = std::min(at_a.value, at_b.value);
  double ta = a, va = at_a.value, sa = at_a.slope_above;
  double tb = b, vb = at_b.value, sb = at_b.slope_below;
  const double tol = 1e-12 * (1.0 + std::fabs(best));
  for (int round = 0; round < 64; ++round) {
    if (sa >= -1e-15 || sb <= 1e-15) break;
    // Crossing of the two supporting lines; the true minimum lies above it.
    const double cross = (vb - sb * tb - (va - sa * ta)) / (sa - sb);
    if (!(cross > ta && cross < tb)) break;
    const double floor_value = va + sa * (cross - ta);
    const ThresholdEval ec = eval_threshold(loss, u, v, alpha, cross);
    best = std::min(best, ec.value);
    if (ec.value - floor_value <= tol) break;
    if (ec.slope_above < 0.0) {
      ta = cross;
      va = ec.value;
      sa = ec.slope_above;
    } else {
      tb = cross;
      vb = ec.value;
      sb = ec.slope_below;
    }
  }
  return best;
}

}  // namespace

double mes(const LossMatrix& loss, const std::vector<double>& u,
           const std::vector<double>& v, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("mes: alpha must lie in (0, 1)");

  std::vector<double> levels = loss.values();
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  const std::size_t count = levels.size();

  std::map<std::size_t, ThresholdEval> cache;
  const auto value_at = [&](std::size_t k) {
    const auto it = cache.find(k);
    if (it != cache.end()) return it->second.value;
    const ThresholdEval e = eval_threshold(loss, u, v, alpha, levels[k]);
    cache.emplace(k, e);
    return e.value;
  };

  std::size_t lo = 0, hi = count - 1;
  if (count > 64) {
    // The threshold objective is convex in t, so thirds can be discarded;
    // the final window is rescanned with a small guard margin.
    while (hi - lo > 8) {
      const std::size_t m1 = lo + (hi - lo) / 3;
      const std::size_t m2 = hi - (hi - lo) / 3;
      if (value_at(m1) <= value_at(m2))
        hi = m2;
      else
        lo = m1;
    }
    lo = lo >= 3 ? lo - 3 : 0;
    hi = std::min(hi + 3, count - 1);
  }
  for (std::size_t k = lo; k <= hi; ++k) value_at(k);
  std::size_t arg = lo;
  for (const auto& [k, e] : cache)
    if (e.value < cache.at(arg).value) arg = k;
  double best = cache.at(arg).value;

  // By convexity the continuous minimizer lies in one of the two intervals
  // around the best breakpoint; it is generally interior, where the worst
  // coupling switches, so both sides are refined exactly.
  if (arg > 0) {
    value_at(arg - 1);
    best = std::min(best, refine_interval(loss, u, v, alpha, levels[arg - 1], levels[arg],
                                          cache.at(arg - 1), cache.at(arg)));
  }
  if (arg + 1 < count) {
    value_at(arg + 1);
    best = std::min(best, refine_interval(loss, u, v, alpha, levels[arg], levels[arg + 1],
                                          cache.at(arg), cache.at(arg + 1)));
  }
  return best;
}

}  // namespace capot
