#include "capot/lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace capot {
namespace {

constexpr int kNoVar = -1;

struct SparseCol {
  std::vector<std::pair<std::size_t, double>> entries;  // (row, coefficient)
};

// Internal standard form: minimize c.x subject to A x = b, b >= 0, with every
// structural variable either nonnegative or free (nonpos is folded in by
// negating its column up front).
class Solver {
 public:
  Solver(const LinearProgram& lp, const SimplexOptions& opts)
      : lp_(lp), opts_(opts) {
    build();
  }

  LPSolution run() {
    LPSolution out;
    if (!phase1()) {
      out.status = LPSolution::Status::infeasible;
      out.iterations = iterations_;
      return out;
    }
    const bool bounded = phase2();
    if (!bounded) {
      out.status = LPSolution::Status::unbounded;
      out.iterations = iterations_;
      return out;
    }
    finish(out);
    // One repair pass: rebuild the inverse, resolve, re-check.
    if (out.primal_residual > opts_.residual_limit) {
      refactor();
      if (!phase2()) throw std::runtime_error("simplex: lost boundedness during repair");
      finish(out);
      if (out.primal_residual > opts_.residual_limit)
        throw std::runtime_error("simplex: residual " + std::to_string(out.primal_residual) +
                                 " exceeds limit after refactorization");
    }
    return out;
  }

 private:
  const LinearProgram& lp_;
  const SimplexOptions& opts_;

  std::size_t m_ = 0;       // rows
  std::size_t n_all_ = 0;   // structural + slack + artificial columns
  std::size_t n_struct_ = 0;
  double obj_sign_ = 1.0;   // +1 minimize, -1 maximize

  std::vector<SparseCol> cols_;
  std::vector<double> cost_;        // phase-2 cost per internal column
  std::vector<char> is_free_;       // per internal column
  std::vector<char> is_artificial_; // per internal column
  std::vector<double> col_sign_;    // +1, or -1 for folded nonpos structurals
  std::vector<double> b_;           // internal rhs, >= 0
  std::vector<double> dual_sign_;   // internal row = dual_sign * original row
  std::vector<int> struct_col_;     // original var -> internal column

  std::vector<int> basis_;          // basis_[i] = internal column in row slot i
  std::vector<char> in_basis_;      // per internal column
  std::vector<double> xB_;          // basic values by row slot
  std::vector<std::vector<double>> binv_col_;  // binv_col_[r] = column r of B^-1
  std::vector<double> y_;           // simplex multipliers for current costs
  std::vector<double> cB_;          // current cost of basic variables

  std::size_t iterations_ = 0;
  bool phase1_mode_ = false;

  void build() {
    m_ = lp_.rows.size();
    if (m_ > opts_.max_rows)
      throw std::invalid_argument("simplex: " + std::to_string(m_) +
                                  " rows exceeds the max_rows guard");
    if (lp_.num_vars < 0 ||
        lp_.objective.size() != static_cast<std::size_t>(lp_.num_vars))
      throw std::invalid_argument("simplex: objective size mismatch");
    if (!lp_.kinds.empty() &&
        lp_.kinds.size() != static_cast<std::size_t>(lp_.num_vars))
      throw std::invalid_argument("simplex: kinds size mismatch");

    obj_sign_ = lp_.sense == Sense::minimize ? 1.0 : -1.0;
    n_struct_ = static_cast<std::size_t>(lp_.num_vars);
    cols_.assign(n_struct_, {});
    cost_.assign(n_struct_, 0.0);
    is_free_.assign(n_struct_, 0);
    is_artificial_.assign(n_struct_, 0);
    col_sign_.assign(n_struct_, 1.0);
    struct_col_.resize(n_struct_);
    for (std::size_t j = 0; j < n_struct_; ++j) {
      struct_col_[j] = static_cast<int>(j);
      const VarKind kind = lp_.kinds.empty() ? VarKind::nonneg : lp_.kinds[j];
      if (kind == VarKind::nonpos) col_sign_[j] = -1.0;
      if (kind == VarKind::free_var) is_free_[j] = 1;
      cost_[j] = obj_sign_ * lp_.objective[j] * col_sign_[j];
    }

    b_.assign(m_, 0.0);
    dual_sign_.assign(m_, 1.0);
    std::vector<Rel> rel(m_);
    for (std::size_t r = 0; r < m_; ++r) {
      const LPRow& row = lp_.rows[r];
      double sign = 1.0;
      Rel rr = row.rel;
      double rhs = row.rhs;
      if (rhs < 0.0 || (rhs == 0.0 && rr == Rel::ge)) {
        // Flip so every rhs is >= 0 and rhs-zero inequalities become <=,
        // which gives them a ready-made basic slack.
        sign = -1.0;
        rhs = -rhs;
        if (rr == Rel::le) rr = Rel::ge;
        else if (rr == Rel::ge) rr = Rel::le;
      }
      dual_sign_[r] = sign;
      b_[r] = rhs;
      rel[r] = rr;
      for (const auto& [var, coef] : row.coeffs) {
        if (var < 0 || var >= lp_.num_vars)
          throw std::invalid_argument("simplex: row references variable out of range");
        if (coef == 0.0) continue;
        cols_[var].entries.emplace_back(r, sign * coef * col_sign_[var]);
      }
    }
    for (auto& c : cols_) {
      std::sort(c.entries.begin(), c.entries.end());
      // Merge duplicate row references.
      std::size_t w = 0;
      for (std::size_t k = 0; k < c.entries.size(); ++k) {
        if (w > 0 && c.entries[w - 1].first == c.entries[k].first)
          c.entries[w - 1].second += c.entries[k].second;
        else
          c.entries[w++] = c.entries[k];
      }
      c.entries.resize(w);
    }

    basis_.assign(m_, kNoVar);
    for (std::size_t r = 0; r < m_; ++r) {
      if (rel[r] == Rel::le) {
        basis_[r] = add_unit_col(r, 1.0, false);
      } else if (rel[r] == Rel::ge) {
        add_unit_col(r, -1.0, false);  // surplus, starts nonbasic
        basis_[r] = add_unit_col(r, 1.0, true);
      } else {
        basis_[r] = add_unit_col(r, 1.0, true);
      }
    }
    n_all_ = cols_.size();
    in_basis_.assign(n_all_, 0);
    for (int j : basis_) in_basis_[j] = 1;

    xB_ = b_;
    binv_col_.assign(m_, std::vector<double>(m_, 0.0));
    for (std::size_t r = 0; r < m_; ++r) binv_col_[r][r] = 1.0;
    y_.assign(m_, 0.0);
    cB_.assign(m_, 0.0);
  }

  int add_unit_col(std::size_t row, double coef, bool artificial) {
    SparseCol c;
    c.entries.emplace_back(row, coef);
    cols_.push_back(std::move(c));
    cost_.push_back(0.0);
    is_free_.push_back(0);
    is_artificial_.push_back(artificial ? 1 : 0);
    col_sign_.push_back(1.0);
    return static_cast<int>(cols_.size()) - 1;
  }

  double active_cost(int j) const {
    if (phase1_mode_) return is_artificial_[j] ? 1.0 : 0.0;
    return cost_[j];
  }

  void recompute_prices() {
    for (std::size_t i = 0; i < m_; ++i) cB_[i] = active_cost(basis_[i]);
    for (std::size_t r = 0; r < m_; ++r) {
      double s = 0.0;
      const double* col = binv_col_[r].data();
      for (std::size_t i = 0; i < m_; ++i) s += cB_[i] * col[i];
      y_[r] = s;
    }
  }

  double reduced_cost(int j) const {
    double s = active_cost(j);
    for (const auto& [r, a] : cols_[j].entries) s -= y_[r] * a;
    return s;
  }

  // w = B^-1 A_j
  void ftran(int j, std::vector<double>& w) const {
    std::fill(w.begin(), w.end(), 0.0);
    for (const auto& [r, a] : cols_[j].entries) {
      const double* col = binv_col_[r].data();
      for (std::size_t i = 0; i < m_; ++i) w[i] += a * col[i];
    }
  }

  // Blocking-row scan for an entering direction. Returns the chosen slot or
  // -1 when nothing blocks. In Bland mode ties go to the smallest basis
  // column (the anti-cycling requirement); otherwise rows within a hair of
  // the minimum ratio compete by pivot magnitude, which keeps the basis away
  // from near-singular updates, with a preference for evicting artificials.
  int ratio_test(const std::vector<double>& w, double enter_dir, bool bland) const {
    double wmax = 0.0;
    for (double v : w) wmax = std::max(wmax, std::abs(v));
    // A row whose step is tiny against the direction's own scale cannot
    // block: pivoting there divides the inverse by the tiny element and
    // wrecks its conditioning, while stepping past costs at most
    // step * theta of (clamped) infeasibility. Relative to wmax so that
    // genuinely small directions keep their support rows.
    const double step_floor = std::max(opts_.pivot_tol, 1e-7 * wmax);
    double theta = std::numeric_limits<double>::infinity();
    int leave_slot = -1;
    auto blocking = [&](std::size_t i, double& step_out) {
      const int bj = basis_[i];
      const double step = enter_dir * w[i];
      if (is_artificial_[bj] && !phase1_mode_) {
        if (std::abs(step) <= step_floor) return false;
        step_out = std::abs(step);
      } else {
        if (is_free_[bj]) return false;
        if (step <= step_floor) return false;
        step_out = step;
      }
      return true;
    };
    if (bland) {
      for (std::size_t i = 0; i < m_; ++i) {
        double step;
        if (!blocking(i, step)) continue;
        const double ratio = std::max(xB_[i], 0.0) / step;
        if (ratio < theta - 1e-12 ||
            (ratio < theta + 1e-12 && leave_slot >= 0 &&
             basis_[i] < basis_[leave_slot])) {
          theta = ratio;
          leave_slot = static_cast<int>(i);
        }
      }
      return leave_slot;
    }
    for (std::size_t i = 0; i < m_; ++i) {
      double step;
      if (!blocking(i, step)) continue;
      theta = std::min(theta, std::max(xB_[i], 0.0) / step);
    }
    if (theta == std::numeric_limits<double>::infinity()) return -1;
    const double window = theta + 1e-9 * (1.0 + theta);
    double best_score = 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      double step;
      if (!blocking(i, step)) continue;
      if (std::max(xB_[i], 0.0) / step > window) continue;
      const double score = step * (is_artificial_[basis_[i]] ? 4.0 : 1.0);
      if (score > best_score) {
        best_score = score;
        leave_slot = static_cast<int>(i);
      }
    }
    return leave_slot;
  }

  // Core loop for the active cost vector. Returns false on unboundedness.
  bool iterate() {
    recompute_prices();
    std::vector<double> w(m_);
    // Columns whose basis-transformed direction is numerically zero: they
    // cannot be blocked by any row, so drifting prices can dress them up as
    // unbounded rays. Barred from entering until the basis changes enough.
    std::vector<char> banned(n_all_, 0);
    bool any_banned = false;
    bool bland = false;
    bool repriced = true;    // prices exact since the last pivot
    bool certified = false;  // inverse refactorized since the last pivot
    std::size_t stalled = 0;
    std::size_t since_reprice = 0;
    while (true) {
      if (++iterations_ > opts_.max_iterations)
        throw std::runtime_error("simplex: iteration limit reached");
      // The eta updates of y_ compound error over long degenerate stretches;
      // refresh from the inverse on a fixed cadence to keep pricing honest.
      if (++since_reprice >= 64) {
        recompute_prices();
        since_reprice = 0;
        repriced = true;
      }

      int enter = kNoVar;
      double enter_dir = 1.0;
      double best = -opts_.pivot_tol;
      for (std::size_t j = 0; j < n_all_; ++j) {
        if (in_basis_[j] || banned[j]) continue;
        if (is_artificial_[j] && !phase1_mode_) continue;
        const double d = reduced_cost(static_cast<int>(j));
        double score;
        double dir;
        if (is_free_[j]) {
          score = -std::abs(d);
          dir = d < 0.0 ? 1.0 : -1.0;
        } else {
          score = d;
          dir = 1.0;
        }
        if (score < best) {
          best = score;
          enter = static_cast<int>(j);
          enter_dir = dir;
          if (bland) break;  // first improving index wins
        }
      }
      if (enter == kNoVar) return true;  // optimal for the active costs

      ftran(enter, w);
      const int leave_slot = ratio_test(w, enter_dir, bland);

      if (leave_slot < 0) {
        // No blocking row. Before reporting a ray, make sure it is real:
        // re-price exactly (cheap), refactorize (the last resort), and throw
        // out directions that are numerically zero across every row, whose
        // "improvement" is a tolerance mirage on an ill-conditioned basis.
        if (!repriced) {
          recompute_prices();
          since_reprice = 0;
          repriced = true;
          continue;
        }
        if (!certified) {
          refactor();
          recompute_prices();
          since_reprice = 0;
          certified = true;
          continue;
        }
        double wmax = 0.0;
        for (double v : w) wmax = std::max(wmax, std::abs(v));
        if (wmax <= opts_.pivot_tol) {
          banned[enter] = 1;
          any_banned = true;
          continue;
        }
        if (phase1_mode_) {
          // The phase-1 objective is a sum of nonnegative variables and so is
          // bounded below by zero: there is no such thing as a real phase-1
          // ray. What reaches this point is a direction that moves only free
          // basics (a free column dependent on the basic free block, priced
          // off zero by roundoff). Bar the column and keep going.
#ifdef CAPOT_LP_DEBUG
          double art_sum = 0.0, xb_max = 0.0, xb_min = 0.0, ymax = 0.0;
          std::size_t n_art_basic = 0, n_free_rows = 0, n_pos_steps = 0;
          for (std::size_t i = 0; i < m_; ++i) {
            if (is_artificial_[basis_[i]]) { art_sum += std::max(xB_[i], 0.0); ++n_art_basic; }
            if (is_free_[basis_[i]]) ++n_free_rows;
            else xb_min = std::min(xb_min, xB_[i]);
            if (enter_dir * w[i] > opts_.pivot_tol && !is_free_[basis_[i]]) ++n_pos_steps;
            xb_max = std::max(xb_max, std::abs(xB_[i]));
          }
          for (double v : y_) ymax = std::max(ymax, std::abs(v));
          std::fprintf(stderr,
                       "[p1 ban] m=%zu enter=%d free=%d art=%d best=%.3e wmax=%.3e "
                       "artsum=%.3e artbasic=%zu freerows=%zu possteps=%zu xbmax=%.3e xbmin=%.3e ymax=%.3e it=%zu\n",
                       m_, enter, (int)is_free_[enter], (int)is_artificial_[enter], best, wmax,
                       art_sum, n_art_basic, n_free_rows, n_pos_steps, xb_max, xb_min, ymax, iterations_);
#endif
          banned[enter] = 1;
          any_banned = true;
          continue;
        }
        return false;
      }

      const double theta = std::max(xB_[leave_slot], 0.0) /
                           std::abs(enter_dir * w[leave_slot]);
      if (theta <= opts_.feas_tol) {
        if (++stalled >= opts_.stall_limit) bland = true;
      } else {
        stalled = 0;
        bland = false;
      }

      const double true_reduced =
          is_free_[enter] ? (enter_dir > 0.0 ? best : -best) : best;
      pivot(enter, leave_slot, w, true_reduced);
      repriced = certified = false;
      if (any_banned) {
        std::fill(banned.begin(), banned.end(), 0);
        any_banned = false;
      }
    }
  }

  // enter_reduced must be the true reduced cost of the entering column (the
  // pricing score is -|d| for free columns, which is not it).
  void pivot(int enter, int leave_slot, const std::vector<double>& w,
             double enter_reduced) {
    const double piv = w[leave_slot];
    if (std::abs(piv) < 1e-13)
      throw std::runtime_error("simplex: pivot element vanished");
    const double theta = xB_[leave_slot] / piv;  // signed entering value

    for (std::size_t i = 0; i < m_; ++i) xB_[i] -= theta * w[i];
    xB_[leave_slot] = theta;

    const int leave = basis_[leave_slot];
    in_basis_[leave] = 0;
    in_basis_[enter] = 1;
    basis_[leave_slot] = enter;

    // Eta update of B^-1, column-major; untouched columns stay zero-cheap.
    const std::size_t ls = static_cast<std::size_t>(leave_slot);
    for (std::size_t r = 0; r < m_; ++r) {
      double* col = binv_col_[r].data();
      const double t = col[ls];
      if (t == 0.0) continue;
      const double scaled = t / piv;
      col[ls] = scaled;
      for (std::size_t i = 0; i < m_; ++i) {
        if (i == ls) continue;
        col[i] -= w[i] * scaled;
      }
    }

    // y' = y + d_enter * (new row leave_slot of B^-1).
    for (std::size_t r = 0; r < m_; ++r)
      y_[r] += enter_reduced * binv_col_[r][ls];
    cB_[ls] = active_cost(enter);
  }

  bool phase1() {
    phase1_mode_ = true;
    if (!iterate()) throw std::runtime_error("simplex: phase-1 unbounded");
#ifdef CAPOT_LP_DEBUG
    std::fprintf(stderr, "[phase1 done] m=%zu it=%zu degen=%zu\n", m_, iterations_, degen_pivots_);
#endif
    double infeas = 0.0;
    for (std::size_t i = 0; i < m_; ++i)
      if (is_artificial_[basis_[i]]) infeas += std::max(xB_[i], 0.0);
    double scale = 1.0;
    for (double v : b_) scale = std::max(scale, std::abs(v));
    phase1_mode_ = false;
    if (infeas > opts_.feas_tol * scale * 16.0) return false;
    drive_out_artificials();
    return true;
  }

  // Pivot basic artificials (all at ~zero) onto any usable structural or
  // slack column; rows with no candidate are redundant and keep their pinned
  // artificial as a placeholder basic.
  void drive_out_artificials() {
    std::vector<double> w(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      if (!is_artificial_[basis_[i]]) continue;
      for (std::size_t j = 0; j < n_all_; ++j) {
        if (in_basis_[j] || is_artificial_[j]) continue;
        ftran(static_cast<int>(j), w);
        if (std::abs(w[i]) > 1e-7) {
          xB_[i] = 0.0;
          pivot(static_cast<int>(j), static_cast<int>(i), w, 0.0);
          break;
        }
      }
    }
  }

  bool phase2() {
    phase1_mode_ = false;
    return iterate();
  }

  void refactor() {
    // Rebuild B^-1 by Gauss-Jordan with partial pivoting on the basis matrix.
    std::vector<std::vector<double>> a(m_, std::vector<double>(m_, 0.0));
    for (std::size_t i = 0; i < m_; ++i)
      for (const auto& [r, v] : cols_[basis_[i]].entries) a[r][i] = v;
    for (auto& col : binv_col_) std::fill(col.begin(), col.end(), 0.0);
    for (std::size_t r = 0; r < m_; ++r) binv_col_[r][r] = 1.0;

    for (std::size_t k = 0; k < m_; ++k) {
      std::size_t piv_row = k;
      double piv_val = std::abs(a[k][k]);
      for (std::size_t r = k + 1; r < m_; ++r)
        if (std::abs(a[r][k]) > piv_val) { piv_val = std::abs(a[r][k]); piv_row = r; }
      if (piv_val < 1e-12) throw std::runtime_error("simplex: singular basis");
      if (piv_row != k) {
        std::swap(a[piv_row], a[k]);
        for (std::size_t r = 0; r < m_; ++r)
          std::swap(binv_col_[r][piv_row], binv_col_[r][k]);
      }
      const double inv = 1.0 / a[k][k];
      for (std::size_t c = 0; c < m_; ++c) a[k][c] *= inv;
      for (std::size_t r = 0; r < m_; ++r) binv_col_[r][k] *= inv;
      for (std::size_t r2 = 0; r2 < m_; ++r2) {
        if (r2 == k) continue;
        const double f = a[r2][k];
        if (f == 0.0) continue;
        for (std::size_t c = 0; c < m_; ++c) a[r2][c] -= f * a[k][c];
        for (std::size_t r = 0; r < m_; ++r) binv_col_[r][r2] -= f * binv_col_[r][k];
      }
    }
    // Refresh basic values: xB = B^-1 b.
    for (std::size_t i = 0; i < m_; ++i) {
      double s = 0.0;
      for (std::size_t r = 0; r < m_; ++r) s += binv_col_[r][i] * b_[r];
      xB_[i] = s;
    }
  }

  void finish(LPSolution& out) {
    out.status = LPSolution::Status::optimal;
    out.iterations = iterations_;
    out.x.assign(n_struct_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      const int j = basis_[i];
      if (j < static_cast<int>(n_struct_)) out.x[j] = col_sign_[j] * xB_[i];
    }
    double obj = 0.0;
    for (std::size_t j = 0; j < n_struct_; ++j) obj += lp_.objective[j] * out.x[j];
    out.objective = obj;

    recompute_prices();
    out.row_duals.assign(m_, 0.0);
    for (std::size_t r = 0; r < m_; ++r)
      out.row_duals[r] = obj_sign_ * dual_sign_[r] * y_[r];

    double worst = 0.0;
    for (std::size_t r = 0; r < m_; ++r) {
      const LPRow& row = lp_.rows[r];
      double ax = 0.0;
      for (const auto& [var, coef] : row.coeffs) ax += coef * out.x[var];
      double viol = 0.0;
      if (row.rel == Rel::eq) viol = std::abs(ax - row.rhs);
      else if (row.rel == Rel::le) viol = std::max(0.0, ax - row.rhs);
      else viol = std::max(0.0, row.rhs - ax);
      worst = std::max(worst, viol);
    }
    for (std::size_t j = 0; j < n_struct_; ++j) {
      const VarKind kind = lp_.kinds.empty() ? VarKind::nonneg : lp_.kinds[j];
      if (kind == VarKind::nonneg) worst = std::max(worst, -out.x[j]);
      if (kind == VarKind::nonpos) worst = std::max(worst, out.x[j]);
    }
    out.primal_residual = worst;
  }
};

}  // namespace

LPSolution simplex_solve(const LinearProgram& lp, const SimplexOptions& opts) {
  Solver s(lp, opts);
  return s.run();
}

}  // namespace capot
