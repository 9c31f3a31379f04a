#pragma once

// Sparse bounded-variable linear programs in equality form
//
//   min c'x  s.t.  A x = b,  lower <= x <= upper
//
// and a bounded-variable revised primal simplex. The basis is held as a
// sparse LU factorization followed by a product-form eta file.
// Sign convention for duals: d_j = c_j - y'A_j, so a variable resting at its
// lower bound in an optimum has d_j >= 0 and one at its upper bound d_j <= 0.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

namespace etsa {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Triplet {
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;
};

struct LpProblem {
  std::size_t n_vars = 0;
  std::size_t n_eq = 0;
  std::vector<double> cost;
  std::vector<Triplet> eq_matrix;
  std::vector<double> eq_rhs;
  std::vector<double> lower;
  std::vector<double> upper;
  // Optional; only used by write_lp_file.
  std::vector<std::string> col_names;
  std::vector<std::string> row_names;

  void validate() const {
    if (cost.size() != n_vars || lower.size() != n_vars ||
        upper.size() != n_vars) {
      throw std::invalid_argument("LpProblem: per-variable vectors must have n_vars entries");
    }
    if (eq_rhs.size() != n_eq) {
      throw std::invalid_argument("LpProblem: eq_rhs must have n_eq entries");
    }
    for (const auto& t : eq_matrix) {
      if (t.row >= n_eq || t.col >= n_vars) {
        throw std::invalid_argument("LpProblem: triplet index out of range");
      }
      if (!std::isfinite(t.value)) {
        throw std::invalid_argument("LpProblem: non-finite matrix coefficient");
      }
    }
    for (std::size_t j = 0; j < n_vars; ++j) {
      if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] > upper[j]) {
        throw std::invalid_argument("LpProblem: lower > upper for variable " +
                                    std::to_string(j));
      }
      if (lower[j] == kInf || upper[j] == -kInf) {
        throw std::invalid_argument("LpProblem: empty bound range for variable " +
                                    std::to_string(j));
      }
      if (!std::isfinite(cost[j])) {
        throw std::invalid_argument("LpProblem: non-finite cost");
      }
    }
    for (double v : eq_rhs) {
      if (!std::isfinite(v)) throw std::invalid_argument("LpProblem: non-finite rhs");
    }
  }
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "Optimal";
    case LpStatus::Infeasible: return "Infeasible";
    case LpStatus::Unbounded: return "Unbounded";
    case LpStatus::IterationLimit: return "IterationLimit";
  }
  return "?";
}

enum class VarStatus : std::uint8_t { Basic, AtLower, AtUpper, Free };

enum class PivotRule { Dantzig, Bland };

struct SolveOptions {
  std::size_t max_iters = 500000;
  double feas_tol = 1e-9;        // primal feasibility in the ratio test
  double optimality_tol = 1e-9;  // pricing threshold on |d_j|
  double pivot_tol = 1e-9;       // smallest admissible |alpha| in the ratio test
  PivotRule pivot_rule = PivotRule::Dantzig;
  // Switch to Bland's rule after this many consecutive degenerate pivots;
  // revert on the next non-degenerate step.
  std::size_t bland_after = 50;
  // Pivots between LU refactorizations; 0 selects 100.
  std::size_t refactor_interval = 0;
  // Optional primal starting point. Columns strictly inside their bounds are
  // crashed into the basis first; if the resulting basic solution is feasible
  // phase 1 is skipped, otherwise the solve falls back to a cold start.
  std::vector<double> start_x;
};

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  double objective = 0.0;
  std::vector<double> x;  // primal, one per variable
  std::vector<double> y;  // equality duals, one per row
  std::vector<double> d;  // reduced costs, one per variable
  std::size_t iterations = 0;
  std::size_t phase1_iterations = 0;
  double work = 0.0;  // iterations * n_eq
  std::vector<VarStatus> basis;
  bool warm_started = false;
};

namespace detail {

class BoundedSimplex {
 public:
  BoundedSimplex(const LpProblem& lp, const SolveOptions& opts)
      : opts_(opts), m_(lp.n_eq), n_(lp.n_vars), total_(lp.n_vars + lp.n_eq) {
    build_columns(lp);
    lo_.assign(total_, 0.0);
    up_.assign(total_, kInf);
    cost_.assign(total_, 0.0);
    std::copy(lp.lower.begin(), lp.lower.end(), lo_.begin());
    std::copy(lp.upper.begin(), lp.upper.end(), up_.begin());
    std::copy(lp.cost.begin(), lp.cost.end(), orig_cost_.begin());
    b_ = lp.eq_rhs;
    refactor_every_ = opts_.refactor_interval ? opts_.refactor_interval : 100;
  }

  LpSolution run() {
    LpSolution sol;
    if (!opts_.start_x.empty()) {
      bool ok = false;
      try {
        ok = warm_basis();
      } catch (const std::runtime_error&) {
        ok = false;
      }
      if (ok) {
        sol.warm_started = true;
        return phase2(sol);
      }
      for (std::size_t i = 0; i < m_; ++i) up_[n_ + i] = kInf;
    }
    initial_basis();

    // Phase 1: minimise the sum of artificials.
    std::fill(cost_.begin(), cost_.end(), 0.0);
    for (std::size_t i = 0; i < m_; ++i) cost_[n_ + i] = 1.0;
    const Outcome p1 = iterate();
    sol.phase1_iterations = iterations_;
    if (p1 == Outcome::IterationLimit) return finish(sol, LpStatus::IterationLimit);

    double infeas = 0.0;
    double scale = 1.0;
    for (double v : b_) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < m_; ++i) infeas += x_[n_ + i];
    if (infeas > 1e-8 * scale) return finish(sol, LpStatus::Infeasible);

    // Artificials are pinned to zero for the rest of the solve.
    for (std::size_t i = 0; i < m_; ++i) {
      const std::size_t j = n_ + i;
      up_[j] = 0.0;
      if (pos_[j] < 0) {
        status_[j] = VarStatus::AtLower;
        x_[j] = 0.0;
      }
    }
    drive_out_artificials();
    return phase2(sol);
  }

 private:
  enum class Outcome { Optimal, Unbounded, IterationLimit };

  LpSolution phase2(LpSolution& sol) {
    std::fill(cost_.begin(), cost_.end(), 0.0);
    std::copy(orig_cost_.begin(), orig_cost_.end(), cost_.begin());
    const Outcome p2 = iterate();
    switch (p2) {
      case Outcome::Optimal: return finish(sol, LpStatus::Optimal);
      case Outcome::Unbounded: return finish(sol, LpStatus::Unbounded);
      case Outcome::IterationLimit: return finish(sol, LpStatus::IterationLimit);
    }
    return finish(sol, LpStatus::IterationLimit);
  }

  void build_columns(const LpProblem& lp) {
    orig_cost_.assign(n_, 0.0);
    std::vector<std::size_t> count(n_ + 1, 0);
    for (const auto& t : lp.eq_matrix) ++count[t.col + 1];
    for (std::size_t j = 0; j < n_; ++j) count[j + 1] += count[j];
    col_start_ = count;
    row_idx_.assign(lp.eq_matrix.size(), 0);
    val_.assign(lp.eq_matrix.size(), 0.0);
    std::vector<std::size_t> fill(col_start_.begin(), col_start_.end() - 1);
    for (const auto& t : lp.eq_matrix) {
      row_idx_[fill[t.col]] = t.row;
      val_[fill[t.col]] = t.value;
      ++fill[t.col];
    }
    // Merge duplicate (row, col) entries so that each column is a clean
    // sparse vector ordered by row.
    std::vector<std::size_t> new_start(n_ + 1, 0);
    std::vector<std::size_t> rows;
    std::vector<double> vals;
    rows.reserve(row_idx_.size());
    vals.reserve(val_.size());
    std::vector<std::pair<std::size_t, double>> buf;
    for (std::size_t j = 0; j < n_; ++j) {
      buf.clear();
      for (std::size_t k = col_start_[j]; k < col_start_[j + 1]; ++k) {
        buf.emplace_back(row_idx_[k], val_[k]);
      }
      std::sort(buf.begin(), buf.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      for (std::size_t k = 0; k < buf.size(); ++k) {
        if (!rows.empty() && rows.size() > new_start[j] && rows.back() == buf[k].first) {
          vals.back() += buf[k].second;
        } else {
          rows.push_back(buf[k].first);
          vals.push_back(buf[k].second);
        }
      }
      new_start[j + 1] = rows.size();
    }
    col_start_ = std::move(new_start);
    row_idx_ = std::move(rows);
    val_ = std::move(vals);
  }

  template <typename F>
  void for_each_entry(std::size_t j, F&& f) const {
    if (j < n_) {
      for (std::size_t k = col_start_[j]; k < col_start_[j + 1]; ++k) f(row_idx_[k], val_[k]);
    } else {
      f(j - n_, art_sign_[j - n_]);
    }
  }

  void initial_basis() {
    x_.assign(total_, 0.0);
    status_.assign(total_, VarStatus::AtLower);
    pos_.assign(total_, -1);
    head_.assign(m_, 0);
    art_sign_.assign(m_, 1.0);
    for (std::size_t j = 0; j < n_; ++j) {
      if (std::isfinite(lo_[j])) {
        status_[j] = VarStatus::AtLower;
        x_[j] = lo_[j];
      } else if (std::isfinite(up_[j])) {
        status_[j] = VarStatus::AtUpper;
        x_[j] = up_[j];
      } else {
        status_[j] = VarStatus::Free;
        x_[j] = 0.0;
      }
    }
    std::vector<double> r = b_;
    for (std::size_t j = 0; j < n_; ++j) {
      if (x_[j] == 0.0) continue;
      for_each_entry(j, [&](std::size_t i, double v) { r[i] -= v * x_[j]; });
    }
    for (std::size_t i = 0; i < m_; ++i) {
      art_sign_[i] = r[i] >= 0.0 ? 1.0 : -1.0;
      const std::size_t j = n_ + i;
      x_[j] = std::abs(r[i]);
      status_[j] = VarStatus::Basic;
      pos_[j] = static_cast<std::ptrdiff_t>(i);
      head_[i] = j;
    }
    factorize();
  }

  // Crash basis from opts_.start_x. Returns false when the start point does
  // not yield a feasible basic solution.
  bool warm_basis() {
    if (opts_.start_x.size() != n_) return false;
    x_.assign(total_, 0.0);
    status_.assign(total_, VarStatus::AtLower);
    pos_.assign(total_, -1);
    head_.assign(m_, 0);
    art_sign_.assign(m_, 1.0);
    for (std::size_t i = 0; i < m_; ++i) {
      const std::size_t j = n_ + i;
      status_[j] = VarStatus::Basic;
      pos_[j] = static_cast<std::ptrdiff_t>(i);
      head_[i] = j;
      up_[j] = 0.0;
    }
    factorize();
    std::vector<std::size_t> interior;
    for (std::size_t j = 0; j < n_; ++j) {
      const double v = opts_.start_x[j];
      const double tl = 1e-9 * std::max(1.0, std::abs(lo_[j]));
      const double tu = 1e-9 * std::max(1.0, std::abs(up_[j]));
      if (std::isfinite(lo_[j]) && std::abs(v - lo_[j]) <= tl) {
        x_[j] = lo_[j];
        status_[j] = VarStatus::AtLower;
      } else if (std::isfinite(up_[j]) && std::abs(v - up_[j]) <= tu) {
        x_[j] = up_[j];
        status_[j] = VarStatus::AtUpper;
      } else {
        x_[j] = v;
        status_[j] = VarStatus::Free;
        interior.push_back(j);
      }
    }
    std::vector<double> alpha;
    for (std::size_t j : interior) {
      ftran(j, alpha);
      std::ptrdiff_t pick = -1;
      double best = 1e-9;
      for (std::size_t p = 0; p < m_; ++p) {
        if (head_[p] < n_) continue;
        if (std::abs(alpha[p]) > best) {
          best = std::abs(alpha[p]);
          pick = static_cast<std::ptrdiff_t>(p);
        }
      }
      if (pick < 0) return false;  // start point is not a vertex
      const auto p = static_cast<std::size_t>(pick);
      const std::size_t out = head_[p];
      x_[out] = 0.0;
      status_[out] = VarStatus::AtLower;
      pos_[out] = -1;
      head_[p] = j;
      pos_[j] = static_cast<std::ptrdiff_t>(p);
      status_[j] = VarStatus::Basic;
      push_eta(p, alpha);
      if (etas_.size() >= refactor_every_) factorize();
    }
    refactor();
    for (std::size_t i = 0; i < m_; ++i) {
      const std::size_t j = n_ + i;
      if (pos_[j] >= 0 && std::abs(x_[j]) > 1e-7) return false;
    }
    drive_out_artificials();
    for (std::size_t p = 0; p < m_; ++p) {
      const std::size_t j = head_[p];
      const double tl = 1e-7 * std::max(1.0, std::abs(lo_[j]));
      const double tu = 1e-7 * std::max(1.0, std::abs(up_[j]));
      if (x_[j] < lo_[j] - tl || x_[j] > up_[j] + tu) return false;
    }
    return true;
  }

  struct Eta {
    std::size_t p = 0;
    double pivot = 1.0;
    std::vector<std::size_t> idx;
    std::vector<double> val;
  };

  // out = B^-1 r, in place.
  void solve_basis(std::vector<double>& r) const {
    Eigen::Map<Eigen::VectorXd> v(r.data(), static_cast<Eigen::Index>(m_));
    Eigen::VectorXd w = lu_.solve(v);
    v = w;
    for (const auto& e : etas_) {
      const double xp = r[e.p] / e.pivot;
      if (xp != 0.0) {
        for (std::size_t k = 0; k < e.idx.size(); ++k) r[e.idx[k]] -= e.val[k] * xp;
      }
      r[e.p] = xp;
    }
  }

  // out' = r' B^-1, in place.
  void solve_basis_transposed(std::vector<double>& r) const {
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double s = r[it->p];
      for (std::size_t k = 0; k < it->idx.size(); ++k) s -= r[it->idx[k]] * it->val[k];
      r[it->p] = s / it->pivot;
    }
    Eigen::Map<Eigen::VectorXd> v(r.data(), static_cast<Eigen::Index>(m_));
    Eigen::VectorXd w = lu_.transpose().solve(v);
    v = w;
  }

  // out = B^-1 A_j
  void ftran(std::size_t j, std::vector<double>& out) const {
    out.assign(m_, 0.0);
    for_each_entry(j, [&](std::size_t k, double v) { out[k] += v; });
    solve_basis(out);
  }

  void compute_duals(std::vector<double>& y) const {
    y.assign(m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) y[i] = cost_[head_[i]];
    solve_basis_transposed(y);
  }

  double reduced_cost(std::size_t j, const std::vector<double>& y) const {
    double d = cost_[j];
    for_each_entry(j, [&](std::size_t i, double v) { d -= y[i] * v; });
    return d;
  }

  void recompute_basic_values() {
    std::vector<double> r = b_;
    for (std::size_t j = 0; j < total_; ++j) {
      if (pos_[j] >= 0 || x_[j] == 0.0) continue;
      for_each_entry(j, [&](std::size_t i, double v) { r[i] -= v * x_[j]; });
    }
    solve_basis(r);
    for (std::size_t i = 0; i < m_; ++i) x_[head_[i]] = r[i];
  }

  // Sparse LU of the current basis matrix; clears the eta file.
  void factorize() {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(3 * m_);
    for (std::size_t p = 0; p < m_; ++p) {
      for_each_entry(head_[p], [&](std::size_t i, double v) {
        trips.emplace_back(static_cast<int>(i), static_cast<int>(p), v);
      });
    }
    Eigen::SparseMatrix<double> mat(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(m_));
    mat.setFromTriplets(trips.begin(), trips.end());
    lu_.compute(mat);
    if (lu_.info() != Eigen::Success) throw std::runtime_error("simplex: singular basis at refactorization");
    etas_.clear();
  }

  void refactor() {
    factorize();
    recompute_basic_values();
  }

  void push_eta(std::size_t p, const std::vector<double>& alpha) {
    Eta e;
    e.p = p;
    e.pivot = alpha[p];
    for (std::size_t i = 0; i < m_; ++i) {
      if (i != p && alpha[i] != 0.0) {
        e.idx.push_back(i);
        e.val.push_back(alpha[i]);
      }
    }
    etas_.push_back(std::move(e));
  }

  void replace_basic(std::size_t p, std::size_t entering, const std::vector<double>& alpha) {
    const std::size_t leaving = head_[p];
    pos_[leaving] = -1;
    head_[p] = entering;
    pos_[entering] = static_cast<std::ptrdiff_t>(p);
    status_[entering] = VarStatus::Basic;
    push_eta(p, alpha);
    if (etas_.size() >= refactor_every_) refactor();
  }

  bool fixed(std::size_t j) const { return lo_[j] == up_[j]; }

  Outcome iterate() {
    std::vector<double> y;
    std::vector<double> alpha;
    std::size_t degenerate_run = 0;
    bool bland = opts_.pivot_rule == PivotRule::Bland;
    while (true) {
      if (iterations_ >= opts_.max_iters) return Outcome::IterationLimit;
      compute_duals(y);

      // Pricing.
      std::ptrdiff_t enter = -1;
      double best = 0.0;
      double enter_d = 0.0;
      for (std::size_t j = 0; j < total_; ++j) {
        if (pos_[j] >= 0 || fixed(j)) continue;
        const double d = reduced_cost(j, y);
        double score = 0.0;
        switch (status_[j]) {
          case VarStatus::AtLower: score = d < -opts_.optimality_tol ? -d : 0.0; break;
          case VarStatus::AtUpper: score = d > opts_.optimality_tol ? d : 0.0; break;
          case VarStatus::Free: score = std::abs(d) > opts_.optimality_tol ? std::abs(d) : 0.0; break;
          case VarStatus::Basic: break;
        }
        if (score <= 0.0) continue;
        if (bland) {
          enter = static_cast<std::ptrdiff_t>(j);
          enter_d = d;
          break;
        }
        if (score > best) {
          best = score;
          enter = static_cast<std::ptrdiff_t>(j);
          enter_d = d;
        }
      }
      if (enter < 0) return Outcome::Optimal;
      const auto q = static_cast<std::size_t>(enter);
      const double dir = enter_d < 0.0 ? 1.0 : -1.0;

      ftran(q, alpha);

      // Harris two-pass ratio test. Basic k moves by -dir * alpha_k * t.
      double t_relaxed = kInf;
      for (std::size_t k = 0; k < m_; ++k) {
        const double a = alpha[k];
        if (std::abs(a) <= opts_.pivot_tol) continue;
        const std::size_t j = head_[k];
        const double rate = -dir * a;
        double lim = kInf;
        if (rate < 0.0 && std::isfinite(lo_[j])) {
          lim = (x_[j] - lo_[j] + opts_.feas_tol) / -rate;
        } else if (rate > 0.0 && std::isfinite(up_[j])) {
          lim = (up_[j] + opts_.feas_tol - x_[j]) / rate;
        }
        t_relaxed = std::min(t_relaxed, lim);
      }
      const double range = up_[q] - lo_[q];
      std::ptrdiff_t leave = -1;
      double t = kInf;
      if (std::isfinite(t_relaxed)) {
        double best_abs = -1.0;
        std::size_t best_col = total_;
        for (std::size_t k = 0; k < m_; ++k) {
          const double a = alpha[k];
          if (std::abs(a) <= opts_.pivot_tol) continue;
          const std::size_t j = head_[k];
          const double rate = -dir * a;
          double lim = kInf;
          if (rate < 0.0 && std::isfinite(lo_[j])) {
            lim = (x_[j] - lo_[j]) / -rate;
          } else if (rate > 0.0 && std::isfinite(up_[j])) {
            lim = (up_[j] - x_[j]) / rate;
          }
          if (lim > t_relaxed) continue;
          const bool take = bland ? j < best_col : std::abs(a) > best_abs;
          if (take) {
            best_abs = std::abs(a);
            best_col = j;
            leave = static_cast<std::ptrdiff_t>(k);
            t = std::max(0.0, lim);
          }
        }
      }

      ++iterations_;
      if (std::isfinite(range) && range <= t) {
        // Bound flip of the entering variable.
        const double step = range;
        x_[q] = dir > 0.0 ? up_[q] : lo_[q];
        status_[q] = dir > 0.0 ? VarStatus::AtUpper : VarStatus::AtLower;
        for (std::size_t k = 0; k < m_; ++k) x_[head_[k]] -= dir * step * alpha[k];
        degenerate_run = 0;
        bland = opts_.pivot_rule == PivotRule::Bland;
        continue;
      }
      if (leave < 0) return Outcome::Unbounded;

      const auto p = static_cast<std::size_t>(leave);
      for (std::size_t k = 0; k < m_; ++k) x_[head_[k]] -= dir * t * alpha[k];
      x_[q] += dir * t;
      const std::size_t out = head_[p];
      const double rate = -dir * alpha[p];
      if (rate < 0.0) {
        x_[out] = lo_[out];
        status_[out] = VarStatus::AtLower;
      } else {
        x_[out] = up_[out];
        status_[out] = VarStatus::AtUpper;
      }
      if (!std::isfinite(x_[out])) {
        x_[out] = 0.0;
        status_[out] = VarStatus::Free;
      }
      replace_basic(p, q, alpha);

      if (t <= opts_.feas_tol) {
        if (++degenerate_run >= opts_.bland_after) bland = true;
      } else {
        degenerate_run = 0;
        bland = opts_.pivot_rule == PivotRule::Bland;
      }
    }
  }

  // Replace basic artificials (all at zero after phase 1) by structural
  // columns wherever the basis allows it. Rows left with an artificial are
  // linearly dependent on the others.
  void drive_out_artificials() {
    std::vector<double> alpha;
    std::vector<double> row;
    for (std::size_t p = 0; p < m_; ++p) {
      if (head_[p] < n_) continue;
      row.assign(m_, 0.0);
      row[p] = 1.0;
      solve_basis_transposed(row);
      std::ptrdiff_t pick = -1;
      double best = 1e-7;
      for (std::size_t j = 0; j < n_; ++j) {
        if (pos_[j] >= 0) continue;
        double a = 0.0;
        for_each_entry(j, [&](std::size_t i, double v) { a += row[i] * v; });
        if (std::abs(a) > best) {
          best = std::abs(a);
          pick = static_cast<std::ptrdiff_t>(j);
        }
      }
      if (pick < 0) continue;
      const auto q = static_cast<std::size_t>(pick);
      ftran(q, alpha);
      const std::size_t out = head_[p];
      x_[out] = 0.0;
      status_[out] = VarStatus::AtLower;
      replace_basic(p, q, alpha);
    }
    refactor();
  }

  LpSolution& finish(LpSolution& sol, LpStatus status) {
    if (status == LpStatus::Optimal) refactor();
    std::vector<double> y;
    compute_duals(y);
    sol.status = status;
    sol.x.assign(x_.begin(), x_.begin() + static_cast<std::ptrdiff_t>(n_));
    sol.y = y;
    sol.d.assign(n_, 0.0);
    sol.objective = 0.0;
    for (std::size_t j = 0; j < n_; ++j) {
      sol.d[j] = orig_cost_[j];
      for_each_entry(j, [&](std::size_t i, double v) { sol.d[j] -= y[i] * v; });
      sol.objective += orig_cost_[j] * sol.x[j];
    }
    sol.basis.assign(status_.begin(), status_.begin() + static_cast<std::ptrdiff_t>(n_));
    sol.iterations = iterations_;
    sol.work = static_cast<double>(iterations_) * static_cast<double>(m_);
    return sol;
  }

  SolveOptions opts_;
  std::size_t m_;
  std::size_t n_;
  std::size_t total_;
  std::vector<std::size_t> col_start_;
  std::vector<std::size_t> row_idx_;
  std::vector<double> val_;
  std::vector<double> art_sign_;
  std::vector<double> lo_, up_, cost_, orig_cost_, b_;
  std::vector<double> x_;
  std::vector<VarStatus> status_;
  std::vector<std::size_t> head_;
  std::vector<std::ptrdiff_t> pos_;
  mutable Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
  std::vector<Eta> etas_;
  std::size_t iterations_ = 0;
  std::size_t refactor_every_ = 100;
};

}  // namespace detail

/// Solves `lp` with the bounded-variable revised simplex. Deterministic for
/// identical inputs and options. Throws std::invalid_argument when the
/// problem is malformed; all solver outcomes are reported through `status`.
inline LpSolution solve(const LpProblem& lp, const SolveOptions& opts = {}) {
  lp.validate();
  if (lp.n_eq == 0) {
    // Pure bound problem: every variable sits at its cheaper bound.
    LpSolution sol;
    sol.status = LpStatus::Optimal;
    sol.x.assign(lp.n_vars, 0.0);
    sol.d = lp.cost;
    sol.basis.assign(lp.n_vars, VarStatus::AtLower);
    for (std::size_t j = 0; j < lp.n_vars; ++j) {
      const double c = lp.cost[j];
      double v = c > 0 ? lp.lower[j] : (c < 0 ? lp.upper[j] : (std::isfinite(lp.lower[j]) ? lp.lower[j] : (std::isfinite(lp.upper[j]) ? lp.upper[j] : 0.0)));
      if (!std::isfinite(v)) {
        sol.status = LpStatus::Unbounded;
        v = 0.0;
      }
      sol.x[j] = v;
      sol.basis[j] = v == lp.upper[j] && v != lp.lower[j] ? VarStatus::AtUpper : VarStatus::AtLower;
      sol.objective += c * v;
    }
    return sol;
  }
  detail::BoundedSimplex simplex(lp, opts);
  return simplex.run();
}

struct KktReport {
  double primal_infeasibility = 0.0;  // max of bound violation and |Ax - b|
  double dual_infeasibility = 0.0;    // wrong-signed reduced cost at an active bound
  double complementarity = 0.0;       // max lambda * distance to its bound
  double duality_gap = 0.0;           // |c'x - dual objective|
  double stationarity = 0.0;          // |d_reported - (c - A'y)|
  double objective_scale = 1.0;
  double rhs_scale = 1.0;
  double cost_scale = 1.0;
  bool passed = false;
};

/// KKT residuals of `sol` for `lp`. Reduced costs are recomputed from `sol.y`.
/// The pass test scales each residual: primal by 1 + max(|b|, |x|), dual by
/// 1 + max|c|, complementarity and gap by 1 + |c'x|.
inline KktReport verify_kkt(const LpProblem& lp, const LpSolution& sol, double tol) {
  KktReport rep;
  if (sol.x.size() != lp.n_vars || sol.y.size() != lp.n_eq) {
    rep.primal_infeasibility = kInf;
    return rep;
  }
  std::vector<double> ax(lp.n_eq, 0.0);
  std::vector<double> d = lp.cost;
  for (const auto& t : lp.eq_matrix) {
    ax[t.row] += t.value * sol.x[t.col];
    d[t.col] -= t.value * sol.y[t.row];
  }
  double primal_obj = 0.0;
  double dual_obj = 0.0;
  double xmax = 0.0;
  for (std::size_t i = 0; i < lp.n_eq; ++i) {
    rep.primal_infeasibility = std::max(rep.primal_infeasibility, std::abs(ax[i] - lp.eq_rhs[i]));
    rep.rhs_scale = std::max(rep.rhs_scale, std::abs(lp.eq_rhs[i]));
    dual_obj += lp.eq_rhs[i] * sol.y[i];
  }
  for (std::size_t j = 0; j < lp.n_vars; ++j) {
    const double x = sol.x[j];
    const double lo = lp.lower[j];
    const double up = lp.upper[j];
    xmax = std::max(xmax, std::abs(x));
    rep.cost_scale = std::max(rep.cost_scale, std::abs(lp.cost[j]));
    primal_obj += lp.cost[j] * x;
    rep.primal_infeasibility = std::max({rep.primal_infeasibility, lo - x, x - up});
    if (j < sol.d.size()) rep.stationarity = std::max(rep.stationarity, std::abs(sol.d[j] - d[j]));
    const double lam_lo = std::max(d[j], 0.0);
    const double lam_up = std::max(-d[j], 0.0);
    if (lam_lo > 0.0) {
      if (std::isfinite(lo)) {
        dual_obj += lam_lo * lo;
        rep.complementarity = std::max(rep.complementarity, lam_lo * std::max(0.0, x - lo));
      } else {
        rep.dual_infeasibility = std::max(rep.dual_infeasibility, lam_lo);
      }
    }
    if (lam_up > 0.0) {
      if (std::isfinite(up)) {
        dual_obj -= lam_up * up;
        rep.complementarity = std::max(rep.complementarity, lam_up * std::max(0.0, up - x));
      } else {
        rep.dual_infeasibility = std::max(rep.dual_infeasibility, lam_up);
      }
    }
  }
  rep.duality_gap = std::abs(primal_obj - dual_obj);
  rep.objective_scale = 1.0 + std::abs(primal_obj);
  rep.rhs_scale = 1.0 + std::max(rep.rhs_scale, xmax);
  rep.cost_scale = 1.0 + rep.cost_scale;
  rep.passed = rep.primal_infeasibility <= tol * rep.rhs_scale &&
               rep.dual_infeasibility <= tol * rep.cost_scale &&
               rep.complementarity <= tol * rep.objective_scale &&
               rep.duality_gap <= tol * rep.objective_scale &&
               rep.stationarity <= tol * rep.cost_scale;
  return rep;
}

namespace detail {
inline std::string lp_number(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}
}  // namespace detail

/// Writes `lp` in CPLEX LP text layout for cross-checking with external solvers.
inline void write_lp_file(std::ostream& os, const LpProblem& lp) {
  using detail::lp_number;
  auto col = [&](std::size_t j) {
    return j < lp.col_names.size() ? lp.col_names[j] : "x" + std::to_string(j);
  };
  auto row = [&](std::size_t i) {
    return i < lp.row_names.size() ? lp.row_names[i] : "c" + std::to_string(i);
  };
  os << "\\ etsa export\nMinimize\n obj:";
  bool any = false;
  for (std::size_t j = 0; j < lp.n_vars; ++j) {
    if (lp.cost[j] == 0.0) continue;
    os << (lp.cost[j] < 0 ? " - " : (any ? " + " : " ")) << lp_number(std::abs(lp.cost[j])) << ' ' << col(j);
    any = true;
  }
  if (!any) os << " 0 " << col(0);
  os << "\nSubject To\n";
  std::vector<std::vector<std::pair<std::size_t, double>>> rows(lp.n_eq);
  for (const auto& t : lp.eq_matrix) rows[t.row].emplace_back(t.col, t.value);
  for (std::size_t i = 0; i < lp.n_eq; ++i) {
    os << ' ' << row(i) << ':';
    bool first = true;
    for (const auto& [j, v] : rows[i]) {
      os << (v < 0 ? " - " : (first ? " " : " + ")) << lp_number(std::abs(v)) << ' ' << col(j);
      first = false;
    }
    if (first) os << " 0 " << col(0);
    os << " = " << lp_number(lp.eq_rhs[i]) << '\n';
  }
  os << "Bounds\n";
  for (std::size_t j = 0; j < lp.n_vars; ++j) {
    const double lo = lp.lower[j];
    const double up = lp.upper[j];
    if (lo == up) {
      os << ' ' << col(j) << " = " << lp_number(lo) << '\n';
    } else if (!std::isfinite(lo) && !std::isfinite(up)) {
      os << ' ' << col(j) << " free\n";
    } else {
      os << ' ' << (std::isfinite(lo) ? lp_number(lo) : "-inf") << " <= " << col(j) << " <= "
         << (std::isfinite(up) ? lp_number(up) : "+inf") << '\n';
    }
  }
  os << "End\n";
}

}  // namespace etsa
