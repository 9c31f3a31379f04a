#pragma once

// The storage/VRE/thermal co-scheduling LP of one submodel: a chronological
// sequence of weighted representative periods anchored at the minimum state
// of charge on both ends.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "etsa/data.hpp"
#include "etsa/lp.hpp"

namespace etsa {

/// Per-period decision variables, in column order.
enum class Symbol : std::size_t { Thermal = 0, Vre = 1, Nsp = 2, Charge = 3, Discharge = 4, Soc = 5 };
inline constexpr std::size_t kSymbols = 6;

inline const char* symbol_name(Symbol s) {
  static constexpr std::array<const char*, kSymbols> names{"p_t", "p_v", "p_ns", "p_c", "p_d", "e"};
  return names[static_cast<std::size_t>(s)];
}

/// Column and row layout of a built submodel LP. Columns are period-major
/// (6 per period); rows are balance_0..R-1, soc_0..R-1, soc_final.
struct VarMap {
  std::size_t periods = 0;

  std::size_t col(std::size_t r, Symbol s) const { return kSymbols * r + static_cast<std::size_t>(s); }
  std::size_t balance_row(std::size_t r) const { return r; }
  std::size_t soc_row(std::size_t r) const { return periods + r; }
  std::size_t soc_final_row() const { return 2 * periods; }
  std::size_t n_vars() const { return kSymbols * periods; }
  std::size_t n_eq() const { return 2 * periods + 1; }
};

struct PeriodPrimal {
  double p_t = 0.0;   // MW
  double p_v = 0.0;   // MW
  double p_ns = 0.0;  // MW
  double p_c = 0.0;   // MW
  double p_d = 0.0;   // MW
  double e = 0.0;     // MWh

  double get(Symbol s) const {
    switch (s) {
      case Symbol::Thermal: return p_t;
      case Symbol::Vre: return p_v;
      case Symbol::Nsp: return p_ns;
      case Symbol::Charge: return p_c;
      case Symbol::Discharge: return p_d;
      case Symbol::Soc: return e;
    }
    return 0.0;
  }
};

struct SubmodelLp {
  LpProblem lp;
  VarMap map;
  std::vector<double> weights;  // W_r
};

/// Lower and upper bound of symbol `s` in a period with average demand `d`
/// and average capacity factor `cf`.
inline std::pair<double, double> symbol_bounds(const CaseConfig& c, Symbol s, double d, double cf) {
  switch (s) {
    case Symbol::Thermal: return {0.0, c.thermal_capacity};
    case Symbol::Vre: return {0.0, c.vre_capacity * cf};
    case Symbol::Nsp: return {0.0, d};
    case Symbol::Charge: return {0.0, c.storage_pc_max};
    case Symbol::Discharge: return {0.0, c.storage_pd_max};
    case Symbol::Soc: return {c.storage_emin, c.storage_emax};
  }
  return {0.0, 0.0};
}

/// Builds the submodel LP over `reps`. Costs are weighted by W_r; the first
/// period starts from storage_emin and the last period must return to it.
inline SubmodelLp build_lp(const CaseConfig& c, const RepPeriodSeries& reps, bool with_names = false) {
  c.validate();
  const std::size_t R = reps.size();
  if (R == 0) throw std::invalid_argument("build_lp: no representative periods");
  if (reps.avg_cf.size() != 1) throw std::invalid_argument("build_lp: exactly one VRE series is supported");
  if (reps.avg_demand.size() != R || reps.avg_cf[0].size() != R) {
    throw std::invalid_argument("build_lp: inconsistent representative series lengths");
  }
  SubmodelLp out;
  VarMap& map = out.map;
  map.periods = R;
  LpProblem& lp = out.lp;
  lp.n_vars = map.n_vars();
  lp.n_eq = map.n_eq();
  lp.cost.assign(lp.n_vars, 0.0);
  lp.lower.assign(lp.n_vars, 0.0);
  lp.upper.assign(lp.n_vars, 0.0);
  lp.eq_rhs.assign(lp.n_eq, 0.0);
  lp.eq_matrix.reserve(8 * R + 1);

  for (std::size_t r = 0; r < R; ++r) {
    if (reps.weights[r] == 0) throw std::invalid_argument("build_lp: zero-weight period " + std::to_string(r));
    const double w = static_cast<double>(reps.weights[r]);
    out.weights.push_back(w);
    const double d = reps.avg_demand[r];
    const double cf = reps.avg_cf[0][r];
    for (std::size_t s = 0; s < kSymbols; ++s) {
      const auto [lo, up] = symbol_bounds(c, static_cast<Symbol>(s), d, cf);
      lp.lower[map.col(r, static_cast<Symbol>(s))] = lo;
      lp.upper[map.col(r, static_cast<Symbol>(s))] = up;
    }
    lp.cost[map.col(r, Symbol::Thermal)] = w * c.thermal_cost;
    lp.cost[map.col(r, Symbol::Vre)] = w * c.vre_cost;
    lp.cost[map.col(r, Symbol::Nsp)] = w * c.nse_cost;
    lp.cost[map.col(r, Symbol::Discharge)] = w * c.discharge_cost;

    const std::size_t bal = map.balance_row(r);
    lp.eq_matrix.push_back({bal, map.col(r, Symbol::Thermal), 1.0});
    lp.eq_matrix.push_back({bal, map.col(r, Symbol::Vre), 1.0});
    lp.eq_matrix.push_back({bal, map.col(r, Symbol::Nsp), 1.0});
    lp.eq_matrix.push_back({bal, map.col(r, Symbol::Charge), -1.0});
    lp.eq_matrix.push_back({bal, map.col(r, Symbol::Discharge), 1.0});
    lp.eq_rhs[bal] = d;

    // e_r - e_{r-1} - W (eta_c p_c - p_d / eta_d) = 0, with e_{-1} = E_min.
    const std::size_t soc = map.soc_row(r);
    lp.eq_matrix.push_back({soc, map.col(r, Symbol::Soc), 1.0});
    if (r > 0) lp.eq_matrix.push_back({soc, map.col(r - 1, Symbol::Soc), -1.0});
    lp.eq_matrix.push_back({soc, map.col(r, Symbol::Charge), -w * c.eta_c});
    lp.eq_matrix.push_back({soc, map.col(r, Symbol::Discharge), w / c.eta_d});
    lp.eq_rhs[soc] = r == 0 ? c.storage_emin : 0.0;
  }
  lp.eq_matrix.push_back({map.soc_final_row(), map.col(R - 1, Symbol::Soc), 1.0});
  lp.eq_rhs[map.soc_final_row()] = c.storage_emin;

  if (with_names) {
    lp.col_names.resize(lp.n_vars);
    lp.row_names.resize(lp.n_eq);
    for (std::size_t r = 0; r < R; ++r) {
      for (std::size_t s = 0; s < kSymbols; ++s) {
        lp.col_names[map.col(r, static_cast<Symbol>(s))] = std::string(symbol_name(static_cast<Symbol>(s))) + "_" + std::to_string(r);
      }
      lp.row_names[map.balance_row(r)] = "balance_" + std::to_string(r);
      lp.row_names[map.soc_row(r)] = (r == 0 ? "soc_initial_" : "soc_") + std::to_string(r);
    }
    lp.row_names[map.soc_final_row()] = "soc_final";
  }
  return out;
}

/// How alternative optima are resolved. EarliestEmpty selects, among all
/// cost-optimal schedules, one minimising sum_r W_r e_r (energy is stored as
/// late and released as early as the optimum allows), then recovers the duals
/// of the original LP at that vertex.
enum class TieBreak { None, EarliestEmpty };

struct ModelSolveOptions {
  SolveOptions lp;
  TieBreak tie_break = TieBreak::EarliestEmpty;
};

/// Solves a built submodel. The returned solution refers to `m.lp`; its
/// iteration count and work cover every stage of the solve.
inline LpSolution solve_model(const SubmodelLp& m, const ModelSolveOptions& opts = {}) {
  LpSolution first = solve(m.lp, opts.lp);
  if (opts.tie_break == TieBreak::None || first.status != LpStatus::Optimal) return first;

  // Stage 2: minimise stored energy on the optimal face. Columns with a
  // nonzero reduced cost are held at their current bound, which by
  // complementary slackness describes the set of optimal schedules.
  const LpProblem& lp = m.lp;
  LpProblem face = lp;
  face.col_names.clear();
  face.row_names.clear();
  std::fill(face.cost.begin(), face.cost.end(), 0.0);
  for (std::size_t r = 0; r < m.map.periods; ++r) face.cost[m.map.col(r, Symbol::Soc)] = m.weights[r];
  for (std::size_t j = 0; j < lp.n_vars; ++j) {
    if (std::abs(first.d[j]) > opts.lp.optimality_tol * std::max(1.0, std::abs(lp.cost[j]))) {
      face.lower[j] = face.upper[j] = first.x[j];
    }
  }
  SolveOptions o2 = opts.lp;
  o2.start_x = first.x;
  const LpSolution second = solve(face, o2);

  std::size_t iters = first.iterations + second.iterations;
  if (second.status != LpStatus::Optimal) {
    first.iterations = iters;
    first.work = static_cast<double>(iters) * static_cast<double>(lp.n_eq);
    return first;
  }
  // Stage 3: duals of the original LP at the selected vertex.
  SolveOptions o3 = opts.lp;
  o3.start_x = second.x;
  LpSolution third = solve(lp, o3);
  if (third.status != LpStatus::Optimal) {
    first.iterations = iters + third.iterations;
    first.work = static_cast<double>(first.iterations) * static_cast<double>(lp.n_eq);
    return first;
  }
  third.iterations += iters;
  third.phase1_iterations = first.phase1_iterations;
  third.work = static_cast<double>(third.iterations) * static_cast<double>(lp.n_eq);
  return third;
}

class NotOptimalError : public std::runtime_error {
 public:
  NotOptimalError(const std::string& what, std::size_t index, LpStatus status)
      : std::runtime_error(what), index_(index), status_(status) {}
  std::size_t index() const { return index_; }
  LpStatus status() const { return status_; }

 private:
  std::size_t index_;
  LpStatus status_;
};

/// Named per-period values of an optimal submodel solution. Throws if the
/// solution is not optimal or a balance row is violated beyond `tol`.
inline std::vector<PeriodPrimal> extract_primal(const LpSolution& sol, const VarMap& map,
                                                const RepPeriodSeries& reps, double tol = 1e-6) {
  if (sol.status != LpStatus::Optimal) {
    throw NotOptimalError(std::string("extract_primal: solution status ") + to_string(sol.status), 0, sol.status);
  }
  std::vector<PeriodPrimal> out(map.periods);
  for (std::size_t r = 0; r < map.periods; ++r) {
    auto& p = out[r];
    p.p_t = sol.x[map.col(r, Symbol::Thermal)];
    p.p_v = sol.x[map.col(r, Symbol::Vre)];
    p.p_ns = sol.x[map.col(r, Symbol::Nsp)];
    p.p_c = sol.x[map.col(r, Symbol::Charge)];
    p.p_d = sol.x[map.col(r, Symbol::Discharge)];
    p.e = sol.x[map.col(r, Symbol::Soc)];
    const double residual = p.p_t + p.p_v + p.p_ns + p.p_d - p.p_c - reps.avg_demand[r];
    if (std::abs(residual) > tol * std::max(1.0, reps.avg_demand[r])) {
      throw std::runtime_error("extract_primal: balance residual " + std::to_string(residual) + " in period " +
                               std::to_string(r));
    }
  }
  return out;
}

/// Z = sum of submodel objectives, in index order.
inline double total_objective(std::span<const LpSolution> submodels) {
  double z = 0.0;
  for (std::size_t i = 0; i < submodels.size(); ++i) {
    if (submodels[i].status != LpStatus::Optimal) {
      throw NotOptimalError("total_objective: submodel " + std::to_string(i) + " is " +
                                to_string(submodels[i].status),
                            i, submodels[i].status);
    }
    z += submodels[i].objective;
  }
  return z;
}

/// Energy totals per technology (MWh) and the operating cost they imply.
struct TechTotals {
  double ofv = 0.0;
  double vre = 0.0;
  double thermal = 0.0;
  double nsp = 0.0;
  double charge = 0.0;
  double discharge = 0.0;

  TechTotals& operator+=(const TechTotals& o) {
    ofv += o.ofv;
    vre += o.vre;
    thermal += o.thermal;
    nsp += o.nsp;
    charge += o.charge;
    discharge += o.discharge;
    return *this;
  }
};

/// sum_r W_r * value_r per technology; ofv is left to the caller.
inline TechTotals technology_totals(std::span<const PeriodPrimal> primal, std::span<const std::size_t> weights) {
  TechTotals t;
  for (std::size_t r = 0; r < primal.size(); ++r) {
    const double w = static_cast<double>(weights[r]);
    t.vre += w * primal[r].p_v;
    t.thermal += w * primal[r].p_t;
    t.nsp += w * primal[r].p_ns;
    t.charge += w * primal[r].p_c;
    t.discharge += w * primal[r].p_d;
  }
  return t;
}

}  // namespace etsa
