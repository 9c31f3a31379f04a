#pragma once

// Exact temporal aggregation: split the horizon where the storage is empty,
// merge periods with equal signatures, solve the resulting submodels in
// parallel and compare them with the full-scale solution.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "etsa/acs.hpp"
#include "etsa/data.hpp"
#include "etsa/lp.hpp"
#include "etsa/model.hpp"
#include "etsa/parallel.hpp"
#include "etsa/work.hpp"

namespace etsa {

enum class SubmodelKind { Unlinked, Linked };

inline const char* to_string(SubmodelKind k) { return k == SubmodelKind::Unlinked ? "unlinked" : "linked"; }

struct Submodel {
  SubmodelKind kind = SubmodelKind::Linked;
  std::vector<RepPeriod> periods;

  std::size_t first_hour() const {
    std::size_t h = static_cast<std::size_t>(-1);
    for (const auto& p : periods)
      for (const auto& r : p.sources) h = std::min(h, r.begin);
    return h;
  }
  std::size_t hours() const {
    std::size_t n = 0;
    for (const auto& p : periods) n += p.weight();
    return n;
  }
  friend bool operator==(const Submodel&, const Submodel&) = default;
};

/// Ordered submodels whose representative periods cover the horizon.
struct Partition {
  std::vector<Submodel> submodels;

  std::size_t periods_total() const {
    std::size_t n = 0;
    for (const auto& s : submodels) n += s.periods.size();
    return n;
  }
  std::size_t hours() const {
    std::size_t n = 0;
    for (const auto& s : submodels) n += s.hours();
    return n;
  }

  /// Throws std::invalid_argument on gaps, overlaps, empty periods, linked
  /// periods that are not a single contiguous range in chronological order,
  /// or unlinked submodels with more than one period.
  void validate(std::size_t horizon) const {
    std::vector<HourRange> all;
    for (std::size_t i = 0; i < submodels.size(); ++i) {
      const auto& s = submodels[i];
      const std::string where = "Partition: submodel " + std::to_string(i);
      if (s.periods.empty()) throw std::invalid_argument(where + " has no periods");
      if (s.kind == SubmodelKind::Unlinked && s.periods.size() != 1) {
        throw std::invalid_argument(where + " is unlinked but has " + std::to_string(s.periods.size()) + " periods");
      }
      for (std::size_t r = 0; r < s.periods.size(); ++r) {
        const auto& p = s.periods[r];
        if (p.weight() == 0) throw std::invalid_argument(where + " has an empty period");
        if (s.kind == SubmodelKind::Linked) {
          if (p.sources.size() != 1) throw std::invalid_argument(where + ": linked period with several ranges");
          if (r > 0 && s.periods[r - 1].sources[0].end != p.sources[0].begin) {
            throw std::invalid_argument(where + ": linked periods are not consecutive");
          }
        }
        for (const auto& h : p.sources) {
          if (h.begin >= h.end) throw std::invalid_argument(where + ": empty source range");
          all.push_back(h);
        }
      }
    }
    std::sort(all.begin(), all.end(), [](const HourRange& a, const HourRange& b) { return a.begin < b.begin; });
    std::size_t at = 0;
    for (const auto& h : all) {
      if (h.begin < at) throw std::invalid_argument("Partition: overlap at hour " + std::to_string(h.begin));
      if (h.begin > at) throw std::invalid_argument("Partition: gap at hour " + std::to_string(at));
      at = h.end;
    }
    if (at != horizon) {
      throw std::invalid_argument("Partition: covers " + std::to_string(at) + " of " + std::to_string(horizon) +
                                  " hours");
    }
  }
  friend bool operator==(const Partition&, const Partition&) = default;
};

inline RepPeriod hour_period(std::size_t h) { return RepPeriod{{HourRange{h, h + 1}}}; }

/// One linked submodel of `horizon` single-hour periods.
inline Partition identity_partition(std::size_t horizon) {
  Partition p;
  Submodel s;
  for (std::size_t h = 0; h < horizon; ++h) s.periods.push_back(hour_period(h));
  p.submodels.push_back(std::move(s));
  return p;
}

/// Flagged hours become unlinked single-period submodels; maximal runs of
/// unflagged hours become linked submodels. All weights are 1.
inline Partition disaggregate(const std::vector<bool>& flags) {
  Partition p;
  Submodel run;
  for (std::size_t h = 0; h < flags.size(); ++h) {
    if (flags[h]) {
      if (!run.periods.empty()) p.submodels.push_back(std::move(run));
      run = Submodel{};
      p.submodels.push_back(Submodel{SubmodelKind::Unlinked, {hour_period(h)}});
    } else {
      run.periods.push_back(hour_period(h));
    }
  }
  if (!run.periods.empty()) p.submodels.push_back(std::move(run));
  return p;
}

/// Cuts after every hour with split_after[h] set; every piece is linked.
inline Partition disaggregate_at_splits(const std::vector<bool>& split_after) {
  Partition p;
  Submodel run;
  for (std::size_t h = 0; h < split_after.size(); ++h) {
    run.periods.push_back(hour_period(h));
    if (split_after[h] || h + 1 == split_after.size()) {
      p.submodels.push_back(std::move(run));
      run = Submodel{};
    }
  }
  return p;
}

namespace detail {

inline void append_range(std::vector<HourRange>& ranges, const HourRange& r) {
  if (!ranges.empty() && ranges.back().end == r.begin) {
    ranges.back().end = r.end;
  } else {
    ranges.push_back(r);
  }
}

inline void sort_by_first_hour(Partition& p) {
  std::stable_sort(p.submodels.begin(), p.submodels.end(),
                   [](const Submodel& a, const Submodel& b) { return a.first_hour() < b.first_hour(); });
}

}  // namespace detail

/// Groups unlinked submodels by signature into one single-period submodel
/// per distinct signature, weight = total member hours. Groups appear in
/// the order of their first member.
inline std::vector<Submodel> aggregate_unlinked(std::span<const Submodel> unlinked, std::span<const Signature> sig) {
  if (sig.size() != unlinked.size()) throw std::invalid_argument("aggregate_unlinked: one signature per submodel");
  std::vector<Submodel> out;
  std::map<Signature, std::size_t> group;
  for (std::size_t i = 0; i < unlinked.size(); ++i) {
    const auto& s = unlinked[i];
    if (s.kind != SubmodelKind::Unlinked) throw std::invalid_argument("aggregate_unlinked: linked submodel given");
    auto [it, inserted] = group.try_emplace(sig[i], out.size());
    if (inserted) out.push_back(Submodel{SubmodelKind::Unlinked, {RepPeriod{}}});
    auto& ranges = out[it->second].periods[0].sources;
    for (const auto& p : s.periods)
      for (const auto& r : p.sources) detail::append_range(ranges, r);
  }
  return out;
}

/// Collapses maximal runs of consecutive periods with equal signatures.
inline Submodel aggregate_linked(const Submodel& s, std::span<const Signature> per_period) {
  if (per_period.size() != s.periods.size()) throw std::invalid_argument("aggregate_linked: one signature per period");
  Submodel out{s.kind, {}};
  for (std::size_t r = 0; r < s.periods.size(); ++r) {
    if (r > 0 && per_period[r] == per_period[r - 1]) {
      for (const auto& h : s.periods[r].sources) detail::append_range(out.periods.back().sources, h);
    } else {
      out.periods.push_back(s.periods[r]);
    }
  }
  return out;
}

/// Applies aggregate_unlinked to all unlinked submodels and aggregate_linked
/// to every linked one, with signatures indexed by hour. Input periods must
/// be single hours. The result is ordered by first source hour.
inline Partition aggregate_partition(const Partition& p, std::span<const Signature> hourly) {
  auto sig_of = [&](const RepPeriod& rp) -> const Signature& {
    if (rp.weight() != 1) throw std::invalid_argument("aggregate_partition: periods must be single hours");
    const std::size_t h = rp.sources[0].begin;
    if (h >= hourly.size()) throw std::out_of_range("aggregate_partition: hour outside signature range");
    return hourly[h];
  };
  Partition out;
  std::vector<Submodel> unlinked;
  std::vector<Signature> unlinked_sig;
  for (const auto& s : p.submodels) {
    if (s.kind == SubmodelKind::Unlinked) {
      unlinked.push_back(s);
      unlinked_sig.push_back(sig_of(s.periods[0]));
    } else {
      std::vector<Signature> per;
      per.reserve(s.periods.size());
      for (const auto& rp : s.periods) per.push_back(sig_of(rp));
      out.submodels.push_back(aggregate_linked(s, per));
    }
  }
  for (auto& s : aggregate_unlinked(unlinked, unlinked_sig)) out.submodels.push_back(std::move(s));
  detail::sort_by_first_hour(out);
  return out;
}

inline RepPeriodSeries average_series(const SeriesFrame& frame, const Submodel& s) {
  return average_series(frame, std::span<const RepPeriod>(s.periods));
}

struct SubmodelResult {
  SubmodelLp model;
  RepPeriodSeries reps;
  LpSolution solution;
};

struct PartitionResult {
  std::vector<SubmodelResult> submodels;
  double objective = 0.0;  // Z = sum of submodel objectives

  std::vector<double> works() const {
    std::vector<double> w;
    w.reserve(submodels.size());
    for (const auto& s : submodels) w.push_back(work_units(s.solution));
    return w;
  }
};

/// Builds and solves every submodel on up to `threads` workers. Throws
/// NotOptimalError carrying the lowest index of a non-optimal submodel.
inline PartitionResult solve_partition(const CaseConfig& c, const SeriesFrame& frame, const Partition& p,
                                       std::size_t threads = 1, const ModelSolveOptions& opts = {}) {
  p.validate(frame.horizon_len);
  PartitionResult out;
  out.submodels.resize(p.submodels.size());
  parallel_for(p.submodels.size(), threads, [&](std::size_t i) {
    auto& r = out.submodels[i];
    r.reps = average_series(frame, p.submodels[i]);
    r.model = build_lp(c, r.reps);
    r.solution = solve_model(r.model, opts);
  });
  std::vector<LpSolution> sols;
  sols.reserve(out.submodels.size());
  for (std::size_t i = 0; i < out.submodels.size(); ++i) {
    const auto& s = out.submodels[i].solution;
    if (s.status != LpStatus::Optimal) {
      throw NotOptimalError("solve_partition: submodel " + std::to_string(i) + " is " + to_string(s.status), i,
                            s.status);
    }
  }
  for (const auto& s : out.submodels) out.objective += s.solution.objective;
  return out;
}

/// Per-hour primal values of a solved partition: every source hour of a
/// representative period receives that period's values.
inline std::vector<PeriodPrimal> hourly_primal(const Partition& p, const PartitionResult& res, std::size_t horizon) {
  std::vector<PeriodPrimal> out(horizon);
  for (std::size_t i = 0; i < p.submodels.size(); ++i) {
    const auto& sr = res.submodels[i];
    const auto prim = extract_primal(sr.solution, sr.model.map, sr.reps);
    for (std::size_t r = 0; r < prim.size(); ++r)
      for (const auto& h : p.submodels[i].periods[r].sources)
        for (std::size_t t = h.begin; t < h.end; ++t) out[t] = prim[r];
  }
  return out;
}

struct FullSolveOptions {
  ModelSolveOptions model;
  // Horizons up to this length are solved as one LP; longer ones are solved
  // in chunks joined under a dual certificate.
  std::size_t max_monolithic_hours = 1344;
  std::size_t chunk_hours = 168;
  std::size_t boundary_step = 24;  // hours a failed chunk boundary moves forward
  // A chunk growing beyond this length switches to one solve of the whole
  // horizon, warm-started from the chunk solutions.
  std::size_t max_chunk_hours = 504;
  double boundary_shift = 1e-5;  // MWh
  std::size_t threads = 1;
  double kkt_tol = 1e-7;
};

struct FullScaleResult {
  SubmodelLp model;
  RepPeriodSeries reps;
  LpSolution solution;
  bool chunked = false;
  std::size_t chunks = 1;
  KktReport kkt;
};

namespace detail {

// Chunk LP with an extra column u >= 0 that injects energy into the first
// state row at cost `import_cost`, so that any optimal dual satisfies
// y_soc[0] >= -import_cost. The export shift withdraws `shift` MWh at the
// last state row.
inline LpProblem with_boundary_terms(const SubmodelLp& m, bool import, double import_cost, double shift) {
  LpProblem lp = m.lp;
  lp.col_names.clear();
  lp.row_names.clear();
  if (import) {
    lp.eq_matrix.push_back({m.map.soc_row(0), lp.n_vars, -1.0});
    lp.cost.push_back(import_cost);
    lp.lower.push_back(0.0);
    lp.upper.push_back(kInf);
    ++lp.n_vars;
  }
  lp.eq_rhs[m.map.soc_row(m.map.periods - 1)] -= shift;
  return lp;
}

}  // namespace detail

/// Reference solve of the whole horizon at hourly resolution.
///
/// Long horizons are cut into chunks that each start and end at E_min and
/// are solved independently. Wherever e sits at E_min the state-of-charge
/// dual cannot decrease in time, so the concatenation is optimal for the full
/// LP when every chunk admits optimal duals with y_soc[first] >= y_soc[last]
/// of its predecessor. Chunks are certified left to right: chunk c is
/// offered energy at its start at the price implied by chunk c-1; if that
/// lowers its cost the boundary moves forward by `boundary_step` hours (or
/// the two chunks merge) and both are re-solved, otherwise its
/// duals are taken from a solve that enforces the price bound and withdraws
/// `boundary_shift` MWh at its end (which selects the lowest admissible
/// y_soc[last]). The assembled pair must pass verify_kkt on the full LP.
/// Work is the sum of all chunk solves.
inline FullScaleResult solve_full_scale(const CaseConfig& c, const SeriesFrame& frame,
                                        const FullSolveOptions& opts = {}) {
  const std::size_t H = frame.horizon_len;
  if (H == 0) throw std::invalid_argument("solve_full_scale: empty horizon");
  FullScaleResult out;
  const Partition ident = identity_partition(H);
  out.reps = average_series(frame, ident.submodels[0]);
  out.model = build_lp(c, out.reps);
  if (H <= opts.max_monolithic_hours) {
    out.solution = solve_model(out.model, opts.model);
    if (out.solution.status != LpStatus::Optimal) {
      throw NotOptimalError(std::string("solve_full_scale: ") + to_string(out.solution.status), 0,
                            out.solution.status);
    }
    out.kkt = verify_kkt(out.model.lp, out.solution, opts.kkt_tol);
    return out;
  }

  struct Chunk {
    std::size_t begin = 0;
    std::size_t end = 0;
    bool solved = false;
    SubmodelLp model;
    LpSolution primal;
    LpSolution dual;
  };
  std::vector<Chunk> chunks;
  const std::size_t step = std::max<std::size_t>(1, opts.chunk_hours);
  for (std::size_t b = 0; b < H; b += step) {
    Chunk ch;
    ch.begin = b;
    ch.end = std::min(H, b + step);
    chunks.push_back(std::move(ch));
  }
  if (chunks.size() > 1 && chunks.back().end - chunks.back().begin < step / 2) {
    chunks[chunks.size() - 2].end = H;
    chunks.pop_back();
  }
  std::size_t total_iters = 0;
  double total_work = 0.0;
  auto count = [&](const LpSolution& s, std::size_t idx, const Chunk& ch) {
    if (s.status != LpStatus::Optimal) {
      throw NotOptimalError("solve_full_scale: chunk [" + std::to_string(ch.begin) + "," + std::to_string(ch.end) +
                                ") is " + to_string(s.status),
                            idx, s.status);
    }
    total_iters += s.iterations;
    total_work += s.work;
  };
  auto solve_primals = [&]() {
    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < chunks.size(); ++i)
      if (!chunks[i].solved) todo.push_back(i);
    parallel_for(todo.size(), opts.threads, [&](std::size_t k) {
      auto& ch = chunks[todo[k]];
      Submodel s;
      for (std::size_t h = ch.begin; h < ch.end; ++h) s.periods.push_back(hour_period(h));
      ch.model = build_lp(c, average_series(frame, s));
      ch.primal = solve_model(ch.model, opts.model);
    });
    for (std::size_t i : todo) {
      count(chunks[i].primal, i, chunks[i]);
      chunks[i].solved = true;
    }
  };

  solve_primals();
  bool fallback = false;
  // price[i]: lowest admissible y_soc at the last hour of chunk i.
  std::vector<double> price(chunks.size(), 0.0);
  for (std::size_t i = 0; i < chunks.size();) {
    auto& ch = chunks[i];
    const bool import = i > 0;
    const bool last = i + 1 == chunks.size();
    const double p_in = import ? price[i - 1] : 0.0;
    if (import) {
      SolveOptions o = opts.model.lp;
      o.start_x = ch.primal.x;
      o.start_x.push_back(0.0);
      const LpSolution probe = solve(detail::with_boundary_terms(ch.model, true, -p_in, 0.0), o);
      count(probe, i, ch);
      const double z0 = ch.primal.objective;
      if (probe.objective < z0 - opts.kkt_tol * (1.0 + std::abs(z0))) {
        auto& prev = chunks[i - 1];
        const std::size_t move = std::max<std::size_t>(1, opts.boundary_step);
        const std::size_t grown = ch.end - ch.begin <= move ? ch.end - prev.begin : prev.end + move - prev.begin;
        if (grown > opts.max_chunk_hours) {
          fallback = true;
          break;
        }
        if (ch.end - ch.begin <= move) {
          prev.end = ch.end;
          chunks.erase(chunks.begin() + static_cast<std::ptrdiff_t>(i));
          price.erase(price.begin() + static_cast<std::ptrdiff_t>(i));
        } else {
          prev.end += move;
          ch.begin += move;
          ch.solved = false;
        }
        prev.solved = false;
        solve_primals();
        --i;
        continue;
      }
    }
    LpSolution dual =
        solve(detail::with_boundary_terms(ch.model, import, -p_in, last ? 0.0 : opts.boundary_shift), opts.model.lp);
    count(dual, i, ch);
    dual.y.resize(ch.model.lp.n_eq);
    ch.dual = std::move(dual);
    if (import && ch.dual.y[ch.model.map.soc_row(0)] < p_in) {
      // Within solver tolerance of the bound; pin it exactly.
      ch.dual.y[ch.model.map.soc_row(0)] = p_in;
    }
    price[i] = ch.dual.y[ch.model.map.soc_row(ch.model.map.periods - 1)];
    ++i;
  }

  const VarMap& map = out.model.map;
  const LpProblem& lp = out.model.lp;
  LpSolution& sol = out.solution;
  if (fallback) {
    ModelSolveOptions mo = opts.model;
    mo.lp.start_x.assign(map.n_vars(), 0.0);
    for (const auto& ch : chunks) {
      for (std::size_t r = 0; r < ch.model.map.periods; ++r)
        for (std::size_t k = 0; k < kSymbols; ++k)
          mo.lp.start_x[map.col(ch.begin + r, static_cast<Symbol>(k))] =
              ch.primal.x[ch.model.map.col(r, static_cast<Symbol>(k))];
    }
    sol = solve_model(out.model, mo);
    if (sol.status != LpStatus::Optimal) {
      throw NotOptimalError(std::string("solve_full_scale: ") + to_string(sol.status), 0, sol.status);
    }
    sol.iterations += total_iters;
    sol.work += total_work;
    out.chunked = false;
    out.chunks = 1;
    out.kkt = verify_kkt(lp, sol, opts.kkt_tol);
    return out;
  }
  sol.status = LpStatus::Optimal;
  sol.x.assign(map.n_vars(), 0.0);
  sol.y.assign(map.n_eq(), 0.0);
  for (const auto& ch : chunks) {
    const VarMap& cm = ch.model.map;
    for (std::size_t r = 0; r < cm.periods; ++r) {
      const std::size_t h = ch.begin + r;
      for (std::size_t k = 0; k < kSymbols; ++k) {
        sol.x[map.col(h, static_cast<Symbol>(k))] = ch.primal.x[cm.col(r, static_cast<Symbol>(k))];
      }
      sol.y[map.balance_row(h)] = ch.dual.y[cm.balance_row(r)];
      sol.y[map.soc_row(h)] = ch.dual.y[cm.soc_row(r)];
    }
  }
  sol.y[map.soc_final_row()] = chunks.back().dual.y[chunks.back().model.map.soc_final_row()];
  sol.d = lp.cost;
  for (const auto& t : lp.eq_matrix) sol.d[t.col] -= sol.y[t.row] * t.value;
  sol.objective = 0.0;
  for (std::size_t j = 0; j < lp.n_vars; ++j) sol.objective += lp.cost[j] * sol.x[j];
  sol.iterations = total_iters;
  sol.work = total_work;
  out.chunked = true;
  out.chunks = chunks.size();
  out.kkt = verify_kkt(lp, sol, opts.kkt_tol);
  if (!out.kkt.passed) throw std::runtime_error("solve_full_scale: assembled chunk solution failed the KKT check");
  return out;
}

enum class CutRule { TwoEmpty, EmptyEnd };

struct OracleOptions {
  SignatureMode signature = SignatureMode::Full;
  double dual_quantum = 1e-6;
  bool aggregate = true;
  CutRule cut_rule = CutRule::TwoEmpty;
  ClassifyTolerances tol;
};

struct OraclePlan {
  std::vector<PeriodDiagnostics> diagnostics;  // hourly, from the full solve
  std::vector<bool> flags;                     // cut flags (TwoEmpty) or split points (EmptyEnd)
  Partition disaggregated;
  Partition partition;  // after aggregation when requested
};

/// Steps 1 to 3 with perfect information: diagnostics of the full-scale
/// solution, cut flags, disaggregation and signature aggregation.
inline OraclePlan oracle_plan(const FullScaleResult& full, const CaseConfig& c, const OracleOptions& o = {}) {
  OraclePlan plan;
  plan.diagnostics = diagnose(full.model, full.solution, full.reps, c, o.tol);
  std::vector<double> soc(plan.diagnostics.size());
  for (std::size_t h = 0; h < soc.size(); ++h) soc[h] = plan.diagnostics[h].primal.e;
  if (o.cut_rule == CutRule::TwoEmpty) {
    plan.flags = find_cut_flags(soc, c.storage_emin, o.tol.activity);
    plan.disaggregated = disaggregate(plan.flags);
  } else {
    plan.flags = find_split_points(soc, c.storage_emin, o.tol.activity);
    plan.disaggregated = disaggregate_at_splits(plan.flags);
  }
  if (o.aggregate) {
    const auto sig = signatures_of(plan.diagnostics, o.signature, o.dual_quantum);
    plan.partition = aggregate_partition(plan.disaggregated, sig);
  } else {
    plan.partition = plan.disaggregated;
  }
  return plan;
}

/// Error of one aggregated quantity: percent of the full-scale value, or the
/// absolute difference when the full-scale value is zero.
struct ErrorValue {
  double value = 0.0;
  bool denominator_zero = false;
};

inline ErrorValue relative_error_pct(double agg, double full) {
  if (full == 0.0) return {agg - full, true};
  return {100.0 * (agg - full) / full, false};
}

enum class Quantity : std::size_t { Ofv = 0, Vre, Thermal, Nsp, Charging, Discharging };
inline constexpr std::size_t kQuantities = 6;

inline const char* quantity_name(Quantity q) {
  static constexpr std::array<const char*, kQuantities> names{"OFV", "VRE", "Thermal", "NSP", "Charging",
                                                              "Discharging"};
  return names[static_cast<std::size_t>(q)];
}

struct RunReport {
  double ofv_full = 0.0;
  double ofv_agg = 0.0;
  TechTotals full;
  TechTotals agg;
  std::array<ErrorValue, kQuantities> errors_pct{};
  std::size_t periods_total = 0;
  std::size_t submodels = 0;
  std::size_t horizon = 0;
  double work_full = 0.0;
  double work_parallel_bound = 0.0;
  double speedup = 0.0;
  bool work_full_chunked = false;
};

inline TechTotals totals_of(const SubmodelLp& m, const LpSolution& sol, const RepPeriodSeries& reps) {
  const auto prim = extract_primal(sol, m.map, reps);
  TechTotals t = technology_totals(prim, reps.weights);
  t.ofv = sol.objective;
  return t;
}

inline TechTotals totals_of(const PartitionResult& res) {
  TechTotals t;
  for (const auto& s : res.submodels) t += totals_of(s.model, s.solution, s.reps);
  return t;
}

inline std::array<double, kQuantities> quantities_of(const TechTotals& t) {
  return {t.ofv, t.vre, t.thermal, t.nsp, t.charge, t.discharge};
}

/// Per-quantity errors of `agg` against `ref`.
inline std::array<ErrorValue, kQuantities> errors_between(const TechTotals& ref, const TechTotals& agg) {
  const auto f = quantities_of(ref);
  const auto a = quantities_of(agg);
  std::array<ErrorValue, kQuantities> out{};
  for (std::size_t q = 0; q < kQuantities; ++q) out[q] = relative_error_pct(a[q], f[q]);
  return out;
}

inline RunReport compare(const FullScaleResult& full, const PartitionResult& agg, const Partition& p) {
  RunReport rep;
  rep.full = totals_of(full.model, full.solution, full.reps);
  rep.agg = totals_of(agg);
  rep.ofv_full = full.solution.objective;
  rep.ofv_agg = agg.objective;
  rep.full.ofv = rep.ofv_full;
  rep.agg.ofv = rep.ofv_agg;
  rep.errors_pct = errors_between(rep.full, rep.agg);
  rep.periods_total = p.periods_total();
  rep.submodels = p.submodels.size();
  rep.horizon = p.hours();
  rep.work_full = work_units(full.solution);
  rep.work_full_chunked = full.chunked;
  const auto works = agg.works();
  rep.work_parallel_bound = works.empty() ? 0.0 : *std::max_element(works.begin(), works.end());
  rep.speedup = works.empty() ? 0.0 : speedup(rep.work_full, works);
  return rep;
}

inline nlohmann::json partition_to_json(const Partition& p) {
  nlohmann::json subs = nlohmann::json::array();
  for (const auto& s : p.submodels) {
    nlohmann::json periods = nlohmann::json::array();
    for (const auto& rp : s.periods) {
      nlohmann::json ranges = nlohmann::json::array();
      for (const auto& h : rp.sources) ranges.push_back({h.begin, h.end});
      periods.push_back({{"weight", rp.weight()}, {"sources", ranges}});
    }
    subs.push_back({{"kind", to_string(s.kind)}, {"periods", periods}});
  }
  return {{"horizon", p.hours()}, {"submodels", subs}};
}

inline Partition partition_from_json(const nlohmann::json& j) {
  Partition p;
  try {
    for (const auto& js : j.at("submodels")) {
      Submodel s;
      const std::string kind = js.at("kind").get<std::string>();
      if (kind == "unlinked") {
        s.kind = SubmodelKind::Unlinked;
      } else if (kind == "linked") {
        s.kind = SubmodelKind::Linked;
      } else {
        throw std::invalid_argument("partition json: unknown submodel kind '" + kind + "'");
      }
      for (const auto& jp : js.at("periods")) {
        RepPeriod rp;
        for (const auto& jr : jp.at("sources")) {
          rp.sources.push_back({jr.at(0).get<std::size_t>(), jr.at(1).get<std::size_t>()});
        }
        if (jp.contains("weight") && jp.at("weight").get<std::size_t>() != rp.weight()) {
          throw std::invalid_argument("partition json: weight does not match source ranges");
        }
        s.periods.push_back(std::move(rp));
      }
      p.submodels.push_back(std::move(s));
    }
    p.validate(j.at("horizon").get<std::size_t>());
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("partition json: ") + e.what());
  }
  return p;
}

inline void write_partition(std::ostream& os, const Partition& p) { os << partition_to_json(p).dump(1) << '\n'; }

inline Partition read_partition(std::istream& is) {
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("partition json: ") + e.what());
  }
  return partition_from_json(j);
}

}  // namespace etsa
