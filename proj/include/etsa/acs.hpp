#pragma once

// Per-period active constraint sets, storage states, marginal generators and
// duals of a solved submodel, plus the signatures used to merge periods.

#include <array>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "etsa/data.hpp"
#include "etsa/lp.hpp"
#include "etsa/model.hpp"

namespace etsa {

/// Duals of one period. Flow duals are per hour of the period (divided by
/// W_r); state-of-charge duals are per MWh and carry no weight.
struct PeriodDuals {
  double mu_bal = 0.0;                      // EUR/MWh
  double mu_soc = 0.0;                      // EUR/MWh
  std::array<double, kSymbols> lambda_lo{};  // lower-bound duals, >= 0
  std::array<double, kSymbols> lambda_up{};  // upper-bound duals, >= 0
};

enum class StorageState : std::uint8_t { Empty, Full, Charging, MaxCharging, Discharging, MaxDischarging, Idle };
enum class MarginalGen : std::uint8_t { Vre, Thermal, Nsp, StorageComposite };

inline const char* to_string(StorageState s) {
  switch (s) {
    case StorageState::Empty: return "Empty";
    case StorageState::Full: return "Full";
    case StorageState::Charging: return "Charging";
    case StorageState::MaxCharging: return "MaxCharging";
    case StorageState::Discharging: return "Discharging";
    case StorageState::MaxDischarging: return "MaxDischarging";
    case StorageState::Idle: return "Idle";
  }
  return "?";
}

inline const char* to_string(MarginalGen g) {
  switch (g) {
    case MarginalGen::Vre: return "VRE";
    case MarginalGen::Thermal: return "Thermal";
    case MarginalGen::Nsp: return "NSP";
    case MarginalGen::StorageComposite: return "Storage/Composite";
  }
  return "?";
}

/// Bit 2*s marks the lower bound of symbol s as active, bit 2*s+1 the upper.
using ActiveMask = std::uint16_t;

inline constexpr ActiveMask lower_bit(Symbol s) { return static_cast<ActiveMask>(1u << (2 * static_cast<unsigned>(s))); }
inline constexpr ActiveMask upper_bit(Symbol s) {
  return static_cast<ActiveMask>(1u << (2 * static_cast<unsigned>(s) + 1));
}

struct PeriodDiagnostics {
  PeriodPrimal primal;
  PeriodDuals duals;
  ActiveMask active_mask = 0;
  StorageState storage_state = StorageState::Idle;
  MarginalGen marginal_gen = MarginalGen::StorageComposite;
  bool simultaneous = false;  // charging and discharging in the same period
  std::size_t weight = 1;
};

struct ClassifyTolerances {
  double activity = 1e-7;  // relative to max(1, |bound|)
  double flow = 1e-7;      // MW
  double price = 1e-6;     // EUR/MWh
};

inline bool at_bound(double v, double bound, double tol) { return std::abs(v - bound) <= tol * std::max(1.0, std::abs(bound)); }

/// Classifies one period with average demand `demand` and capacity factor `cf`.
inline PeriodDiagnostics classify_period(const PeriodPrimal& primal, const PeriodDuals& duals, const CaseConfig& c,
                                         double demand, double cf, const ClassifyTolerances& tol = {}) {
  PeriodDiagnostics out;
  out.primal = primal;
  out.duals = duals;
  for (std::size_t k = 0; k < kSymbols; ++k) {
    const auto s = static_cast<Symbol>(k);
    const auto [lo, up] = symbol_bounds(c, s, demand, cf);
    const double v = primal.get(s);
    if (at_bound(v, lo, tol.activity)) out.active_mask |= lower_bit(s);
    if (at_bound(v, up, tol.activity)) out.active_mask |= upper_bit(s);
  }
  const bool charging = primal.p_c > tol.flow;
  const bool discharging = primal.p_d > tol.flow;
  out.simultaneous = charging && discharging;
  if (out.active_mask & lower_bit(Symbol::Soc)) {
    out.storage_state = StorageState::Empty;
  } else if (out.active_mask & upper_bit(Symbol::Soc)) {
    out.storage_state = StorageState::Full;
  } else if (charging && (!discharging || primal.p_c >= primal.p_d)) {
    out.storage_state =
        (out.active_mask & upper_bit(Symbol::Charge)) ? StorageState::MaxCharging : StorageState::Charging;
  } else if (discharging) {
    out.storage_state =
        (out.active_mask & upper_bit(Symbol::Discharge)) ? StorageState::MaxDischarging : StorageState::Discharging;
  } else {
    out.storage_state = StorageState::Idle;
  }
  if (std::abs(duals.mu_bal - c.vre_cost) <= tol.price) {
    out.marginal_gen = MarginalGen::Vre;
  } else if (std::abs(duals.mu_bal - c.thermal_cost) <= tol.price) {
    out.marginal_gen = MarginalGen::Thermal;
  } else if (std::abs(duals.mu_bal - c.nse_cost) <= tol.price) {
    out.marginal_gen = MarginalGen::Nsp;
  } else {
    out.marginal_gen = MarginalGen::StorageComposite;
  }
  return out;
}

/// Per-period duals of a solved submodel.
inline std::vector<PeriodDuals> extract_duals(const LpSolution& sol, const SubmodelLp& m) {
  if (sol.status != LpStatus::Optimal) throw NotOptimalError("extract_duals: solution not optimal", 0, sol.status);
  std::vector<PeriodDuals> out(m.map.periods);
  for (std::size_t r = 0; r < m.map.periods; ++r) {
    const double w = m.weights[r];
    auto& pd = out[r];
    pd.mu_bal = sol.y[m.map.balance_row(r)] / w;
    pd.mu_soc = sol.y[m.map.soc_row(r)];
    for (std::size_t k = 0; k < kSymbols; ++k) {
      const auto s = static_cast<Symbol>(k);
      double d = sol.d[m.map.col(r, s)];
      if (s != Symbol::Soc) d /= w;
      pd.lambda_lo[k] = std::max(d, 0.0);
      pd.lambda_up[k] = std::max(-d, 0.0);
    }
  }
  return out;
}

/// Diagnostics of every period of a solved submodel.
inline std::vector<PeriodDiagnostics> diagnose(const SubmodelLp& m, const LpSolution& sol, const RepPeriodSeries& reps,
                                               const CaseConfig& c, const ClassifyTolerances& tol = {}) {
  const auto primal = extract_primal(sol, m.map, reps);
  const auto duals = extract_duals(sol, m);
  std::vector<PeriodDiagnostics> out;
  out.reserve(primal.size());
  for (std::size_t r = 0; r < primal.size(); ++r) {
    out.push_back(classify_period(primal[r], duals[r], c, reps.avg_demand[r], reps.avg_cf[0][r], tol));
    out.back().weight = reps.weights[r];
  }
  return out;
}

/// flag_r is set when the state of charge is at E_min at the end of both
/// period r-1 and period r, with the state before the first period taken as
/// E_min. Flagged periods are decoupled from their neighbours.
inline std::vector<bool> find_cut_flags(std::span<const double> soc, double e_min, double tol = 1e-7) {
  std::vector<bool> flags(soc.size(), false);
  bool prev_empty = true;
  for (std::size_t r = 0; r < soc.size(); ++r) {
    const bool empty = at_bound(soc[r], e_min, tol);
    flags[r] = prev_empty && empty;
    prev_empty = empty;
  }
  return flags;
}

inline std::vector<bool> find_cut_flags(std::span<const PeriodDiagnostics> diag, double e_min, double tol = 1e-7) {
  std::vector<double> soc(diag.size());
  for (std::size_t r = 0; r < diag.size(); ++r) soc[r] = diag[r].primal.e;
  return find_cut_flags(soc, e_min, tol);
}

/// Alternative rule: the horizon may be split after every period that ends
/// at E_min. split[r] is true when a cut is placed between r and r+1.
inline std::vector<bool> find_split_points(std::span<const double> soc, double e_min, double tol = 1e-7) {
  std::vector<bool> split(soc.size(), false);
  for (std::size_t r = 0; r + 1 < soc.size(); ++r) split[r] = at_bound(soc[r], e_min, tol);
  return split;
}

enum class SignatureMode : std::uint8_t { Full, Reduced };

/// A value snapped onto a grid of spacing quantum * 2^k, where 2^k is the
/// smallest power of two >= max(1, |v|). Equal keys form an equivalence
/// relation.
struct QuantizedValue {
  std::int32_t exponent = 0;
  std::int64_t steps = 0;
  friend auto operator<=>(const QuantizedValue&, const QuantizedValue&) = default;
};

inline QuantizedValue quantize(double v, double quantum) {
  QuantizedValue q;
  const double a = std::abs(v);
  q.exponent = a > 1.0 ? static_cast<std::int32_t>(std::ceil(std::log2(a))) : 0;
  const double step = quantum * std::ldexp(1.0, q.exponent);
  q.steps = std::llround(v / step);
  if (q.steps == 0) q.exponent = 0;
  return q;
}

/// Equivalence key of a period. Full mode keys the active mask and the
/// quantized duals; storage state and marginal generator are implied by
/// those and are carried so that Full equality refines Reduced equality.
/// Reduced mode keys storage state and marginal generator only.
struct Signature {
  SignatureMode mode = SignatureMode::Full;
  StorageState state = StorageState::Idle;
  MarginalGen gen = MarginalGen::StorageComposite;
  ActiveMask mask = 0;
  std::vector<QuantizedValue> duals;

  friend bool operator==(const Signature&, const Signature&) = default;
  friend auto operator<=>(const Signature& a, const Signature& b) {
    return std::tie(a.mode, a.state, a.gen, a.mask, a.duals) <=> std::tie(b.mode, b.state, b.gen, b.mask, b.duals);
  }
};

inline Signature signature_of(const PeriodDiagnostics& d, SignatureMode mode, double dual_quantum = 1e-6) {
  Signature s;
  s.mode = mode;
  s.state = d.storage_state;
  s.gen = d.marginal_gen;
  if (mode == SignatureMode::Reduced) return s;
  s.mask = d.active_mask;
  s.duals.reserve(2 + 2 * kSymbols);
  s.duals.push_back(quantize(d.duals.mu_bal, dual_quantum));
  s.duals.push_back(quantize(d.duals.mu_soc, dual_quantum));
  for (std::size_t k = 0; k < kSymbols; ++k) {
    s.duals.push_back(quantize(d.duals.lambda_lo[k], dual_quantum));
    s.duals.push_back(quantize(d.duals.lambda_up[k], dual_quantum));
  }
  return s;
}

inline std::vector<Signature> signatures_of(std::span<const PeriodDiagnostics> diag, SignatureMode mode,
                                            double dual_quantum = 1e-6) {
  std::vector<Signature> out;
  out.reserve(diag.size());
  for (const auto& d : diag) out.push_back(signature_of(d, mode, dual_quantum));
  return out;
}

namespace detail {

inline std::string fmt_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace detail

/// Diagnostics table, one row per period. `flags` may be empty.
inline void write_diagnostics_csv(std::ostream& os, std::span<const PeriodDiagnostics> diag,
                                  const std::vector<bool>& flags = {}) {
  os << "period,weight,state,marginal_gen,mu_bal,mu_soc,e,p_t,p_v,p_ns,p_c,p_d,active_mask,simultaneous,cut_flag\n";
  for (std::size_t r = 0; r < diag.size(); ++r) {
    const auto& d = diag[r];
    os << r << ',' << d.weight << ',' << to_string(d.storage_state) << ',' << to_string(d.marginal_gen) << ','
       << detail::fmt_num(d.duals.mu_bal) << ',' << detail::fmt_num(d.duals.mu_soc) << ','
       << detail::fmt_num(d.primal.e) << ',' << detail::fmt_num(d.primal.p_t) << ','
       << detail::fmt_num(d.primal.p_v) << ',' << detail::fmt_num(d.primal.p_ns) << ','
       << detail::fmt_num(d.primal.p_c) << ',' << detail::fmt_num(d.primal.p_d) << ',' << d.active_mask << ','
       << (d.simultaneous ? 1 : 0) << ',' << (r < flags.size() && flags[r] ? 1 : 0) << '\n';
  }
}

}  // namespace etsa
