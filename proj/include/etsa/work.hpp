#pragma once

// Deterministic solver-effort proxy and the parallel speed-up bound.

#include <algorithm>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>

#include "etsa/lp.hpp"

namespace etsa {

/// Simplex iterations times equality-row count.
inline double work_units(const LpSolution& sol) { return sol.work; }

inline double work_units(std::size_t iterations, std::size_t n_eq) {
  return static_cast<double>(iterations) * static_cast<double>(n_eq);
}

/// work_full divided by the largest submodel work, i.e. the speed-up of a
/// fully parallel solve without parallelization overhead.
inline double speedup(double work_full, std::span<const double> works) {
  if (works.empty()) throw std::invalid_argument("speedup: no submodel works");
  const double bound = *std::max_element(works.begin(), works.end());
  if (bound <= 0.0) return work_full > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
  return work_full / bound;
}

}  // namespace etsa
