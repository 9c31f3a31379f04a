#pragma once

// Contiguity-constrained agglomerative clustering of the periods of linked
// submodels by net demand.

#include <algorithm>
#include <cstddef>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "etsa/data.hpp"
#include "etsa/tsa.hpp"

namespace etsa {

/// Half-open index interval [begin, end) into a sequence of periods.
struct Interval {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Within-cluster sum of squared deviations from the cluster means.
inline double clustering_sse(std::span<const double> values, std::span<const Interval> clusters) {
  double total = 0.0;
  for (const auto& c : clusters) {
    double mean = 0.0;
    for (std::size_t i = c.begin; i < c.end; ++i) mean += values[i];
    mean /= static_cast<double>(c.size());
    for (std::size_t i = c.begin; i < c.end; ++i) total += (values[i] - mean) * (values[i] - mean);
  }
  return total;
}

namespace detail {

struct WardCluster {
  std::size_t begin = 0;
  std::size_t end = 0;
  double sum = 0.0;

  double mean() const { return sum / static_cast<double>(end - begin); }
};

// Increase in SSE when merging two adjacent clusters.
inline double ward_cost(const WardCluster& a, const WardCluster& b) {
  const double na = static_cast<double>(a.end - a.begin);
  const double nb = static_cast<double>(b.end - b.begin);
  const double diff = a.mean() - b.mean();
  return na * nb / (na + nb) * diff * diff;
}

// Greedy merges over several independent sequences. Each step merges the
// cheapest adjacent pair over all sequences (ties: lower sequence, then lower
// position) until the total cluster count reaches `target` or every sequence
// is a single cluster.
inline std::vector<std::vector<Interval>> agglomerate_segments(const std::vector<std::vector<double>>& segments,
                                                               std::size_t target) {
  std::vector<std::vector<WardCluster>> cl(segments.size());
  std::size_t count = 0;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    for (std::size_t i = 0; i < segments[s].size(); ++i) cl[s].push_back({i, i + 1, segments[s][i]});
    count += cl[s].size();
  }
  while (count > target) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bs = 0;
    std::size_t bi = 0;
    bool found = false;
    for (std::size_t s = 0; s < cl.size(); ++s) {
      for (std::size_t i = 0; i + 1 < cl[s].size(); ++i) {
        const double c = ward_cost(cl[s][i], cl[s][i + 1]);
        if (c < best) {
          best = c;
          bs = s;
          bi = i;
          found = true;
        }
      }
    }
    if (!found) break;
    auto& v = cl[bs];
    v[bi].end = v[bi + 1].end;
    v[bi].sum += v[bi + 1].sum;
    v.erase(v.begin() + static_cast<std::ptrdiff_t>(bi + 1));
    --count;
  }
  std::vector<std::vector<Interval>> out(cl.size());
  for (std::size_t s = 0; s < cl.size(); ++s)
    for (const auto& c : cl[s]) out[s].push_back({c.begin, c.end});
  return out;
}

}  // namespace detail

/// Greedy 1-D Ward agglomeration of adjacent clusters down to min(k, n)
/// clusters. Ties go to the lower index.
inline std::vector<Interval> contiguous_agglomerate(std::span<const double> values, std::size_t k) {
  if (k == 0) throw std::invalid_argument("contiguous_agglomerate: k must be >= 1");
  if (values.empty()) throw std::invalid_argument("contiguous_agglomerate: empty input");
  std::vector<std::vector<double>> seg{std::vector<double>(values.begin(), values.end())};
  return detail::agglomerate_segments(seg, std::min(k, values.size()))[0];
}

enum class ClusterBudget { PerSubmodel, Global };

inline const char* to_string(ClusterBudget b) { return b == ClusterBudget::PerSubmodel ? "per-submodel" : "global"; }

struct SubmodelClusters {
  std::size_t submodel = 0;        // index into Partition::submodels
  std::vector<Interval> clusters;  // period-index intervals within it
  friend bool operator==(const SubmodelClusters&, const SubmodelClusters&) = default;
};

struct ClusterPlan {
  std::size_t k = 0;
  ClusterBudget budget = ClusterBudget::PerSubmodel;
  std::vector<SubmodelClusters> linked;
  friend bool operator==(const ClusterPlan&, const ClusterPlan&) = default;
};

/// Mean net demand of each period of `s` from an hourly net-demand series.
inline std::vector<double> period_net_demand(const Submodel& s, std::span<const double> hourly) {
  std::vector<double> out;
  out.reserve(s.periods.size());
  for (const auto& p : s.periods) {
    double sum = 0.0;
    for (const auto& r : p.sources) {
      if (r.end > hourly.size()) throw std::out_of_range("period_net_demand: hour outside series");
      for (std::size_t h = r.begin; h < r.end; ++h) sum += hourly[h];
    }
    out.push_back(sum / static_cast<double>(p.weight()));
  }
  return out;
}

/// Clusters every linked submodel of `p`. PerSubmodel reduces each one to
/// min(k, length) clusters; Global spends a total of max(k, #linked) clusters
/// across all linked submodels with the same merge criterion.
inline ClusterPlan plan_clusters(const Partition& p, std::span<const double> hourly_net_demand, std::size_t k,
                                 ClusterBudget budget = ClusterBudget::PerSubmodel) {
  if (k == 0) throw std::invalid_argument("plan_clusters: k must be >= 1");
  ClusterPlan plan{k, budget, {}};
  std::vector<std::vector<double>> values;
  for (std::size_t i = 0; i < p.submodels.size(); ++i) {
    const auto& s = p.submodels[i];
    if (s.kind != SubmodelKind::Linked) continue;
    plan.linked.push_back({i, {}});
    values.push_back(period_net_demand(s, hourly_net_demand));
  }
  if (budget == ClusterBudget::PerSubmodel) {
    for (std::size_t j = 0; j < values.size(); ++j) {
      plan.linked[j].clusters = contiguous_agglomerate(values[j], k);
    }
  } else {
    const auto res = detail::agglomerate_segments(values, std::max(k, values.size()));
    for (std::size_t j = 0; j < values.size(); ++j) plan.linked[j].clusters = res[j];
  }
  return plan;
}

/// Replaces each clustered linked submodel by one representative period per
/// cluster. Unlinked submodels and linked ones absent from the plan are kept.
inline Partition apply_plan(const Partition& p, const ClusterPlan& plan) {
  Partition out = p;
  std::vector<bool> seen(p.submodels.size(), false);
  for (const auto& sc : plan.linked) {
    if (sc.submodel >= p.submodels.size()) throw std::invalid_argument("apply_plan: submodel index out of range");
    const auto& s = p.submodels[sc.submodel];
    const std::string where = "apply_plan: submodel " + std::to_string(sc.submodel);
    if (s.kind != SubmodelKind::Linked) throw std::invalid_argument(where + " is not linked");
    if (seen[sc.submodel]) throw std::invalid_argument(where + " appears twice");
    seen[sc.submodel] = true;
    std::size_t at = 0;
    Submodel merged{SubmodelKind::Linked, {}};
    for (const auto& c : sc.clusters) {
      if (c.begin != at || c.end <= c.begin || c.end > s.periods.size()) {
        throw std::invalid_argument(where + ": clusters do not tile its periods");
      }
      RepPeriod rp;
      for (std::size_t r = c.begin; r < c.end; ++r)
        for (const auto& h : s.periods[r].sources) detail::append_range(rp.sources, h);
      merged.periods.push_back(std::move(rp));
      at = c.end;
    }
    if (at != s.periods.size()) throw std::invalid_argument(where + ": clusters do not tile its periods");
    out.submodels[sc.submodel] = std::move(merged);
  }
  return out;
}

inline nlohmann::json cluster_plan_to_json(const ClusterPlan& plan) {
  nlohmann::json j;
  j["k"] = plan.k;
  j["budget"] = to_string(plan.budget);
  j["submodels"] = nlohmann::json::array();
  for (const auto& sc : plan.linked) {
    nlohmann::json cl = nlohmann::json::array();
    for (const auto& c : sc.clusters) cl.push_back({c.begin, c.end});
    j["submodels"].push_back({{"index", sc.submodel}, {"clusters", cl}});
  }
  return j;
}

inline ClusterPlan cluster_plan_from_json(const nlohmann::json& j) {
  ClusterPlan plan;
  plan.k = j.at("k").get<std::size_t>();
  const auto b = j.at("budget").get<std::string>();
  if (b == "per-submodel") {
    plan.budget = ClusterBudget::PerSubmodel;
  } else if (b == "global") {
    plan.budget = ClusterBudget::Global;
  } else {
    throw std::invalid_argument("cluster plan: unknown budget '" + b + "'");
  }
  for (const auto& s : j.at("submodels")) {
    SubmodelClusters sc;
    sc.submodel = s.at("index").get<std::size_t>();
    for (const auto& c : s.at("clusters")) sc.clusters.push_back({c.at(0).get<std::size_t>(), c.at(1).get<std::size_t>()});
    plan.linked.push_back(std::move(sc));
  }
  return plan;
}

inline void write_cluster_plan(std::ostream& os, const ClusterPlan& plan) {
  os << cluster_plan_to_json(plan).dump(1) << '\n';
}

inline ClusterPlan read_cluster_plan(std::istream& is) { return cluster_plan_from_json(nlohmann::json::parse(is)); }

}  // namespace etsa
