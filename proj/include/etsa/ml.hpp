#pragma once

// Classifier for empty-storage periods: lead/lag features, logistic
// regression feature selection and a random forest with histogram splits.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "etsa/acs.hpp"
#include "etsa/data.hpp"
#include "etsa/parallel.hpp"

namespace etsa {

/// Row-major hours x features.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::vector<std::string> names;
  std::vector<double> data;
  std::size_t zero_demand_rows = 0;  // hours where VRE_D was set to 0

  std::size_t cols() const { return names.size(); }
  double at(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }
  double& at(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
  std::vector<double> column(std::size_t c) const {
    std::vector<double> out(rows);
    for (std::size_t r = 0; r < rows; ++r) out[r] = at(r, c);
    return out;
  }
  std::size_t index_of(const std::string& name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw std::out_of_range("FeatureMatrix: no column '" + name + "'");
    return static_cast<std::size_t>(it - names.begin());
  }
  /// Rows [begin, end).
  FeatureMatrix slice_rows(std::size_t begin, std::size_t end) const {
    FeatureMatrix out;
    out.names = names;
    out.rows = end - begin;
    out.data.assign(data.begin() + static_cast<std::ptrdiff_t>(begin * cols()),
                    data.begin() + static_cast<std::ptrdiff_t>(end * cols()));
    return out;
  }
  /// The named columns, in the given order.
  FeatureMatrix select(std::span<const std::string> keep) const {
    FeatureMatrix out;
    out.rows = rows;
    out.names.assign(keep.begin(), keep.end());
    std::vector<std::size_t> idx;
    for (const auto& n : keep) idx.push_back(index_of(n));
    out.data.resize(rows * idx.size());
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t k = 0; k < idx.size(); ++k) out.data[r * idx.size() + k] = at(r, idx[k]);
    return out;
  }
};

inline constexpr std::array<const char*, 5> kBaseFeatures = {"D", "F", "VRE", "VRE_D", "Crit"};

/// Column name of a base feature at an offset, e.g. "D[-3]", "Crit[+0]".
inline std::string feature_name(const std::string& base, int offset) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "[%+d]", offset);
  return base + buf;
}

/// Base features D, F, VRE = F * vre_capacity, VRE_D = VRE / D (0 when D = 0)
/// and Crit = D / (VRE + thermal_capacity), each shifted by every offset in
/// [-max_lag, max_lag]. Column "X[+k]" at hour h holds X at hour h + k, with
/// hours outside the horizon replaced by the nearest edge hour.
inline FeatureMatrix build_features(const SeriesFrame& frame, const CaseConfig& c, int max_lag = 10) {
  if (max_lag < 0) throw std::invalid_argument("build_features: max_lag must be >= 0");
  if (frame.capacity_factor.empty()) throw std::invalid_argument("build_features: no capacity factor series");
  const std::size_t n = frame.horizon_len;
  std::array<std::vector<double>, 5> base;
  for (auto& b : base) b.resize(n);
  FeatureMatrix out;
  for (std::size_t h = 0; h < n; ++h) {
    const double d = frame.demand[h];
    const double f = frame.capacity_factor[0][h];
    const double vre = f * c.vre_capacity;
    base[0][h] = d;
    base[1][h] = f;
    base[2][h] = vre;
    if (d > 0.0) {
      base[3][h] = vre / d;
    } else {
      base[3][h] = 0.0;
      ++out.zero_demand_rows;
    }
    const double cap = vre + c.thermal_capacity;
    base[4][h] = cap > 0.0 ? d / cap : 0.0;
  }
  for (std::size_t b = 0; b < base.size(); ++b)
    for (int o = -max_lag; o <= max_lag; ++o) out.names.push_back(feature_name(kBaseFeatures[b], o));
  out.rows = n;
  out.data.resize(n * out.names.size());
  const auto last = static_cast<std::ptrdiff_t>(n) - 1;
  for (std::size_t h = 0; h < n; ++h) {
    std::size_t col = 0;
    for (std::size_t b = 0; b < base.size(); ++b) {
      for (int o = -max_lag; o <= max_lag; ++o) {
        const auto src = std::clamp(static_cast<std::ptrdiff_t>(h) + o, std::ptrdiff_t{0}, last);
        out.data[h * out.names.size() + col++] = base[b][static_cast<std::size_t>(src)];
      }
    }
  }
  return out;
}

/// Labels for the classifier: true where the cut rule flags an hour.
inline std::vector<bool> label_periods(std::span<const PeriodDiagnostics> diag, double e_min,
                                       double activity_tol = 1e-7) {
  return find_cut_flags(diag, e_min, activity_tol);
}

/// Column-wise z-scores. Constant columns map to 0.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> sd;

  static Standardizer fit(const FeatureMatrix& x) {
    Standardizer s;
    const std::size_t p = x.cols();
    s.mean.assign(p, 0.0);
    s.sd.assign(p, 0.0);
    for (std::size_t r = 0; r < x.rows; ++r)
      for (std::size_t c = 0; c < p; ++c) s.mean[c] += x.at(r, c);
    for (auto& m : s.mean) m /= static_cast<double>(std::max<std::size_t>(1, x.rows));
    for (std::size_t r = 0; r < x.rows; ++r)
      for (std::size_t c = 0; c < p; ++c) s.sd[c] += (x.at(r, c) - s.mean[c]) * (x.at(r, c) - s.mean[c]);
    for (auto& v : s.sd) v = std::sqrt(v / static_cast<double>(std::max<std::size_t>(1, x.rows)));
    return s;
  }

  FeatureMatrix transform(const FeatureMatrix& x) const {
    FeatureMatrix out = x;
    const std::size_t p = x.cols();
    for (std::size_t r = 0; r < x.rows; ++r) {
      for (std::size_t c = 0; c < p; ++c) {
        const double scale = sd[c] > 1e-12 * std::max(1.0, std::abs(mean[c])) ? sd[c] : 0.0;
        out.at(r, c) = scale > 0.0 ? (x.at(r, c) - mean[c]) / scale : 0.0;
      }
    }
    return out;
  }
};

struct LogisticOptions {
  double l2 = 1e-3;  // penalty weight on the mean log-likelihood
  std::size_t max_epochs = 5000;
  double grad_tol = 1e-6;  // max-norm of the gradient at convergence
  double threshold = 0.01;  // keep columns with importance above this
};

struct FeatureSelection {
  std::vector<std::string> names;        // all candidate columns
  std::vector<double> coef;              // on standardized columns
  double intercept = 0.0;
  std::vector<double> importance;        // |coef| / sum |coef|
  std::vector<std::string> kept;         // importance > threshold, input order
  bool converged = false;
  std::size_t epochs = 0;
};

/// L2-regularized logistic regression fitted by full-batch gradient ascent
/// on the standardized columns of `x`; importance_j = |coef_j| / sum |coef|.
inline FeatureSelection select_features(const FeatureMatrix& x, const std::vector<bool>& y,
                                        const LogisticOptions& o = {}) {
  if (y.size() != x.rows) throw std::invalid_argument("select_features: one label per row");
  if (x.rows == 0) throw std::invalid_argument("select_features: no rows");
  const FeatureMatrix z = Standardizer::fit(x).transform(x);
  const std::size_t n = z.rows;
  const std::size_t p = z.cols();
  const double inv_n = 1.0 / static_cast<double>(n);

  // Parameters are packed as [w_0 .. w_{p-1}, intercept].
  auto objective = [&](const std::vector<double>& th) {
    double ll = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      double s = th[p];
      for (std::size_t c = 0; c < p; ++c) s += th[c] * z.at(r, c);
      // log sigma(s) = -log(1 + e^-s), log(1 - sigma(s)) = -log(1 + e^s)
      ll -= std::log1p(std::exp(-std::abs(s))) + std::max(0.0, y[r] ? -s : s);
    }
    double pen = 0.0;
    for (std::size_t c = 0; c < p; ++c) pen += th[c] * th[c];
    return ll * inv_n - 0.5 * o.l2 * pen;
  };
  auto gradient = [&](const std::vector<double>& th, std::vector<double>& g) {
    g.assign(p + 1, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      double s = th[p];
      for (std::size_t c = 0; c < p; ++c) s += th[c] * z.at(r, c);
      const double resid = (y[r] ? 1.0 : 0.0) - 1.0 / (1.0 + std::exp(-s));
      g[p] += resid;
      for (std::size_t c = 0; c < p; ++c) g[c] += resid * z.at(r, c);
    }
    for (std::size_t c = 0; c <= p; ++c) g[c] *= inv_n;
    for (std::size_t c = 0; c < p; ++c) g[c] -= o.l2 * th[c];
  };

  // Accelerated gradient ascent with backtracking and adaptive restart.
  FeatureSelection out;
  out.names = x.names;
  std::vector<double> th(p + 1, 0.0);
  std::vector<double> prev = th;
  std::vector<double> look(p + 1);
  std::vector<double> cand(p + 1);
  std::vector<double> g;
  double step = 1.0;
  double momentum = 1.0;
  double f = objective(th);
  for (out.epochs = 0; out.epochs < o.max_epochs; ++out.epochs) {
    const double next_m = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    const double beta = (momentum - 1.0) / next_m;
    for (std::size_t c = 0; c <= p; ++c) look[c] = th[c] + beta * (th[c] - prev[c]);
    gradient(look, g);
    double gsq = 0.0;
    for (double v : g) gsq += v * v;
    const double f_look = objective(look);
    while (true) {
      for (std::size_t c = 0; c <= p; ++c) cand[c] = look[c] + step * g[c];
      if (objective(cand) >= f_look + 0.5 * step * gsq || step < 1e-12) break;
      step *= 0.5;
    }
    const double fc = objective(cand);
    prev = th;
    if (fc < f) {
      // Restart: drop the momentum and retry from the current iterate.
      momentum = 1.0;
      prev = th;
      continue;
    }
    th = cand;
    f = fc;
    momentum = next_m;
    step *= 1.1;
    gradient(th, g);
    double gmax = 0.0;
    for (double v : g) gmax = std::max(gmax, std::abs(v));
    if (gmax < o.grad_tol) {
      out.converged = true;
      ++out.epochs;
      break;
    }
  }
  const std::vector<double> w(th.begin(), th.begin() + static_cast<std::ptrdiff_t>(p));
  out.intercept = th[p];
  out.coef = w;
  double total = 0.0;
  for (double v : w) total += std::abs(v);
  out.importance.assign(p, 0.0);
  for (std::size_t c = 0; c < p; ++c) {
    out.importance[c] = total > 0.0 ? std::abs(w[c]) / total : 0.0;
    if (out.importance[c] > o.threshold) out.kept.push_back(x.names[c]);
  }
  return out;
}

inline void write_importance_csv(std::ostream& os, const FeatureSelection& s) {
  os << "feature,importance,coefficient,kept\n";
  for (std::size_t c = 0; c < s.names.size(); ++c) {
    const bool kept = std::find(s.kept.begin(), s.kept.end(), s.names[c]) != s.kept.end();
    os << s.names[c] << ',' << detail::fmt_num(s.importance[c]) << ',' << detail::fmt_num(s.coef[c]) << ','
       << (kept ? 1 : 0) << '\n';
  }
}

/// Confusion counts with the empty class as positive.
struct ClassifierReport {
  std::size_t tp = 0;  // truth empty, predicted empty
  std::size_t fn = 0;  // truth empty, predicted not empty
  std::size_t fp = 0;  // truth not empty, predicted empty
  std::size_t tn = 0;  // truth not empty, predicted not empty

  std::size_t total() const { return tp + fn + fp + tn; }
  double accuracy() const {
    return total() ? static_cast<double>(tp + tn) / static_cast<double>(total()) : 0.0;
  }
  /// Mean of the per-class recalls over the classes present in the truth.
  double balanced_accuracy() const {
    double sum = 0.0;
    int classes = 0;
    if (tp + fn > 0) {
      sum += static_cast<double>(tp) / static_cast<double>(tp + fn);
      ++classes;
    }
    if (tn + fp > 0) {
      sum += static_cast<double>(tn) / static_cast<double>(tn + fp);
      ++classes;
    }
    return classes ? sum / classes : 0.0;
  }
  friend bool operator==(const ClassifierReport&, const ClassifierReport&) = default;
};

inline ClassifierReport confusion(const std::vector<bool>& truth, const std::vector<bool>& pred) {
  if (truth.size() != pred.size()) throw std::invalid_argument("confusion: length mismatch");
  ClassifierReport r;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i]) {
      ++(pred[i] ? r.tp : r.fn);
    } else {
      ++(pred[i] ? r.fp : r.tn);
    }
  }
  return r;
}

enum class FeatureFraction { Sqrt, Third };

inline const char* to_string(FeatureFraction f) { return f == FeatureFraction::Sqrt ? "sqrt" : "third"; }

struct ForestParams {
  std::size_t trees = 100;
  std::size_t max_depth = 0;  // 0 = unlimited
  std::size_t min_leaf = 1;
  FeatureFraction fraction = FeatureFraction::Sqrt;
  std::size_t bins = 64;  // histogram bins per feature
  std::uint64_t seed = 1;
  friend bool operator==(const ForestParams&, const ForestParams&) = default;
};

inline std::size_t features_per_split(FeatureFraction f, std::size_t p) {
  const double v = f == FeatureFraction::Sqrt ? std::sqrt(static_cast<double>(p)) : static_cast<double>(p) / 3.0;
  return std::clamp<std::size_t>(static_cast<std::size_t>(v), 1, std::max<std::size_t>(1, p));
}

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;     // go left when x <= threshold
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::array<std::uint32_t, 2> count{0, 0};  // bootstrap samples per class
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;

  bool predict(std::span<const double> x) const {
    std::size_t i = 0;
    while (nodes[i].feature >= 0) {
      i = static_cast<std::size_t>(x[static_cast<std::size_t>(nodes[i].feature)] <= nodes[i].threshold
                                       ? nodes[i].left
                                       : nodes[i].right);
    }
    return nodes[i].count[1] > nodes[i].count[0];
  }
  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;
};

struct ForestModel {
  ForestParams params;
  std::vector<std::string> features;
  std::vector<DecisionTree> trees;

  /// Majority vote; ties predict not empty.
  bool predict_row(std::span<const double> x) const {
    std::size_t votes = 0;
    for (const auto& t : trees) votes += t.predict(x) ? 1 : 0;
    return 2 * votes > trees.size();
  }
  /// Predictions for every row; columns are looked up by name.
  std::vector<bool> predict(const FeatureMatrix& x) const {
    const FeatureMatrix xs = x.select(features);
    std::vector<bool> out(xs.rows);
    for (std::size_t r = 0; r < xs.rows; ++r) {
      out[r] = predict_row(std::span<const double>(&xs.data[r * xs.cols()], xs.cols()));
    }
    return out;
  }
  friend bool operator==(const ForestModel&, const ForestModel&) = default;
};

namespace detail {

// Candidate split points per feature: midpoints between consecutive distinct
// values, thinned to at most bins - 1 quantile cuts.
inline std::vector<std::vector<double>> bin_edges(const FeatureMatrix& x, std::size_t bins) {
  std::vector<std::vector<double>> edges(x.cols());
  for (std::size_t c = 0; c < x.cols(); ++c) {
    std::vector<double> v = x.column(c);
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    std::vector<double> mids;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) mids.push_back(0.5 * (v[i] + v[i + 1]));
    if (mids.size() + 1 <= bins) {
      edges[c] = std::move(mids);
    } else {
      std::vector<double> col = x.column(c);
      std::sort(col.begin(), col.end());
      for (std::size_t k = 1; k < bins; ++k) {
        const std::size_t i = k * col.size() / bins;
        const double lo = col[i - 1];
        const double hi = col[i];
        const double e = lo < hi ? 0.5 * (lo + hi) : lo;
        if (edges[c].empty() || e > edges[c].back()) edges[c].push_back(e);
      }
      // Cuts equal to a data value must keep that value on the left.
      if (!edges[c].empty() && edges[c].back() >= v.back()) edges[c].pop_back();
    }
  }
  return edges;
}

inline double gini(double n0, double n1) {
  const double n = n0 + n1;
  if (n <= 0.0) return 0.0;
  const double p0 = n0 / n;
  const double p1 = n1 / n;
  return 1.0 - p0 * p0 - p1 * p1;
}

class TreeBuilder {
 public:
  TreeBuilder(const std::vector<std::uint16_t>& binned, std::size_t p, const std::vector<std::vector<double>>& edges,
              const std::vector<bool>& y, const ForestParams& params, std::uint64_t seed)
      : binned_(binned), p_(p), edges_(edges), y_(y), params_(params), rng_(seed) {}

  DecisionTree build() {
    const std::size_t n = y_.size();
    std::vector<std::size_t> sample(n);
    for (auto& s : sample) s = static_cast<std::size_t>(rng_() % n);
    std::sort(sample.begin(), sample.end());
    tree_.nodes.clear();
    grow(sample, 0);
    return std::move(tree_);
  }

 private:
  std::int32_t grow(std::vector<std::size_t>& idx, std::size_t depth) {
    const auto me = static_cast<std::int32_t>(tree_.nodes.size());
    tree_.nodes.push_back(TreeNode{});
    std::array<std::uint32_t, 2> cnt{0, 0};
    for (std::size_t i : idx) ++cnt[y_[i] ? 1 : 0];
    tree_.nodes[static_cast<std::size_t>(me)].count = cnt;
    const bool depth_ok = params_.max_depth == 0 || depth < params_.max_depth;
    if (cnt[0] == 0 || cnt[1] == 0 || !depth_ok || idx.size() < 2 * params_.min_leaf) return me;

    // Features considered at this node: partial Fisher-Yates draw.
    const std::size_t m = features_per_split(params_.fraction, p_);
    std::vector<std::size_t> feats(p_);
    std::iota(feats.begin(), feats.end(), std::size_t{0});
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t j = k + static_cast<std::size_t>(rng_() % (p_ - k));
      std::swap(feats[k], feats[j]);
    }
    const double n = static_cast<double>(idx.size());
    const double parent = gini(cnt[0], cnt[1]);
    double best_gain = 1e-12;
    std::int64_t best_feat = -1;
    std::size_t best_bin = 0;
    std::vector<std::array<std::uint32_t, 2>> hist;
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t f = feats[k];
      const std::size_t nb = edges_[f].size() + 1;
      if (nb < 2) continue;
      hist.assign(nb, {0, 0});
      for (std::size_t i : idx) ++hist[binned_[i * p_ + f]][y_[i] ? 1 : 0];
      double l0 = 0.0;
      double l1 = 0.0;
      for (std::size_t b = 0; b + 1 < nb; ++b) {
        l0 += hist[b][0];
        l1 += hist[b][1];
        const double nl = l0 + l1;
        const double nr = n - nl;
        if (nl < static_cast<double>(params_.min_leaf) || nr < static_cast<double>(params_.min_leaf)) continue;
        const double child = (nl * gini(l0, l1) + nr * gini(cnt[0] - l0, cnt[1] - l1)) / n;
        const double gain = parent - child;
        if (gain > best_gain) {
          best_gain = gain;
          best_feat = static_cast<std::int64_t>(f);
          best_bin = b;
        }
      }
    }
    if (best_feat < 0) return me;
    const auto f = static_cast<std::size_t>(best_feat);
    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (std::size_t i : idx) (binned_[i * p_ + f] <= best_bin ? left : right).push_back(i);
    idx.clear();
    idx.shrink_to_fit();
    const std::int32_t l = grow(left, depth + 1);
    const std::int32_t r = grow(right, depth + 1);
    auto& node = tree_.nodes[static_cast<std::size_t>(me)];
    node.feature = static_cast<std::int32_t>(f);
    node.threshold = edges_[f][best_bin];
    node.left = l;
    node.right = r;
    return me;
  }

  const std::vector<std::uint16_t>& binned_;
  std::size_t p_;
  const std::vector<std::vector<double>>& edges_;
  const std::vector<bool>& y_;
  ForestParams params_;
  std::mt19937_64 rng_;
  DecisionTree tree_;
};

inline std::uint64_t tree_seed(std::uint64_t seed, std::size_t t) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(t) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Fits a forest of Gini trees on bootstrap samples. Tree t uses a seed
/// derived from (params.seed, t), so the model does not depend on `threads`.
inline ForestModel fit_forest(const FeatureMatrix& x, const std::vector<bool>& y, const ForestParams& params,
                              std::size_t threads = 1) {
  if (y.size() != x.rows || x.rows == 0) throw std::invalid_argument("fit_forest: one label per row required");
  if (std::none_of(y.begin(), y.end(), [](bool v) { return v; }) ||
      std::all_of(y.begin(), y.end(), [](bool v) { return v; })) {
    throw std::invalid_argument("fit_forest: training labels contain a single class");
  }
  if (params.trees == 0 || params.min_leaf == 0 || params.bins < 2 || params.bins > 65536) {
    throw std::invalid_argument("fit_forest: invalid parameters");
  }
  const std::size_t p = x.cols();
  const auto edges = detail::bin_edges(x, params.bins);
  std::vector<std::uint16_t> binned(x.rows * p);
  for (std::size_t r = 0; r < x.rows; ++r) {
    for (std::size_t c = 0; c < p; ++c) {
      const auto& e = edges[c];
      binned[r * p + c] = static_cast<std::uint16_t>(std::lower_bound(e.begin(), e.end(), x.at(r, c)) - e.begin());
    }
  }
  ForestModel m;
  m.params = params;
  m.features = x.names;
  m.trees.resize(params.trees);
  parallel_for(params.trees, threads, [&](std::size_t t) {
    detail::TreeBuilder b(binned, p, edges, y, params, detail::tree_seed(params.seed, t));
    m.trees[t] = b.build();
  });
  return m;
}

inline ClassifierReport evaluate(const ForestModel& m, const FeatureMatrix& x, const std::vector<bool>& y) {
  return confusion(y, m.predict(x));
}

struct ForestGrid {
  std::vector<std::size_t> trees{100, 300};
  std::vector<std::size_t> max_depth{8, 16, 0};
  std::vector<std::size_t> min_leaf{1, 5};
  std::vector<FeatureFraction> fraction{FeatureFraction::Sqrt, FeatureFraction::Third};
};

struct TrainOptions {
  ForestGrid grid;
  double train_fraction = 0.8;  // chronological split
  std::uint64_t seed = 1;
  std::size_t bins = 64;
  std::size_t threads = 1;
};

struct GridPoint {
  ForestParams params;
  ClassifierReport validation;
};

struct TrainResult {
  ForestModel model;
  ClassifierReport validation;
  std::vector<GridPoint> grid;
};

/// Trains on the first train_fraction of the rows, scores every grid point
/// on the remaining rows and keeps the best balanced accuracy (first in grid
/// order on ties).
inline TrainResult train_forest(const FeatureMatrix& x, const std::vector<bool>& y, const TrainOptions& o = {}) {
  if (y.size() != x.rows) throw std::invalid_argument("train_forest: one label per row");
  const auto cut = static_cast<std::size_t>(std::floor(o.train_fraction * static_cast<double>(x.rows)));
  if (cut == 0 || cut >= x.rows) throw std::invalid_argument("train_forest: empty training or validation split");
  const FeatureMatrix xt = x.slice_rows(0, cut);
  const FeatureMatrix xv = x.slice_rows(cut, x.rows);
  const std::vector<bool> yt(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(cut));
  const std::vector<bool> yv(y.begin() + static_cast<std::ptrdiff_t>(cut), y.end());
  TrainResult out;
  bool have = false;
  for (std::size_t nt : o.grid.trees) {
    for (std::size_t depth : o.grid.max_depth) {
      for (std::size_t leaf : o.grid.min_leaf) {
        for (FeatureFraction fr : o.grid.fraction) {
          const ForestParams params{nt, depth, leaf, fr, o.bins, o.seed};
          ForestModel m = fit_forest(xt, yt, params, o.threads);
          const ClassifierReport rep = evaluate(m, xv, yv);
          out.grid.push_back({params, rep});
          if (!have || rep.balanced_accuracy() > out.validation.balanced_accuracy()) {
            out.model = std::move(m);
            out.validation = rep;
            have = true;
          }
        }
      }
    }
  }
  if (!have) throw std::invalid_argument("train_forest: empty grid");
  return out;
}

inline constexpr const char* kForestMagic = "etsa-forest";
inline constexpr int kForestVersion = 1;

/// Text format: header, parameters, feature names, then one line per node.
inline void write_forest(std::ostream& os, const ForestModel& m) {
  os << kForestMagic << ' ' << kForestVersion << '\n';
  os << "params " << m.params.trees << ' ' << m.params.max_depth << ' ' << m.params.min_leaf << ' '
     << to_string(m.params.fraction) << ' ' << m.params.bins << ' ' << m.params.seed << '\n';
  os << "features " << m.features.size() << '\n';
  for (const auto& f : m.features) os << f << '\n';
  char buf[32];
  for (const auto& t : m.trees) {
    os << "tree " << t.nodes.size() << '\n';
    for (const auto& n : t.nodes) {
      std::snprintf(buf, sizeof buf, "%.17g", n.threshold);
      os << n.feature << ' ' << buf << ' ' << n.left << ' ' << n.right << ' ' << n.count[0] << ' ' << n.count[1]
         << '\n';
    }
  }
}

inline ForestModel read_forest(std::istream& is) {
  auto fail = [](const std::string& what) { return std::runtime_error("read_forest: " + what); };
  std::string magic;
  int version = 0;
  if (!(is >> magic >> version) || magic != kForestMagic) throw fail("not a forest file");
  if (version != kForestVersion) throw fail("unsupported version " + std::to_string(version));
  ForestModel m;
  std::string tag;
  std::string frac;
  if (!(is >> tag >> m.params.trees >> m.params.max_depth >> m.params.min_leaf >> frac >> m.params.bins >>
        m.params.seed) ||
      tag != "params") {
    throw fail("bad params line");
  }
  if (frac == "sqrt") {
    m.params.fraction = FeatureFraction::Sqrt;
  } else if (frac == "third") {
    m.params.fraction = FeatureFraction::Third;
  } else {
    throw fail("unknown feature fraction '" + frac + "'");
  }
  std::size_t nf = 0;
  if (!(is >> tag >> nf) || tag != "features") throw fail("bad features line");
  m.features.resize(nf);
  for (auto& f : m.features)
    if (!(is >> f)) throw fail("truncated feature list");
  m.trees.resize(m.params.trees);
  for (auto& t : m.trees) {
    std::size_t nn = 0;
    if (!(is >> tag >> nn) || tag != "tree" || nn == 0) throw fail("bad tree header");
    t.nodes.resize(nn);
    for (auto& n : t.nodes) {
      std::string thr;
      if (!(is >> n.feature >> thr >> n.left >> n.right >> n.count[0] >> n.count[1])) throw fail("truncated tree");
      n.threshold = std::stod(thr);
      const auto lim = static_cast<std::int32_t>(nn);
      if (n.feature >= static_cast<std::int32_t>(nf) ||
          (n.feature >= 0 && (n.left <= 0 || n.left >= lim || n.right <= 0 || n.right >= lim))) {
        throw fail("node index out of range");
      }
    }
  }
  return m;
}

}  // namespace etsa
