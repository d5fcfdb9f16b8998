#pragma once

// Regression trees: exact and random-threshold CART growth, plus
// histogram-based second-order trees for gradient boosting.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "tabens/error.hpp"
#include "tabens/matrix.hpp"
#include "tabens/random.hpp"

namespace tabens {

enum class ThresholdMode { exact, random };

struct TreeConfig {
  std::optional<std::size_t> max_depth;  // none = grow until pure or too small
  std::size_t min_samples_split = 2;
  std::size_t min_samples_leaf = 1;
  std::optional<std::size_t> max_features;  // per-split random feature subset
  ThresholdMode threshold_mode = ThresholdMode::exact;

  void check(std::size_t n_features) const {
    if (min_samples_split < 2) throw InvalidArgument("min_samples_split must be >= 2");
    if (min_samples_leaf < 1) throw InvalidArgument("min_samples_leaf must be >= 1");
    if (max_features && (*max_features < 1 || *max_features > n_features))
      throw InvalidArgument("max_features must lie in [1, p]");
  }
};

inline TreeConfig depth_limited(std::size_t max_depth) {
  TreeConfig c;
  c.max_depth = max_depth;
  return c;
}

struct SplitCandidate {
  std::size_t feature = 0;
  double threshold = 0.0;
  double impurity_decrease = 0.0;  // weighted SSE reduction
};

// Arena node. Leaves have feature == npos; internal nodes route x[feature] <= threshold left.
struct TreeNode {
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  std::size_t feature = npos;
  double threshold = 0.0;
  std::size_t left = 0;
  std::size_t right = 0;
  double value = 0.0;
  std::size_t n_samples = 0;

  bool is_leaf() const noexcept { return feature == npos; }
  bool operator==(const TreeNode&) const = default;
};

class RegressionTree {
public:
  RegressionTree() = default;
  RegressionTree(std::vector<TreeNode> nodes, std::size_t n_features)
      : nodes_(std::move(nodes)), n_features_(n_features) {
    if (nodes_.empty()) throw InvalidArgument("a tree needs at least one node");
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const auto& nd = nodes_[i];
      if (nd.is_leaf()) continue;
      if (nd.feature >= n_features_ || nd.left <= i || nd.right <= i || nd.left >= nodes_.size() ||
          nd.right >= nodes_.size())
        throw InvalidArgument("malformed tree node " + std::to_string(i));
    }
  }

  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  std::size_t n_features() const noexcept { return n_features_; }

  double predict_one(std::span<const double> x) const noexcept {
    std::size_t i = 0;
    while (!nodes_[i].is_leaf()) i = x[nodes_[i].feature] <= nodes_[i].threshold ? nodes_[i].left : nodes_[i].right;
    return nodes_[i].value;
  }

  std::size_t leaf_count() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
  }

  std::size_t depth() const {
    std::vector<std::size_t> d(nodes_.size(), 0);
    std::size_t best = 0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      best = std::max(best, d[i]);
      if (!nodes_[i].is_leaf()) d[nodes_[i].left] = d[nodes_[i].right] = d[i] + 1;
    }
    return best;
  }

  bool operator==(const RegressionTree&) const = default;

private:
  std::vector<TreeNode> nodes_;
  std::size_t n_features_ = 0;
};

inline std::vector<double> predict_tree(const RegressionTree& tree, const FeatureMatrix& X) {
  if (X.rows() > 0 && X.cols() != tree.n_features())
    throw DimensionMismatch("tree expects " + std::to_string(tree.n_features()) + " features, got " +
                            std::to_string(X.cols()));
  std::vector<double> out(X.rows());
  for (std::size_t i = 0; i < X.rows(); ++i) out[i] = tree.predict_one(X.row(i));
  return out;
}

inline void to_json(nlohmann::json& j, const RegressionTree& t) {
  auto nodes = nlohmann::json::array();
  for (const auto& n : t.nodes()) {
    if (n.is_leaf())
      nodes.push_back({{"value", n.value}, {"n", n.n_samples}});
    else
      nodes.push_back({{"feature", n.feature},
                       {"threshold", n.threshold},
                       {"left", n.left},
                       {"right", n.right},
                       {"value", n.value},
                       {"n", n.n_samples}});
  }
  j = {{"n_features", t.n_features()}, {"nodes", std::move(nodes)}};
}

inline void from_json(const nlohmann::json& j, RegressionTree& t) {
  std::vector<TreeNode> nodes;
  for (const auto& jn : j.at("nodes")) {
    TreeNode n;
    n.value = jn.at("value").get<double>();
    n.n_samples = jn.at("n").get<std::size_t>();
    if (jn.contains("feature")) {
      n.feature = jn.at("feature").get<std::size_t>();
      n.threshold = jn.at("threshold").get<double>();
      n.left = jn.at("left").get<std::size_t>();
      n.right = jn.at("right").get<std::size_t>();
    }
    nodes.push_back(n);
  }
  t = RegressionTree(std::move(nodes), j.at("n_features").get<std::size_t>());
}

namespace detail {

// Midpoint of two consecutive distinct values, kept strictly below `hi`
// so that `lo` routes left and `hi` routes right.
inline double midpoint(double lo, double hi) noexcept {
  const double m = lo + (hi - lo) / 2.0;
  return m < hi ? m : lo;
}

// Relative slack under which two split scores count as tied.
inline constexpr double kTieTolerance = 1e-12;

inline double weighted_mean(std::span<const double> y, std::span<const double> w,
                            std::span<const std::size_t> rows) noexcept {
  double sw = 0.0, swy = 0.0;
  for (auto i : rows) {
    sw += w[i];
    swy += w[i] * y[i];
  }
  return sw > 0.0 ? swy / sw : 0.0;
}

inline double weighted_sse(std::span<const double> y, std::span<const double> w,
                           std::span<const std::size_t> rows) noexcept {
  const double mu = weighted_mean(y, w, rows);
  double s = 0.0;
  for (auto i : rows) s += w[i] * (y[i] - mu) * (y[i] - mu);
  return s;
}

}  // namespace detail

/// Best axis-aligned split of the samples `rows` over the candidate
/// `features`, or none when no legal split lowers the weighted SSE.
///
/// Exact mode scans midpoints between consecutive distinct values; random
/// mode draws one uniform threshold per non-constant feature. Both sides
/// must keep at least `min_samples_leaf` samples. Near-ties resolve to the
/// lowest feature index, then the lowest threshold.
inline std::optional<SplitCandidate> find_best_split(const FeatureMatrix& X, std::span<const double> y,
                                                     std::span<const double> w,
                                                     std::span<const std::size_t> rows,
                                                     std::span<const std::size_t> features, ThresholdMode mode,
                                                     std::size_t min_samples_leaf, Rng& rng) {
  const std::size_t m = rows.size();
  if (m < 2 || m < 2 * min_samples_leaf) return std::nullopt;

  const double mu = detail::weighted_mean(y, w, rows);
  double W = 0.0, S = 0.0, parent_sse = 0.0;
  bool constant = true;
  for (auto i : rows) {
    const double c = y[i] - mu;
    W += w[i];
    S += w[i] * c;
    parent_sse += w[i] * c * c;
    constant = constant && y[i] == y[rows.front()];
  }
  if (constant || W <= 0.0 || parent_sse <= 0.0) return std::nullopt;
  const double base = S * S / W;
  const double floor = detail::kTieTolerance * parent_sse;

  std::optional<SplitCandidate> best;
  std::vector<std::pair<double, std::size_t>> sorted;
  sorted.reserve(m);

  auto consider = [&](std::size_t f, double threshold, double decrease) {
    if (decrease <= floor) return;
    if (!best || decrease > best->impurity_decrease + floor) best = SplitCandidate{f, threshold, decrease};
  };

  for (auto f : features) {
    if (mode == ThresholdMode::exact) {
      sorted.clear();
      for (auto i : rows) sorted.emplace_back(X(i, f), i);
      std::sort(sorted.begin(), sorted.end());
      double wl = 0.0, sl = 0.0;
      for (std::size_t k = 0; k + 1 < m; ++k) {
        const auto i = sorted[k].second;
        wl += w[i];
        sl += w[i] * (y[i] - mu);
        if (sorted[k].first == sorted[k + 1].first) continue;
        const std::size_t nl = k + 1;
        if (nl < min_samples_leaf || m - nl < min_samples_leaf) continue;
        const double wr = W - wl;
        if (wl <= 0.0 || wr <= 0.0) continue;
        const double sr = S - sl;
        consider(f, detail::midpoint(sorted[k].first, sorted[k + 1].first), sl * sl / wl + sr * sr / wr - base);
      }
    } else {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (auto i : rows) {
        lo = std::min(lo, X(i, f));
        hi = std::max(hi, X(i, f));
      }
      if (!(hi > lo)) continue;
      double t = rng.uniform(lo, hi);
      if (t >= hi || t < lo) t = lo;
      double wl = 0.0, sl = 0.0;
      std::size_t nl = 0;
      for (auto i : rows) {
        if (X(i, f) <= t) {
          wl += w[i];
          sl += w[i] * (y[i] - mu);
          ++nl;
        }
      }
      if (nl < min_samples_leaf || m - nl < min_samples_leaf) continue;
      const double wr = W - wl;
      if (wl <= 0.0 || wr <= 0.0) continue;
      const double sr = S - sl;
      consider(f, t, sl * sl / wl + sr * sr / wr - base);
    }
  }
  if (!best) return std::nullopt;

  // Report the decrease of the chosen partition by direct two-pass sums.
  std::vector<std::size_t> left, right;
  for (auto i : rows) (X(i, best->feature) <= best->threshold ? left : right).push_back(i);
  best->impurity_decrease = detail::weighted_sse(y, w, rows) - detail::weighted_sse(y, w, left) -
                            detail::weighted_sse(y, w, right);
  if (!(best->impurity_decrease > 0.0)) return std::nullopt;
  return best;
}

// Convenience overload over all rows.
inline std::optional<SplitCandidate> find_best_split(const FeatureMatrix& X, std::span<const double> y,
                                                     std::span<const double> w,
                                                     std::span<const std::size_t> features, ThresholdMode mode,
                                                     std::size_t min_samples_leaf, Rng& rng) {
  std::vector<std::size_t> rows(X.rows());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return find_best_split(X, y, w, rows, features, mode, min_samples_leaf, rng);
}

/// Depth-first greedy growth. Samples with zero weight take no part in the
/// fit (bootstrap counts arrive as weights). Leaf values are weighted means.
inline RegressionTree fit_tree(const FeatureMatrix& X, std::span<const double> y, std::span<const double> w,
                               const TreeConfig& config, Rng& rng) {
  const std::size_t n = X.rows();
  const std::size_t p = X.cols();
  if (y.size() != n || w.size() != n)
    throw DimensionMismatch("fit_tree: X has " + std::to_string(n) + " rows, y " + std::to_string(y.size()) +
                            ", w " + std::to_string(w.size()));
  if (n == 0) throw InvalidArgument("fit_tree needs at least one sample");
  config.check(p);
  double total = 0.0;
  for (double wi : w) {
    if (!(wi >= 0.0) || !std::isfinite(wi)) throw InvalidArgument("sample weights must be finite and >= 0");
    total += wi;
  }
  if (!(total > 0.0)) throw InvalidArgument("sample weights are all zero");

  std::vector<std::size_t> order;
  order.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    if (w[i] > 0.0) order.push_back(i);

  std::vector<std::size_t> all_features(p);
  std::iota(all_features.begin(), all_features.end(), std::size_t{0});
  std::vector<std::size_t> features;

  struct Pending {
    std::size_t node, begin, end, depth;
  };
  std::vector<TreeNode> nodes(1);
  std::vector<Pending> stack{{0, 0, order.size(), 0}};

  while (!stack.empty()) {
    const auto job = stack.back();
    stack.pop_back();
    std::span<std::size_t> rows(order.data() + job.begin, job.end - job.begin);
    auto& node = nodes[job.node];
    node.value = detail::weighted_mean(y, w, rows);
    node.n_samples = rows.size();

    if ((config.max_depth && job.depth >= *config.max_depth) || rows.size() < config.min_samples_split)
      continue;

    if (config.max_features && *config.max_features < p) {
      // Partial Fisher-Yates draw, then ascending order for tie-breaking.
      features = all_features;
      for (std::size_t k = 0; k < *config.max_features; ++k)
        std::swap(features[k], features[k + rng.index(p - k)]);
      features.resize(*config.max_features);
      std::sort(features.begin(), features.end());
    } else {
      features = all_features;
    }

    auto split = find_best_split(X, y, w, rows, features, config.threshold_mode, config.min_samples_leaf, rng);
    if (!split) continue;

    auto mid = std::stable_partition(rows.begin(), rows.end(),
                                     [&](std::size_t i) { return X(i, split->feature) <= split->threshold; });
    const std::size_t n_left = static_cast<std::size_t>(mid - rows.begin());

    const std::size_t left = nodes.size();
    nodes[job.node].feature = split->feature;
    nodes[job.node].threshold = split->threshold;
    nodes[job.node].left = left;
    nodes[job.node].right = left + 1;
    nodes.resize(nodes.size() + 2);
    stack.push_back({left + 1, job.begin + n_left, job.end, job.depth + 1});
    stack.push_back({left, job.begin, job.begin + n_left, job.depth + 1});
  }
  return RegressionTree(std::move(nodes), p);
}

inline RegressionTree fit_tree(const FeatureMatrix& X, std::span<const double> y, const TreeConfig& config,
                               Rng& rng) {
  std::vector<double> w(X.rows(), 1.0);
  return fit_tree(X, y, w, config, rng);
}

// ---------------------------------------------------------------------------
// Histogram trees

// Per-feature ascending split thresholds; a value's bin is the number of
// thresholds <= value.
struct BinSpec {
  std::vector<std::vector<double>> thresholds;

  std::size_t n_features() const noexcept { return thresholds.size(); }
  std::size_t n_bins(std::size_t feature) const noexcept { return thresholds[feature].size() + 1; }

  std::uint8_t bin(std::size_t feature, double x) const noexcept {
    const auto& t = thresholds[feature];
    return static_cast<std::uint8_t>(std::upper_bound(t.begin(), t.end(), x) - t.begin());
  }

  bool operator==(const BinSpec&) const = default;
};

// Column-major bin codes: code(i, j) = codes[j * rows + i].
struct BinnedMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> codes;

  std::uint8_t operator()(std::size_t i, std::size_t j) const noexcept { return codes[j * rows + i]; }
};

/// Bins every feature into at most `max_bins` bins. Features with few
/// distinct values get one bin per value; otherwise the sorted distinct
/// values are cut into `max_bins` groups of near-equal size. Thresholds
/// are always midpoints between neighbouring distinct values.
inline std::pair<BinSpec, BinnedMatrix> build_bins(const FeatureMatrix& X, std::size_t max_bins = 255) {
  if (max_bins < 2 || max_bins > 255) throw InvalidArgument("max_bins must lie in [2, 255]");
  BinSpec spec;
  spec.thresholds.resize(X.cols());
  BinnedMatrix binned{X.rows(), X.cols(), std::vector<std::uint8_t>(X.rows() * X.cols())};

  std::vector<double> u;
  for (std::size_t j = 0; j < X.cols(); ++j) {
    u.clear();
    for (std::size_t i = 0; i < X.rows(); ++i) u.push_back(X(i, j));
    std::sort(u.begin(), u.end());
    u.erase(std::unique(u.begin(), u.end()), u.end());
    auto& t = spec.thresholds[j];
    const std::size_t d = u.size();
    if (d <= max_bins) {
      for (std::size_t k = 0; k + 1 < d; ++k) t.push_back(detail::midpoint(u[k], u[k + 1]));
    } else {
      for (std::size_t k = 1; k < max_bins; ++k) {
        const std::size_t at = k * d / max_bins;  // strictly increasing in k, 1 <= at <= d-1
        t.push_back(detail::midpoint(u[at - 1], u[at]));
      }
    }
    for (std::size_t i = 0; i < X.rows(); ++i) binned.codes[j * X.rows() + i] = spec.bin(j, X(i, j));
  }
  return {std::move(spec), std::move(binned)};
}

struct HistTreeConfig {
  std::size_t max_leaf_nodes = 31;
  std::size_t min_samples_leaf = 20;
  double l2 = 0.0;
  std::optional<std::size_t> max_depth;

  void check() const {
    if (max_leaf_nodes < 1) throw InvalidArgument("max_leaf_nodes must be >= 1");
    if (min_samples_leaf < 1) throw InvalidArgument("min_samples_leaf must be >= 1");
    if (!(l2 >= 0.0)) throw InvalidArgument("l2 must be >= 0");
  }
};

namespace detail {

struct HistSplit {
  std::size_t feature = 0;
  std::size_t bin = 0;  // left = codes <= bin
  double gain = 0.0;
};

struct HistLeaf {
  std::size_t node = 0;
  std::vector<std::size_t> rows;
  double g = 0.0;
  double h = 0.0;
  std::size_t depth = 0;
  std::optional<HistSplit> split;
};

inline std::optional<HistSplit> best_hist_split(const BinnedMatrix& binned, const BinSpec& spec,
                                                std::span<const double> g, std::span<const double> h,
                                                const HistLeaf& leaf, const HistTreeConfig& cfg) {
  const std::size_t m = leaf.rows.size();
  if (m < 2 * cfg.min_samples_leaf) return std::nullopt;
  if (cfg.max_depth && leaf.depth >= *cfg.max_depth) return std::nullopt;

  const double lambda = cfg.l2;
  const double parent_score = leaf.h + lambda > 0.0 ? leaf.g * leaf.g / (leaf.h + lambda) : 0.0;
  std::optional<HistSplit> best;
  std::vector<double> hg, hh;
  std::vector<std::size_t> hc;

  for (std::size_t j = 0; j < binned.cols; ++j) {
    const std::size_t nb = spec.n_bins(j);
    if (nb < 2) continue;
    hg.assign(nb, 0.0);
    hh.assign(nb, 0.0);
    hc.assign(nb, 0);
    const auto* col = binned.codes.data() + j * binned.rows;
    for (auto i : leaf.rows) {
      const auto b = col[i];
      hg[b] += g[i];
      hh[b] += h[i];
      ++hc[b];
    }
    double gl = 0.0, hl = 0.0;
    std::size_t nl = 0;
    for (std::size_t b = 0; b + 1 < nb; ++b) {
      gl += hg[b];
      hl += hh[b];
      nl += hc[b];
      if (hc[b] == 0 && b > 0) continue;  // same partition as the previous bin
      if (nl < cfg.min_samples_leaf) continue;
      if (m - nl < cfg.min_samples_leaf) break;
      const double gr = leaf.g - gl;
      const double hr = leaf.h - hl;
      if (!(hl + lambda > 0.0) || !(hr + lambda > 0.0)) continue;
      const double sl = gl * gl / (hl + lambda);
      const double sr = gr * gr / (hr + lambda);
      const double gain = 0.5 * (sl + sr - parent_score);
      if (gain <= kTieTolerance * (sl + sr)) continue;
      if (!best || gain > best->gain + kTieTolerance * (sl + sr)) best = HistSplit{j, b, gain};
    }
  }
  return best;
}

}  // namespace detail

/// Leaf-wise (best-first) growth on binned features. The leaf with the
/// largest gain is split until `max_leaf_nodes` leaves exist or no split has
/// positive gain. Leaf value = -G / (H + l2). Internal thresholds are the
/// real-valued bin thresholds, so the tree predicts on raw features.
inline RegressionTree fit_hist_tree(const BinnedMatrix& binned, const BinSpec& spec, std::span<const double> g,
                                    std::span<const double> h, const HistTreeConfig& cfg = {}) {
  const std::size_t n = binned.rows;
  if (g.size() != n || h.size() != n)
    throw DimensionMismatch("fit_hist_tree: gradient/hessian length differs from row count");
  if (spec.n_features() != binned.cols) throw DimensionMismatch("fit_hist_tree: bin spec / matrix width differ");
  cfg.check();
  for (double hi : h)
    if (!(hi >= 0.0)) throw InvalidArgument("hessians must be >= 0");

  auto leaf_value = [&](double G, double H) { return H + cfg.l2 > 0.0 ? -G / (H + cfg.l2) : 0.0; };

  std::vector<TreeNode> nodes(1);
  std::vector<detail::HistLeaf> open;
  {
    detail::HistLeaf root;
    root.rows.resize(n);
    std::iota(root.rows.begin(), root.rows.end(), std::size_t{0});
    for (std::size_t i = 0; i < n; ++i) {
      root.g += g[i];
      root.h += h[i];
    }
    nodes[0].value = leaf_value(root.g, root.h);
    nodes[0].n_samples = n;
    if (cfg.max_leaf_nodes > 1) root.split = detail::best_hist_split(binned, spec, g, h, root, cfg);
    open.push_back(std::move(root));
  }

  std::size_t n_leaves = 1;
  while (n_leaves < cfg.max_leaf_nodes) {
    // Largest gain; earlier-created node wins ties.
    std::optional<std::size_t> pick;
    for (std::size_t k = 0; k < open.size(); ++k) {
      if (!open[k].split) continue;
      if (!pick || open[k].split->gain > open[*pick].split->gain ||
          (open[k].split->gain == open[*pick].split->gain && open[k].node < open[*pick].node))
        pick = k;
    }
    if (!pick) break;

    detail::HistLeaf parent = std::move(open[*pick]);
    open.erase(open.begin() + static_cast<std::ptrdiff_t>(*pick));
    const auto split = *parent.split;

    detail::HistLeaf left, right;
    const auto* col = binned.codes.data() + split.feature * n;
    for (auto i : parent.rows) {
      auto& side = col[i] <= split.bin ? left : right;
      side.rows.push_back(i);
      side.g += g[i];
      side.h += h[i];
    }
    left.node = nodes.size();
    right.node = nodes.size() + 1;
    left.depth = right.depth = parent.depth + 1;

    auto& pn = nodes[parent.node];
    pn.feature = split.feature;
    pn.threshold = spec.thresholds[split.feature][split.bin];
    pn.left = left.node;
    pn.right = right.node;
    nodes.resize(nodes.size() + 2);
    nodes[left.node].value = leaf_value(left.g, left.h);
    nodes[left.node].n_samples = left.rows.size();
    nodes[right.node].value = leaf_value(right.g, right.h);
    nodes[right.node].n_samples = right.rows.size();
    ++n_leaves;

    if (n_leaves < cfg.max_leaf_nodes) {
      left.split = detail::best_hist_split(binned, spec, g, h, left, cfg);
      right.split = detail::best_hist_split(binned, spec, g, h, right, cfg);
    }
    open.push_back(std::move(left));
    open.push_back(std::move(right));
  }
  return RegressionTree(std::move(nodes), binned.cols);
}

}  // namespace tabens
