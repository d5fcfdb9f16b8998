#pragma once

// The eight ensemble regressors behind one fit/predict contract.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "tabens/error.hpp"
#include "tabens/matrix.hpp"
#include "tabens/parallel.hpp"
#include "tabens/random.hpp"
#include "tabens/ridge.hpp"
#include "tabens/tree.hpp"

namespace tabens {

enum class ModelKind {
  AdaBoost,
  Bagging,
  ExtraTrees,
  GradientBoosting,
  HistGradientBoosting,
  RandomForest,
  Stacking,
  Voting,
};

inline constexpr std::array<ModelKind, 8> kAllModelKinds = {
    ModelKind::AdaBoost,       ModelKind::Bagging,
    ModelKind::ExtraTrees,     ModelKind::GradientBoosting,
    ModelKind::HistGradientBoosting, ModelKind::RandomForest,
    ModelKind::Stacking,       ModelKind::Voting,
};

// Report name of each model.
inline std::string_view display_name(ModelKind k) noexcept {
  switch (k) {
    case ModelKind::AdaBoost: return "Ada Boost Regressor";
    case ModelKind::Bagging: return "Bagging Regressor";
    case ModelKind::ExtraTrees: return "Extra Trees Regressor";
    case ModelKind::GradientBoosting: return "Gradient Boosting Regressor";
    case ModelKind::HistGradientBoosting: return "Hist Gradient Boosting Regressor";
    case ModelKind::RandomForest: return "Random Forest Regressor";
    case ModelKind::Stacking: return "Stacking Regressor";
    case ModelKind::Voting: return "Voting Regressor";
  }
  return "?";
}

inline std::string_view identifier(ModelKind k) noexcept {
  switch (k) {
    case ModelKind::AdaBoost: return "AdaBoost";
    case ModelKind::Bagging: return "Bagging";
    case ModelKind::ExtraTrees: return "ExtraTrees";
    case ModelKind::GradientBoosting: return "GradientBoosting";
    case ModelKind::HistGradientBoosting: return "HistGradientBoosting";
    case ModelKind::RandomForest: return "RandomForest";
    case ModelKind::Stacking: return "Stacking";
    case ModelKind::Voting: return "Voting";
  }
  return "?";
}

// Accepts the identifier in any case, with or without '_' / '-' separators.
inline std::optional<ModelKind> parse_model_kind(std::string_view text) {
  auto squash = [](std::string_view s) {
    std::string out;
    for (char c : s)
      if (c != '_' && c != '-' && c != ' ') out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return out;
  };
  const auto key = squash(text);
  for (auto k : kAllModelKinds)
    if (squash(identifier(k)) == key) return k;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Configurations

struct BaggedConfig {
  std::size_t n_estimators = 10;
  bool bootstrap = true;
  TreeConfig tree;
  std::uint64_t seed = 0;
  unsigned n_jobs = 1;

  static BaggedConfig bagging(std::uint64_t seed = 0) { return {10, true, {}, seed, 1}; }
  // max_features unset means every feature (max_features = p).
  static BaggedConfig random_forest(std::uint64_t seed = 0) { return {100, true, {}, seed, 1}; }
  static BaggedConfig extra_trees(std::uint64_t seed = 0) {
    BaggedConfig c{100, false, {}, seed, 1};
    c.tree.threshold_mode = ThresholdMode::random;
    return c;
  }
};

struct BoostConfig {
  std::size_t n_stages = 100;
  double learning_rate = 0.1;  // 0 is accepted and yields the constant mean predictor
  TreeConfig tree = depth_limited(3);
  std::uint64_t seed = 0;
};

struct HistBoostConfig {
  std::size_t n_stages = 100;
  double learning_rate = 0.1;
  std::size_t max_bins = 255;
  HistTreeConfig tree;
};

enum class AdaLoss { linear, square, exponential };

struct AdaConfig {
  std::size_t n_stages = 50;
  double learning_rate = 1.0;
  AdaLoss loss = AdaLoss::linear;
  std::size_t max_depth = 3;
  std::uint64_t seed = 0;
};

struct ModelSpec;

// An empty `bases` list means the default set {RandomForest, GradientBoosting, ExtraTrees}.
struct StackingConfig {
  std::vector<ModelSpec> bases;
  std::size_t k_folds = 5;
  double ridge_lambda = 1.0;
  std::uint64_t seed = 0;
  unsigned n_jobs = 1;
};

struct VotingConfig {
  std::vector<ModelSpec> bases;
  std::optional<std::vector<double>> weights;  // uniform when absent
  std::uint64_t seed = 0;
  unsigned n_jobs = 1;
};

using ModelParams = std::variant<BaggedConfig, BoostConfig, HistBoostConfig, AdaConfig, StackingConfig, VotingConfig>;

struct ModelSpec {
  ModelKind kind = ModelKind::GradientBoosting;
  ModelParams params;
};

inline ModelSpec reseeded(ModelSpec spec, std::uint64_t seed);

// Library defaults for `kind`, seeded with `seed`.
inline ModelSpec default_spec(ModelKind kind, std::uint64_t seed = 0) {
  ModelSpec spec{kind, BaggedConfig{}};
  switch (kind) {
    case ModelKind::AdaBoost: spec.params = AdaConfig{}; break;
    case ModelKind::Bagging: spec.params = BaggedConfig::bagging(); break;
    case ModelKind::ExtraTrees: spec.params = BaggedConfig::extra_trees(); break;
    case ModelKind::GradientBoosting: spec.params = BoostConfig{}; break;
    case ModelKind::HistGradientBoosting: spec.params = HistBoostConfig{}; break;
    case ModelKind::RandomForest: spec.params = BaggedConfig::random_forest(); break;
    case ModelKind::Stacking: spec.params = StackingConfig{}; break;
    case ModelKind::Voting: spec.params = VotingConfig{}; break;
  }
  return reseeded(std::move(spec), seed);
}

inline std::vector<ModelSpec> default_base_set(std::uint64_t seed = 0) {
  return {default_spec(ModelKind::RandomForest, seed), default_spec(ModelKind::GradientBoosting, seed),
          default_spec(ModelKind::ExtraTrees, seed)};
}

// Copy of `spec` whose randomness (its own and its members') derives from `seed`.
inline ModelSpec reseeded(ModelSpec spec, std::uint64_t seed) {
  std::visit(
      [&](auto& c) {
        if constexpr (requires { c.seed; }) c.seed = seed;
      },
      spec.params);
  return spec;
}

inline void with_jobs(ModelSpec& spec, unsigned n_jobs) {
  std::visit(
      [&](auto& c) {
        if constexpr (requires { c.n_jobs; }) c.n_jobs = n_jobs;
        if constexpr (requires { c.bases; })
          for (auto& b : c.bases) with_jobs(b, n_jobs);
      },
      spec.params);
}

// Config snapshots.

inline nlohmann::json tree_config_json(const TreeConfig& t) {
  nlohmann::json j = {{"min_samples_split", t.min_samples_split},
                      {"min_samples_leaf", t.min_samples_leaf},
                      {"threshold_mode", t.threshold_mode == ThresholdMode::exact ? "exact" : "random"}};
  j["max_depth"] = t.max_depth ? nlohmann::json(*t.max_depth) : nlohmann::json(nullptr);
  j["max_features"] = t.max_features ? nlohmann::json(*t.max_features) : nlohmann::json(nullptr);
  return j;
}

inline std::string_view to_string(AdaLoss l) noexcept {
  switch (l) {
    case AdaLoss::linear: return "linear";
    case AdaLoss::square: return "square";
    case AdaLoss::exponential: return "exponential";
  }
  return "?";
}

inline nlohmann::json spec_json(const ModelSpec& spec);

inline nlohmann::json params_json(const ModelParams& params) {
  return std::visit(
      [](const auto& c) -> nlohmann::json {
        using C = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<C, BaggedConfig>) {
          return {{"n_estimators", c.n_estimators}, {"bootstrap", c.bootstrap}, {"tree", tree_config_json(c.tree)},
                  {"seed", c.seed}};
        } else if constexpr (std::is_same_v<C, BoostConfig>) {
          return {{"n_stages", c.n_stages}, {"learning_rate", c.learning_rate}, {"tree", tree_config_json(c.tree)},
                  {"seed", c.seed}};
        } else if constexpr (std::is_same_v<C, HistBoostConfig>) {
          nlohmann::json j = {{"n_stages", c.n_stages},
                              {"learning_rate", c.learning_rate},
                              {"max_bins", c.max_bins},
                              {"max_leaf_nodes", c.tree.max_leaf_nodes},
                              {"min_samples_leaf", c.tree.min_samples_leaf},
                              {"l2", c.tree.l2}};
          j["max_depth"] = c.tree.max_depth ? nlohmann::json(*c.tree.max_depth) : nlohmann::json(nullptr);
          return j;
        } else if constexpr (std::is_same_v<C, AdaConfig>) {
          return {{"n_stages", c.n_stages}, {"learning_rate", c.learning_rate}, {"loss", to_string(c.loss)},
                  {"max_depth", c.max_depth}, {"seed", c.seed}};
        } else if constexpr (std::is_same_v<C, StackingConfig>) {
          auto bases = nlohmann::json::array();
          for (const auto& b : c.bases.empty() ? default_base_set(c.seed) : c.bases) bases.push_back(spec_json(b));
          return {{"bases", bases}, {"k_folds", c.k_folds}, {"ridge_lambda", c.ridge_lambda}, {"seed", c.seed}};
        } else {
          auto bases = nlohmann::json::array();
          for (const auto& b : c.bases.empty() ? default_base_set(c.seed) : c.bases) bases.push_back(spec_json(b));
          nlohmann::json j = {{"bases", bases}, {"seed", c.seed}};
          j["weights"] = c.weights ? nlohmann::json(*c.weights) : nlohmann::json(nullptr);
          return j;
        }
      },
      params);
}

inline nlohmann::json spec_json(const ModelSpec& spec) {
  return {{"kind", identifier(spec.kind)}, {"params", params_json(spec.params)}};
}

// ---------------------------------------------------------------------------
// Fitted forms

struct BaggedModel {
  std::vector<RegressionTree> trees;
};

// F(x) = init + learning_rate * sum_m tree_m(x). Gradient and histogram boosting.
struct AdditiveModel {
  double init = 0.0;
  double learning_rate = 0.1;
  std::vector<RegressionTree> trees;
  std::vector<double> train_mse;  // after each stage
};

struct AdaBoostModel {
  std::vector<RegressionTree> stages;
  std::vector<double> stage_weights;
  std::vector<double> betas;        // one per stage admitted through the L < 0.5 gate
  std::vector<double> weight_sums;  // sum of sample weights after each renormalisation
};

class FittedModel;

struct StackedModel {
  std::vector<FittedModel> bases;
  RidgeModel meta;
};

struct VotedModel {
  std::vector<FittedModel> bases;
  std::vector<double> weights;
};

using ModelBody = std::variant<BaggedModel, AdditiveModel, AdaBoostModel, StackedModel, VotedModel>;

/// A trained ensemble of any of the eight kinds, plus the config it was
/// trained with. Immutable; predict is reentrant.
class FittedModel {
public:
  FittedModel() = default;
  FittedModel(ModelKind kind, std::size_t n_features, nlohmann::json config, ModelBody body)
      : kind_(kind), n_features_(n_features), config_(std::move(config)), body_(std::move(body)) {}

  ModelKind kind() const noexcept { return kind_; }
  std::size_t n_features() const noexcept { return n_features_; }
  const nlohmann::json& config() const noexcept { return config_; }
  const ModelBody& body() const noexcept { return body_; }

  template <typename T>
  const T& as() const {
    return std::get<T>(body_);
  }

  double predict_one(std::span<const double> x) const;

private:
  ModelKind kind_ = ModelKind::GradientBoosting;
  std::size_t n_features_ = 0;
  nlohmann::json config_;
  ModelBody body_;
};

/// Returns the first value, in ascending value order, at which the
/// cumulative weight reaches half of the total weight.
inline double weighted_median(std::span<const double> values, std::span<const double> weights) {
  if (values.empty()) throw EmptyInput("weighted_median of an empty list");
  if (values.size() != weights.size()) throw LengthMismatch("weighted_median: values and weights differ in length");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw InvalidArgument("weighted_median weights must be >= 0");
    total += w;
  }
  if (!(total > 0.0)) throw InvalidArgument("weighted_median weights sum to zero");
  const double half = 0.5 * total;
  double cum = 0.0;
  for (auto i : order) {
    cum += weights[i];
    if (cum >= half) return values[i];
  }
  return values[order.back()];
}

inline double FittedModel::predict_one(std::span<const double> x) const {
  return std::visit(
      [&](const auto& m) -> double {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, BaggedModel>) {
          double s = 0.0;
          for (const auto& t : m.trees) s += t.predict_one(x);
          return s / static_cast<double>(m.trees.size());
        } else if constexpr (std::is_same_v<M, AdditiveModel>) {
          double f = m.init;
          for (const auto& t : m.trees) f += m.learning_rate * t.predict_one(x);
          return f;
        } else if constexpr (std::is_same_v<M, AdaBoostModel>) {
          std::vector<double> preds;
          preds.reserve(m.stages.size());
          for (const auto& t : m.stages) preds.push_back(t.predict_one(x));
          return weighted_median(preds, m.stage_weights);
        } else if constexpr (std::is_same_v<M, StackedModel>) {
          std::vector<double> z;
          z.reserve(m.bases.size());
          for (const auto& b : m.bases) z.push_back(b.predict_one(x));
          return m.meta.predict_one(z);
        } else {
          double s = 0.0, ws = 0.0;
          for (std::size_t b = 0; b < m.bases.size(); ++b) {
            s += m.weights[b] * m.bases[b].predict_one(x);
            ws += m.weights[b];
          }
          return s / ws;
        }
      },
      body_);
}

inline std::vector<double> predict(const FittedModel& model, const FeatureMatrix& X) {
  if (X.rows() == 0) return {};
  if (X.cols() != model.n_features())
    throw DimensionMismatch("model expects " + std::to_string(model.n_features()) + " features, got " +
                            std::to_string(X.cols()));
  std::vector<double> out(X.rows());
  for (std::size_t i = 0; i < X.rows(); ++i) out[i] = model.predict_one(X.row(i));
  return out;
}

// ---------------------------------------------------------------------------
// Fitting

namespace detail {

inline void check_xy(const FeatureMatrix& X, std::span<const double> y, std::size_t min_rows = 2) {
  if (y.size() != X.rows())
    throw DimensionMismatch("X has " + std::to_string(X.rows()) + " rows but y has " + std::to_string(y.size()));
  if (X.rows() < min_rows) throw InvalidArgument("need at least " + std::to_string(min_rows) + " samples");
  if (X.cols() == 0) throw InvalidArgument("need at least one feature");
  for (double v : y)
    if (!std::isfinite(v)) throw InvalidArgument("targets must be finite");
}

inline double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double mse(std::span<const double> y, std::span<const double> f) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += (y[i] - f[i]) * (y[i] - f[i]);
  return s / static_cast<double>(y.size());
}

}  // namespace detail

/// Bagging, random forest and extra trees: tree t sees a bootstrap draw
/// (or every row) and its own generator stream derive_seed(seed, t);
/// the prediction is the plain mean of the members.
inline FittedModel fit_bagged_trees(const FeatureMatrix& X, std::span<const double> y, const BaggedConfig& cfg,
                                    ModelKind kind = ModelKind::Bagging) {
  detail::check_xy(X, y);
  if (cfg.n_estimators < 1) throw InvalidArgument("n_estimators must be >= 1");
  cfg.tree.check(X.cols());
  const std::size_t n = X.rows();

  BaggedModel model;
  model.trees.resize(cfg.n_estimators);
  parallel_for(cfg.n_estimators, cfg.n_jobs, [&](std::size_t t) {
    Rng rng(derive_seed(cfg.seed, t));
    std::vector<double> w(n, cfg.bootstrap ? 0.0 : 1.0);
    if (cfg.bootstrap)
      for (std::size_t k = 0; k < n; ++k) w[rng.index(n)] += 1.0;
    model.trees[t] = fit_tree(X, y, w, cfg.tree, rng);
  });
  return FittedModel(kind, X.cols(), params_json(cfg), std::move(model));
}

/// Stagewise least-squares boosting: F0 = mean(y), each stage fits a tree
/// to the current residuals and adds learning_rate times its output.
inline FittedModel fit_gradient_boosting(const FeatureMatrix& X, std::span<const double> y, const BoostConfig& cfg) {
  detail::check_xy(X, y);
  if (cfg.n_stages < 1) throw InvalidArgument("n_stages must be >= 1");
  if (!(cfg.learning_rate >= 0.0 && cfg.learning_rate <= 1.0))
    throw InvalidArgument("learning_rate must lie in [0, 1]");
  cfg.tree.check(X.cols());
  const std::size_t n = X.rows();

  AdditiveModel model;
  model.init = detail::mean(y);
  model.learning_rate = cfg.learning_rate;
  std::vector<double> f(n, model.init), r(n);
  Rng rng(cfg.seed);
  for (std::size_t m = 0; m < cfg.n_stages; ++m) {
    for (std::size_t i = 0; i < n; ++i) r[i] = y[i] - f[i];
    auto tree = fit_tree(X, r, cfg.tree, rng);
    for (std::size_t i = 0; i < n; ++i) f[i] += cfg.learning_rate * tree.predict_one(X.row(i));
    model.trees.push_back(std::move(tree));
    model.train_mse.push_back(detail::mse(y, f));
  }
  return FittedModel(ModelKind::GradientBoosting, X.cols(), params_json(cfg), std::move(model));
}

/// Gradient boosting on binned features with halved squared loss:
/// g = F - y, h = 1, one leaf-wise histogram tree per stage.
inline FittedModel fit_hist_gradient_boosting(const FeatureMatrix& X, std::span<const double> y,
                                              const HistBoostConfig& cfg) {
  detail::check_xy(X, y);
  if (cfg.n_stages < 1) throw InvalidArgument("n_stages must be >= 1");
  if (!(cfg.learning_rate > 0.0 && cfg.learning_rate <= 1.0))
    throw InvalidArgument("learning_rate must lie in (0, 1]");
  const std::size_t n = X.rows();
  const auto [spec, binned] = build_bins(X, cfg.max_bins);

  AdditiveModel model;
  model.init = detail::mean(y);
  model.learning_rate = cfg.learning_rate;
  std::vector<double> f(n, model.init), g(n), h(n, 1.0);
  for (std::size_t m = 0; m < cfg.n_stages; ++m) {
    for (std::size_t i = 0; i < n; ++i) g[i] = f[i] - y[i];
    auto tree = fit_hist_tree(binned, spec, g, h, cfg.tree);
    for (std::size_t i = 0; i < n; ++i) f[i] += cfg.learning_rate * tree.predict_one(X.row(i));
    model.trees.push_back(std::move(tree));
    model.train_mse.push_back(detail::mse(y, f));
  }
  return FittedModel(ModelKind::HistGradientBoosting, X.cols(), params_json(cfg), std::move(model));
}

/// AdaBoost.R2. Each stage trains a depth-limited tree on a bootstrap
/// resample drawn with the current sample weights, scores every training
/// row with a loss normalised by the largest absolute error, and stops once
/// the weighted loss reaches 0.5. Stage weight is log(1/beta) with
/// beta = L / (1 - L); prediction is the weighted median of stage outputs.
///
/// A stage with zero training error becomes the whole model. A first stage
/// that already fails the 0.5 gate is kept alone with weight 1 and no beta.
inline FittedModel fit_adaboost_r2(const FeatureMatrix& X, std::span<const double> y, const AdaConfig& cfg) {
  detail::check_xy(X, y);
  if (cfg.n_stages < 1) throw InvalidArgument("n_stages must be >= 1");
  if (!(cfg.learning_rate > 0.0)) throw InvalidArgument("learning_rate must be > 0");
  const std::size_t n = X.rows();
  const TreeConfig tree_cfg = depth_limited(cfg.max_depth);

  AdaBoostModel model;
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  std::vector<double> cdf(n), counts(n), err(n);
  Rng rng(cfg.seed);

  for (std::size_t s = 0; s < cfg.n_stages; ++s) {
    std::partial_sum(w.begin(), w.end(), cdf.begin());
    std::fill(counts.begin(), counts.end(), 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      const double u = rng.uniform01() * cdf.back();
      auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
      if (it == cdf.end()) --it;
      counts[static_cast<std::size_t>(it - cdf.begin())] += 1.0;
    }
    auto tree = fit_tree(X, y, counts, tree_cfg, rng);

    double max_err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      err[i] = std::abs(tree.predict_one(X.row(i)) - y[i]);
      max_err = std::max(max_err, err[i]);
    }
    if (max_err == 0.0) {
      model.stages.assign(1, std::move(tree));
      model.stage_weights.assign(1, 1.0);
      model.betas.clear();
      break;
    }
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double l = err[i] / max_err;
      if (cfg.loss == AdaLoss::square) l *= l;
      if (cfg.loss == AdaLoss::exponential) l = 1.0 - std::exp(-l);
      err[i] = l;
      loss += w[i] * l;
    }
    if (loss >= 0.5) {
      if (model.stages.empty()) {
        model.stages.push_back(std::move(tree));
        model.stage_weights.push_back(1.0);
      }
      break;
    }
    if (loss <= 0.0) {  // every row with weight is fitted exactly
      model.stages.assign(1, std::move(tree));
      model.stage_weights.assign(1, 1.0);
      model.betas.clear();
      break;
    }
    const double beta = loss / (1.0 - loss);
    model.stages.push_back(std::move(tree));
    model.stage_weights.push_back(std::log(1.0 / beta));
    model.betas.push_back(beta);

    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      w[i] *= std::pow(beta, (1.0 - err[i]) * cfg.learning_rate);
      total += w[i];
    }
    double renormalised = 0.0;
    for (auto& wi : w) {
      wi /= total;
      renormalised += wi;
    }
    model.weight_sums.push_back(renormalised);
  }
  return FittedModel(ModelKind::AdaBoost, X.cols(), params_json(cfg), std::move(model));
}

inline FittedModel fit_model(const ModelSpec& spec, const FeatureMatrix& X, std::span<const double> y);

/// Seeded k-fold assignment: a shuffled 0..n-1 dealt round-robin, so fold
/// sizes differ by at most one. Returns fold[i] for every row.
inline std::vector<std::size_t> kfold_assignment(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw InvalidArgument("k_folds must be >= 2");
  if (n < k) throw InvalidArgument("more folds than rows");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(perm.begin(), perm.end());
  std::vector<std::size_t> fold(n);
  for (std::size_t pos = 0; pos < n; ++pos) fold[perm[pos]] = pos % k;
  return fold;
}

namespace detail {

inline const std::vector<ModelSpec>& bases_or_default(const std::vector<ModelSpec>& bases,
                                                      std::vector<ModelSpec>& storage, std::uint64_t seed) {
  if (!bases.empty()) return bases;
  storage = default_base_set(seed);
  return storage;
}

inline void check_base(const ModelSpec& s) {
  if (s.kind == ModelKind::Stacking || s.kind == ModelKind::Voting)
    throw InvalidArgument("stacking/voting cannot be nested as a base learner");
}

inline constexpr std::uint64_t kFoldStream = 0xF01D;

}  // namespace detail

/// Out-of-fold base predictions: Z[i][b] comes from base b trained on every
/// fold except the one holding row i.
inline FeatureMatrix out_of_fold_predictions(const FeatureMatrix& X, std::span<const double> y,
                                             const StackingConfig& cfg) {
  detail::check_xy(X, y, 2 * cfg.k_folds);
  std::vector<ModelSpec> storage;
  const auto& bases = detail::bases_or_default(cfg.bases, storage, cfg.seed);
  for (const auto& b : bases) detail::check_base(b);
  const std::size_t n = X.rows();
  const std::size_t m = bases.size();
  const std::size_t k = cfg.k_folds;
  const auto fold = kfold_assignment(n, k, derive_seed(cfg.seed, detail::kFoldStream));

  std::vector<double> z(n * m, 0.0);
  parallel_for(m * k, cfg.n_jobs, [&](std::size_t job) {
    const std::size_t b = job / k;
    const std::size_t f = job % k;
    std::vector<std::size_t> train, held;
    for (std::size_t i = 0; i < n; ++i) (fold[i] == f ? held : train).push_back(i);
    const auto Xt = X.select_rows(train);
    const auto yt = select(y, train);
    auto spec = reseeded(bases[b], derive_seed(derive_seed(cfg.seed, b), f + 1));
    with_jobs(spec, 1);
    const auto model = fit_model(spec, Xt, yt);
    for (auto i : held) z[i * m + b] = model.predict_one(X.row(i));
  });
  std::vector<std::string> names;
  for (const auto& b : bases) names.emplace_back(identifier(b.kind));
  return FeatureMatrix(n, m, std::move(z), std::move(names));
}

/// Stacking: ridge meta-learner over out-of-fold base predictions, with
/// every base refitted on the full training set for prediction.
inline FittedModel fit_stacking(const FeatureMatrix& X, std::span<const double> y, const StackingConfig& cfg) {
  const auto Z = out_of_fold_predictions(X, y, cfg);
  std::vector<ModelSpec> storage;
  const auto& bases = detail::bases_or_default(cfg.bases, storage, cfg.seed);

  StackedModel model;
  model.meta = fit_ridge(Z, y, cfg.ridge_lambda);
  model.bases.resize(bases.size());
  parallel_for(bases.size(), cfg.n_jobs, [&](std::size_t b) {
    auto spec = reseeded(bases[b], derive_seed(cfg.seed, b));
    with_jobs(spec, 1);
    model.bases[b] = fit_model(spec, X, y);
  });
  return FittedModel(ModelKind::Stacking, X.cols(), params_json(cfg), std::move(model));
}

/// Voting: weighted arithmetic mean of independently trained bases.
inline FittedModel fit_voting(const FeatureMatrix& X, std::span<const double> y, const VotingConfig& cfg) {
  detail::check_xy(X, y);
  std::vector<ModelSpec> storage;
  const auto& bases = detail::bases_or_default(cfg.bases, storage, cfg.seed);
  for (const auto& b : bases) detail::check_base(b);

  VotedModel model;
  if (cfg.weights) {
    if (cfg.weights->size() != bases.size()) throw InvalidArgument("voting weights must match the base count");
    double total = 0.0;
    for (double w : *cfg.weights) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("voting weights must be finite and >= 0");
      total += w;
    }
    if (!(total > 0.0)) throw InvalidArgument("voting weights are all zero");
    model.weights = *cfg.weights;
  } else {
    model.weights.assign(bases.size(), 1.0);
  }
  model.bases.resize(bases.size());
  parallel_for(bases.size(), cfg.n_jobs, [&](std::size_t b) {
    auto spec = reseeded(bases[b], derive_seed(cfg.seed, b));
    with_jobs(spec, 1);
    model.bases[b] = fit_model(spec, X, y);
  });
  return FittedModel(ModelKind::Voting, X.cols(), params_json(cfg), std::move(model));
}

inline FittedModel fit_model(const ModelSpec& spec, const FeatureMatrix& X, std::span<const double> y) {
  return std::visit(
      [&](const auto& c) -> FittedModel {
        using C = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<C, BaggedConfig>) {
          if (spec.kind != ModelKind::Bagging && spec.kind != ModelKind::RandomForest &&
              spec.kind != ModelKind::ExtraTrees)
            throw InvalidArgument("bagged-tree config given for " + std::string(identifier(spec.kind)));
          return fit_bagged_trees(X, y, c, spec.kind);
        } else if constexpr (std::is_same_v<C, BoostConfig>) {
          return fit_gradient_boosting(X, y, c);
        } else if constexpr (std::is_same_v<C, HistBoostConfig>) {
          return fit_hist_gradient_boosting(X, y, c);
        } else if constexpr (std::is_same_v<C, AdaConfig>) {
          return fit_adaboost_r2(X, y, c);
        } else if constexpr (std::is_same_v<C, StackingConfig>) {
          return fit_stacking(X, y, c);
        } else {
          return fit_voting(X, y, c);
        }
      },
      spec.params);
}

// ---------------------------------------------------------------------------
// Persistence

inline constexpr int kModelFormatVersion = 1;

inline nlohmann::json trees_json(const std::vector<RegressionTree>& trees) {
  auto a = nlohmann::json::array();
  for (const auto& t : trees) a.push_back(t);
  return a;
}

inline std::vector<RegressionTree> trees_from_json(const nlohmann::json& j) {
  std::vector<RegressionTree> out;
  for (const auto& t : j) out.push_back(t.get<RegressionTree>());
  return out;
}

inline void to_json(nlohmann::json& j, const FittedModel& m) {
  nlohmann::json body = std::visit(
      [](const auto& b) -> nlohmann::json {
        using B = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<B, BaggedModel>) {
          return {{"trees", trees_json(b.trees)}};
        } else if constexpr (std::is_same_v<B, AdditiveModel>) {
          return {{"init", b.init},
                  {"learning_rate", b.learning_rate},
                  {"trees", trees_json(b.trees)},
                  {"train_mse", b.train_mse}};
        } else if constexpr (std::is_same_v<B, AdaBoostModel>) {
          return {{"stages", trees_json(b.stages)},
                  {"stage_weights", b.stage_weights},
                  {"betas", b.betas},
                  {"weight_sums", b.weight_sums}};
        } else if constexpr (std::is_same_v<B, StackedModel>) {
          auto bases = nlohmann::json::array();
          for (const auto& x : b.bases) bases.push_back(x);
          return {{"bases", bases}, {"meta", b.meta}};
        } else {
          auto bases = nlohmann::json::array();
          for (const auto& x : b.bases) bases.push_back(x);
          return {{"bases", bases}, {"weights", b.weights}};
        }
      },
      m.body());
  j = {{"format", "tabens-model"},
       {"version", kModelFormatVersion},
       {"kind", identifier(m.kind())},
       {"n_features", m.n_features()},
       {"config", m.config()},
       {"body", std::move(body)}};
}

inline void from_json(const nlohmann::json& j, FittedModel& m) {
  if (j.at("format").get<std::string>() != "tabens-model") throw InvalidArgument("not a model document");
  if (j.at("version").get<int>() != kModelFormatVersion) throw InvalidArgument("unsupported model format version");
  const auto kind = parse_model_kind(j.at("kind").get<std::string>());
  if (!kind) throw InvalidArgument("unknown model kind in document");
  const auto& b = j.at("body");
  ModelBody body;
  switch (*kind) {
    case ModelKind::Bagging:
    case ModelKind::RandomForest:
    case ModelKind::ExtraTrees: body = BaggedModel{trees_from_json(b.at("trees"))}; break;
    case ModelKind::GradientBoosting:
    case ModelKind::HistGradientBoosting:
      body = AdditiveModel{b.at("init").get<double>(), b.at("learning_rate").get<double>(),
                           trees_from_json(b.at("trees")), b.at("train_mse").get<std::vector<double>>()};
      break;
    case ModelKind::AdaBoost:
      body = AdaBoostModel{trees_from_json(b.at("stages")), b.at("stage_weights").get<std::vector<double>>(),
                           b.at("betas").get<std::vector<double>>(), b.at("weight_sums").get<std::vector<double>>()};
      break;
    case ModelKind::Stacking: {
      StackedModel s;
      for (const auto& x : b.at("bases")) s.bases.push_back(x.get<FittedModel>());
      s.meta = b.at("meta").get<RidgeModel>();
      body = std::move(s);
      break;
    }
    case ModelKind::Voting: {
      VotedModel v;
      for (const auto& x : b.at("bases")) v.bases.push_back(x.get<FittedModel>());
      v.weights = b.at("weights").get<std::vector<double>>();
      body = std::move(v);
      break;
    }
  }
  m = FittedModel(*kind, j.at("n_features").get<std::size_t>(), j.at("config"), std::move(body));
}

}  // namespace tabens
