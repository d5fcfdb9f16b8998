#pragma once

// Benchmark harness: synthetic listings, the end-to-end pipeline over the
// eight models, report rendering and scatter export.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "tabens/ensemble.hpp"
#include "tabens/error.hpp"
#include "tabens/metrics.hpp"
#include "tabens/preprocess.hpp"
#include "tabens/random.hpp"
#include "tabens/tabular.hpp"

namespace tabens {

// ---------------------------------------------------------------------------
// Synthetic listings

struct SyntheticSpec {
  std::size_t n = 1200;
  double noise_sigma = 6000.0;  // dollars
  std::uint64_t seed = 42;
};

struct Level {
  std::string_view name;
  double multiplier;
};

// Ground-truth price surface. Categories without a multiplier table
// (realty_type, furniture, heating) carry no price signal.
namespace synth {

inline constexpr double kBaseRate = 700.0;
inline constexpr double kAreaExponent = 0.92;
inline constexpr double kEdgeFloorPenalty = 0.05;
inline constexpr double kMinPrice = 3000.0;
inline constexpr double kMinArea = 18.0;
inline constexpr double kMaxArea = 120.0;
inline constexpr double kApartmentShare = 0.8;

inline constexpr std::array<int, 7> kFloors = {1, 2, 5, 9, 10, 14, 16};

inline constexpr std::array<Level, 4> kRepair = {{
    {"needs_repair", 0.85},
    {"cosmetic", 0.95},
    {"renovated", 1.05},
    {"designer", 1.20},
}};

inline constexpr std::array<Level, 3> kWall = {{
    {"brick", 1.08},
    {"panel", 0.92},
    {"block", 1.00},
}};

inline constexpr std::array<Level, 2> kMarket = {{
    {"primary", 1.05},
    {"secondary", 1.00},
}};

inline constexpr std::array<Level, 6> kDecade = {{
    {"1960-1970", 0.85},
    {"1970-1980", 0.88},
    {"1980-1990", 0.92},
    {"1990-2000", 0.96},
    {"2000-2010", 1.02},
    {"2010-2020", 1.10},
}};

inline constexpr std::array<std::string_view, 2> kRealty = {"apartment", "room"};
inline constexpr std::array<std::string_view, 2> kFurniture = {"yes", "no"};
inline constexpr std::array<std::string_view, 3> kHeating = {"central", "individual", "autonomous"};

// Noise-free price in dollars before rounding and clamping.
inline double ground_truth(double area, int floor, int floors, double repair, double wall, double market,
                           double decade) {
  const double base = kBaseRate * std::pow(area, kAreaExponent) * repair * wall * market * decade;
  const bool edge = floor == 1 || floor == floors;
  return base - (edge ? kEdgeFloorPenalty * base : 0.0);
}

template <std::size_t N>
const Level& pick(const std::array<Level, N>& levels, Rng& rng) {
  return levels[rng.index(N)];
}

}  // namespace synth

/// Listing rows shaped like the twelve-column export, with prices drawn from
/// the documented ground-truth surface plus Gaussian noise.
inline Dataset generate_synthetic(const SyntheticSpec& spec) {
  if (spec.n < 20) throw InvalidArgument("synthetic n must be >= 20");
  if (!(spec.noise_sigma >= 0.0)) throw InvalidArgument("noise_sigma must be >= 0");
  using namespace synth;
  Rng rng(spec.seed);
  std::vector<Row> rows;
  rows.reserve(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const auto realty = rng.uniform01() < kApartmentShare ? kRealty[0] : kRealty[1];
    const double area = std::round(rng.uniform(kMinArea, kMaxArea) * 10.0) / 10.0;
    const int floors = kFloors[rng.index(kFloors.size())];
    const int floor = 1 + static_cast<int>(rng.index(static_cast<std::uint64_t>(floors)));
    const auto& repair = pick(kRepair, rng);
    const auto& wall = pick(kWall, rng);
    const auto furniture = kFurniture[rng.index(kFurniture.size())];
    const auto heating = kHeating[rng.index(kHeating.size())];
    const auto& decade = pick(kDecade, rng);
    const auto& market = pick(kMarket, rng);
    const double noise = spec.noise_sigma > 0.0 ? spec.noise_sigma * rng.normal() : 0.0;
    double price = ground_truth(area, floor, floors, repair.multiplier, wall.multiplier, market.multiplier,
                                decade.multiplier) +
                   noise;
    price = std::max(kMinPrice, std::round(price));

    rows.push_back(Row{
        static_cast<std::int64_t>(i + 1),
        std::string(realty),
        area,
        static_cast<std::int64_t>(floor),
        static_cast<std::int64_t>(floors),
        std::string(repair.name),
        std::string(wall.name),
        std::string(furniture),
        std::string(heating),
        std::string(decade.name),
        std::string(market.name),
        static_cast<std::int64_t>(price),
    });
  }
  return Dataset(TableSchema::listings(), std::move(rows));
}

inline std::string describe_synthetic() {
  using namespace synth;
  std::ostringstream out;
  out << "Synthetic listing generator\n\n"
      << "price = max(" << kMinPrice << ", round(base - edge_penalty + noise))\n"
      << "base  = " << kBaseRate << " * total_area^" << kAreaExponent
      << " * repair_mult * wall_mult * market_mult * decade_mult\n"
      << "edge_penalty = " << kEdgeFloorPenalty << " * base when floor == 1 or floor == floors, else 0\n"
      << "noise ~ Normal(0, noise_sigma)\n\n"
      << "realty_type  : apartment (p=" << kApartmentShare << "), room\n"
      << "total_area   : uniform[" << kMinArea << ", " << kMaxArea << "] m^2, rounded to 0.1\n"
      << "floors       : uniform over {";
  for (std::size_t i = 0; i < kFloors.size(); ++i) out << (i ? ", " : "") << kFloors[i];
  out << "}\nfloor        : uniform integer in [1, floors]\n"
      << "furniture    : yes, no (no price effect)\n"
      << "heating      : central, individual, autonomous (no price effect)\n";
  auto table = [&](std::string_view title, const auto& levels) {
    out << "\n" << title << "\n";
    for (const auto& l : levels) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "  %-14.*s %.2f\n", static_cast<int>(l.name.size()), l.name.data(), l.multiplier);
      out << buf;
    }
  };
  table("repair_state multipliers:", kRepair);
  table("wall_material multipliers:", kWall);
  table("market multipliers:", kMarket);
  table("build_year multipliers:", kDecade);
  return out.str();
}

// ---------------------------------------------------------------------------
// Configuration

enum class ReportFormat { markdown, csv, json };

inline std::optional<ReportFormat> parse_report_format(std::string_view s) {
  if (s == "md" || s == "markdown") return ReportFormat::markdown;
  if (s == "csv") return ReportFormat::csv;
  if (s == "json") return ReportFormat::json;
  return std::nullopt;
}

struct BenchConfig {
  std::optional<std::filesystem::path> input;  // CSV file; exclusive with synth
  std::optional<SyntheticSpec> synth;
  TableSchema schema = TableSchema::listings();
  char delimiter = ',';
  std::uint64_t seed = 42;
  double test_fraction = 0.25;
  double max_missing_fraction = 0.0;
  CategoricalEncoding encoding = CategoricalEncoding::ordinal;
  std::vector<ModelKind> models{kAllModelKinds.begin(), kAllModelKinds.end()};
  // "model.param" -> value, e.g. {"gradient_boosting.n_stages", "200"}.
  std::vector<std::pair<std::string, std::string>> overrides;
  unsigned n_jobs = 1;

  void check() const {
    if (input.has_value() == synth.has_value()) throw InvalidArgument("exactly one of input file or synthetic spec is required");
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw InvalidArgument("test_fraction must lie in (0, 1)");
    if (models.empty()) throw InvalidArgument("model list is empty");
  }
};

namespace detail {

inline std::size_t to_count(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  long long x = 0;
  try {
    x = std::stoll(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != v.size() || x < 0) throw InvalidArgument("'" + key + "' expects a non-negative integer, got '" + v + "'");
  return static_cast<std::size_t>(x);
}

inline double to_real(const std::string& key, const std::string& v) {
  auto d = parse_real(v);
  if (!d) throw InvalidArgument("'" + key + "' expects a number, got '" + v + "'");
  return *d;
}

inline bool to_flag(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw InvalidArgument("'" + key + "' expects true/false, got '" + v + "'");
}

inline std::optional<std::size_t> to_optional_count(const std::string& key, const std::string& v) {
  if (v == "none" || v == "null" || v.empty()) return std::nullopt;
  return to_count(key, v);
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(v);
  while (std::getline(in, cur, ',')) {
    auto t = trim(cur);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

inline std::vector<ModelSpec> to_bases(const std::string& key, const std::string& v) {
  std::vector<ModelSpec> out;
  for (const auto& name : split_list(v)) {
    auto k = parse_model_kind(name);
    if (!k) throw InvalidArgument("'" + key + "': unknown model '" + name + "'");
    out.push_back(default_spec(*k));
  }
  return out;
}

inline bool apply_tree_param(TreeConfig& t, const std::string& key, const std::string& param, const std::string& v) {
  if (param == "max_depth") t.max_depth = to_optional_count(key, v);
  else if (param == "min_samples_split") t.min_samples_split = to_count(key, v);
  else if (param == "min_samples_leaf") t.min_samples_leaf = to_count(key, v);
  else if (param == "max_features") t.max_features = to_optional_count(key, v);
  else return false;
  return true;
}

}  // namespace detail

/// Applies one "param = value" override to a model spec. Unknown parameters throw.
inline void apply_override(ModelSpec& spec, const std::string& param, const std::string& value) {
  const std::string key = std::string(identifier(spec.kind)) + "." + param;
  bool ok = std::visit(
      [&](auto& c) -> bool {
        using C = std::decay_t<decltype(c)>;
        using namespace detail;
        if constexpr (std::is_same_v<C, BaggedConfig>) {
          if (param == "n_estimators") c.n_estimators = to_count(key, value);
          else if (param == "bootstrap") c.bootstrap = to_flag(key, value);
          else if (param == "threshold_mode") {
            if (value == "exact") c.tree.threshold_mode = ThresholdMode::exact;
            else if (value == "random") c.tree.threshold_mode = ThresholdMode::random;
            else throw InvalidArgument("'" + key + "' expects exact|random");
          } else return apply_tree_param(c.tree, key, param, value);
          return true;
        } else if constexpr (std::is_same_v<C, BoostConfig>) {
          if (param == "n_stages") c.n_stages = to_count(key, value);
          else if (param == "learning_rate") {
            c.learning_rate = to_real(key, value);
            if (!(c.learning_rate > 0.0 && c.learning_rate <= 1.0)) throw InvalidArgument("'" + key + "' must lie in (0, 1]");
          } else return apply_tree_param(c.tree, key, param, value);
          return true;
        } else if constexpr (std::is_same_v<C, HistBoostConfig>) {
          if (param == "n_stages") c.n_stages = to_count(key, value);
          else if (param == "learning_rate") c.learning_rate = to_real(key, value);
          else if (param == "max_bins") c.max_bins = to_count(key, value);
          else if (param == "max_leaf_nodes") c.tree.max_leaf_nodes = to_count(key, value);
          else if (param == "min_samples_leaf") c.tree.min_samples_leaf = to_count(key, value);
          else if (param == "l2") c.tree.l2 = to_real(key, value);
          else if (param == "max_depth") c.tree.max_depth = to_optional_count(key, value);
          else return false;
          return true;
        } else if constexpr (std::is_same_v<C, AdaConfig>) {
          if (param == "n_stages") c.n_stages = to_count(key, value);
          else if (param == "learning_rate") c.learning_rate = to_real(key, value);
          else if (param == "max_depth") c.max_depth = to_count(key, value);
          else if (param == "loss") {
            if (value == "linear") c.loss = AdaLoss::linear;
            else if (value == "square") c.loss = AdaLoss::square;
            else if (value == "exponential") c.loss = AdaLoss::exponential;
            else throw InvalidArgument("'" + key + "' expects linear|square|exponential");
          } else return false;
          return true;
        } else if constexpr (std::is_same_v<C, StackingConfig>) {
          if (param == "k_folds") c.k_folds = to_count(key, value);
          else if (param == "lambda" || param == "ridge_lambda") c.ridge_lambda = to_real(key, value);
          else if (param == "bases") c.bases = to_bases(key, value);
          else return false;
          return true;
        } else {
          if (param == "bases") c.bases = to_bases(key, value);
          else if (param == "weights") {
            std::vector<double> w;
            for (const auto& s : split_list(value)) w.push_back(to_real(key, s));
            c.weights = std::move(w);
          } else return false;
          return true;
        }
      },
      spec.params);
  if (!ok) throw InvalidArgument("unknown model parameter '" + key + "'");
}

// ModelSpec for `kind` under `cfg`, overrides applied.
inline ModelSpec model_spec_for(const BenchConfig& cfg, ModelKind kind) {
  auto spec = default_spec(kind, derive_seed(cfg.seed, 1000 + static_cast<std::uint64_t>(kind)));
  for (const auto& [key, value] : cfg.overrides) {
    const auto dot = key.find('.');
    if (dot == std::string::npos) throw InvalidArgument("model override '" + key + "' must look like model.param");
    const auto target = parse_model_kind(key.substr(0, dot));
    if (!target) throw InvalidArgument("model override '" + key + "': unknown model");
    if (*target == kind) apply_override(spec, key.substr(dot + 1), value);
  }
  with_jobs(spec, cfg.n_jobs);
  return spec;
}

// ---------------------------------------------------------------------------
// Report

struct PipelineSummary {
  std::size_t rows_in = 0;
  std::size_t duplicates_removed = 0;
  std::size_t missing_rows_removed = 0;
  std::size_t rows_out = 0;
  std::vector<std::string> dropped_columns;
  std::size_t violations = 0;
  std::size_t n_features = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;

  bool operator==(const PipelineSummary&) const = default;
};

struct ModelResult {
  ModelKind kind = ModelKind::GradientBoosting;
  std::optional<EvalResult> metrics;
  std::optional<std::string> error;
  double fit_seconds = 0.0;
  double predict_seconds = 0.0;
  std::vector<double> actual;
  std::vector<double> predicted;

  bool operator==(const ModelResult&) const = default;
};

struct Report {
  nlohmann::json provenance;
  PipelineSummary summary;
  std::vector<ModelResult> models;  // sorted by display name

  const ModelResult* find(ModelKind k) const noexcept {
    for (const auto& m : models)
      if (m.kind == k) return &m;
    return nullptr;
  }

  bool operator==(const Report&) const = default;
};

inline constexpr int kReportFormatVersion = 1;

inline nlohmann::json report_to_json(const Report& r, bool include_timing = true) {
  nlohmann::json models = nlohmann::json::array();
  for (const auto& m : r.models) {
    nlohmann::json jm = {{"model", display_name(m.kind)}, {"kind", identifier(m.kind)}};
    if (m.metrics) {
      jm["r2"] = m.metrics->r2;
      jm["rmse"] = m.metrics->rmse;
      jm["mae"] = m.metrics->mae;
      jm["n"] = m.metrics->n;
    }
    if (m.error) jm["error"] = *m.error;
    if (include_timing) jm["timing"] = {{"fit_seconds", m.fit_seconds}, {"predict_seconds", m.predict_seconds}};
    jm["actual"] = m.actual;
    jm["predicted"] = m.predicted;
    models.push_back(std::move(jm));
  }
  const auto& s = r.summary;
  return {{"format", "tabens-report"},
          {"version", kReportFormatVersion},
          {"provenance", r.provenance},
          {"pipeline",
           {{"rows_in", s.rows_in},
            {"duplicates_removed", s.duplicates_removed},
            {"missing_rows_removed", s.missing_rows_removed},
            {"rows_out", s.rows_out},
            {"dropped_columns", s.dropped_columns},
            {"violations", s.violations},
            {"n_features", s.n_features},
            {"n_train", s.n_train},
            {"n_test", s.n_test}}},
          {"models", std::move(models)}};
}

inline Report report_from_json(const nlohmann::json& j) {
  if (j.at("format").get<std::string>() != "tabens-report") throw InvalidArgument("not a report document");
  Report r;
  r.provenance = j.at("provenance");
  const auto& p = j.at("pipeline");
  r.summary.rows_in = p.at("rows_in").get<std::size_t>();
  r.summary.duplicates_removed = p.at("duplicates_removed").get<std::size_t>();
  r.summary.missing_rows_removed = p.at("missing_rows_removed").get<std::size_t>();
  r.summary.rows_out = p.at("rows_out").get<std::size_t>();
  r.summary.dropped_columns = p.at("dropped_columns").get<std::vector<std::string>>();
  r.summary.violations = p.at("violations").get<std::size_t>();
  r.summary.n_features = p.at("n_features").get<std::size_t>();
  r.summary.n_train = p.at("n_train").get<std::size_t>();
  r.summary.n_test = p.at("n_test").get<std::size_t>();
  for (const auto& jm : j.at("models")) {
    ModelResult m;
    const auto kind = parse_model_kind(jm.at("kind").get<std::string>());
    if (!kind) throw InvalidArgument("unknown model kind in report");
    m.kind = *kind;
    if (jm.contains("r2"))
      m.metrics = EvalResult{jm.at("r2").get<double>(), jm.at("rmse").get<double>(), jm.at("mae").get<double>(),
                             jm.at("n").get<std::size_t>()};
    if (jm.contains("error")) m.error = jm.at("error").get<std::string>();
    if (jm.contains("timing")) {
      m.fit_seconds = jm.at("timing").at("fit_seconds").get<double>();
      m.predict_seconds = jm.at("timing").at("predict_seconds").get<double>();
    }
    m.actual = jm.at("actual").get<std::vector<double>>();
    m.predicted = jm.at("predicted").get<std::vector<double>>();
    r.models.push_back(std::move(m));
  }
  return r;
}

// 11980.4 -> "11 980"
inline std::string group_thousands(double v) {
  long long x = std::llround(v);
  const bool neg = x < 0;
  std::string digits = std::to_string(neg ? -x : x);
  std::string out;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i > 0 && (digits.size() - i) % 3 == 0) out.push_back(' ');
    out.push_back(digits[i]);
  }
  return neg ? "-" + out : out;
}

inline std::string format_r2(double r2) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", r2);
  return buf;
}

// "Gradient Boosting Regressor | 0.724 | 11 980 | 8 113"
inline std::string format_table_row(std::string_view model, const EvalResult& e) {
  return std::string(model) + " | " + format_r2(e.r2) + " | " + group_thousands(e.rmse) + " | " +
         group_thousands(e.mae);
}

inline std::string render_report(const Report& report, ReportFormat format) {
  if (format == ReportFormat::json) return report_to_json(report).dump(2) + "\n";
  std::ostringstream out;
  if (format == ReportFormat::markdown) {
    out << "| Model | R² | RMSE | MAE |\n|---|---:|---:|---:|\n";
    for (const auto& m : report.models) {
      if (m.metrics)
        out << "| " << format_table_row(display_name(m.kind), *m.metrics) << " |\n";
      else
        out << "| " << display_name(m.kind) << " | error | error | error |\n";
    }
    bool any_error = false;
    for (const auto& m : report.models)
      if (m.error) {
        if (!any_error) out << "\nErrors:\n";
        any_error = true;
        out << "- " << display_name(m.kind) << ": " << *m.error << "\n";
      }
  } else {
    out << "Model,R²,RMSE,MAE\n";
    for (const auto& m : report.models) {
      if (m.metrics)
        out << display_name(m.kind) << "," << format_r2(m.metrics->r2) << "," << group_thousands(m.metrics->rmse)
            << "," << group_thousands(m.metrics->mae) << "\n";
      else
        out << display_name(m.kind) << ",error,error,error\n";
    }
  }
  return out.str();
}

/// Writes <dir>/<ModelKind>.csv with columns actual,predicted for every model
/// that produced predictions. Returns the written paths in report order.
inline std::vector<std::filesystem::path> export_scatter(const Report& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  for (const auto& m : report.models) {
    if (!m.metrics) continue;
    const auto path = dir / (std::string(identifier(m.kind)) + ".csv");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "actual,predicted\n";
    for (std::size_t i = 0; i < m.actual.size(); ++i)
      out << format_real(m.actual[i]) << ',' << format_real(m.predicted[i]) << '\n';
    if (!out) throw IoError("write failed for " + path.string());
    written.push_back(path);
  }
  return written;
}

// ---------------------------------------------------------------------------
// Pipeline

/// parse/generate -> drop identifier -> dedupe -> drop missing -> encode ->
/// split -> fit/predict/evaluate each model. A failing model becomes an
/// error row; a failing pipeline step throws PipelineError.
inline Report run_benchmark(const BenchConfig& cfg) {
  try {
    cfg.check();
  } catch (const Error& e) {
    throw PipelineError("config", e.what());
  }

  auto step = [](const char* name, auto&& fn) {
    try {
      return fn();
    } catch (const InputNotFound&) {
      throw;
    } catch (const std::exception& e) {
      throw PipelineError(name, e.what());
    }
  };

  Report report;
  Dataset raw;
  if (cfg.input) {
    if (!std::filesystem::is_regular_file(*cfg.input)) throw InputNotFound(cfg.input->string());
    raw = step("parse", [&] {
      std::ifstream in(*cfg.input, std::ios::binary);
      if (!in) throw InputNotFound(cfg.input->string());
      return parse_csv(in, cfg.schema, cfg.delimiter);
    });
    report.provenance = {{"input", cfg.input->string()}};
  } else {
    raw = step("generate", [&] { return generate_synthetic(*cfg.synth); });
    report.provenance = {{"synthetic", {{"n", cfg.synth->n}, {"noise_sigma", cfg.synth->noise_sigma}, {"seed", cfg.synth->seed}}}};
  }
  report.provenance["seed"] = cfg.seed;
  report.provenance["test_fraction"] = cfg.test_fraction;
  report.provenance["encoding"] = cfg.encoding == CategoricalEncoding::ordinal ? "ordinal" : "one_hot";

  auto& s = report.summary;
  s.rows_in = raw.row_count();
  s.violations = validate(raw).size();

  Dataset ds = step("drop_identifier", [&] {
    if (auto id = raw.schema().identifier_index()) return drop_columns(raw, {raw.schema()[*id].name});
    return raw;
  });
  const std::size_t before_dedupe = ds.row_count();
  ds = step("dedupe", [&] { return dedupe_rows(ds); });
  s.duplicates_removed = before_dedupe - ds.row_count();
  auto missing = step("drop_missing", [&] { return drop_missing_columns(ds, cfg.max_missing_fraction); });
  s.missing_rows_removed = missing.rows_removed;
  s.dropped_columns = missing.dropped;
  ds = std::move(missing.dataset);
  s.rows_out = ds.row_count();

  const auto data = step("encode", [&] { return encode(ds, fit_ordinal_encoding(ds), cfg.encoding); });
  s.n_features = data.x.cols();
  const auto split = step("split", [&] { return train_test_split(data.x.rows(), cfg.test_fraction, cfg.seed); });
  s.n_train = split.train.size();
  s.n_test = split.test.size();

  const auto x_train = data.x.select_rows(split.train);
  const auto y_train = select(data.y, split.train);
  const auto x_test = data.x.select_rows(split.test);
  const auto y_test = select(data.y, split.test);

  std::vector<ModelKind> kinds = cfg.models;
  std::sort(kinds.begin(), kinds.end(), [](ModelKind a, ModelKind b) { return display_name(a) < display_name(b); });
  kinds.erase(std::unique(kinds.begin(), kinds.end()), kinds.end());

  using clock = std::chrono::steady_clock;
  for (auto kind : kinds) {
    ModelResult res;
    res.kind = kind;
    try {
      const auto spec = model_spec_for(cfg, kind);
      const auto t0 = clock::now();
      const auto model = fit_model(spec, x_train, y_train);
      const auto t1 = clock::now();
      auto pred = predict(model, x_test);
      const auto t2 = clock::now();
      res.fit_seconds = std::chrono::duration<double>(t1 - t0).count();
      res.predict_seconds = std::chrono::duration<double>(t2 - t1).count();
      res.metrics = evaluate(y_test, pred);
      res.actual = y_test;
      res.predicted = std::move(pred);
    } catch (const std::exception& e) {
      res.metrics.reset();
      res.error = e.what();
      res.actual.clear();
      res.predicted.clear();
    }
    report.models.push_back(std::move(res));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Key-value config files

/// Parses "key = value" lines. '#' starts a comment; blank lines are ignored.
inline std::vector<std::pair<std::string, std::string>> parse_key_values(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto t = detail::trim(line);
    if (!t.empty() && t.back() == '\r') t.remove_suffix(1);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos)
      throw InvalidArgument("config line " + std::to_string(lineno) + ": expected key = value");
    auto key = detail::trim(t.substr(0, eq));
    auto value = detail::trim(t.substr(eq + 1));
    if (key.empty()) throw InvalidArgument("config line " + std::to_string(lineno) + ": empty key");
    out.emplace_back(std::string(key), std::string(value));
  }
  return out;
}

}  // namespace tabens
