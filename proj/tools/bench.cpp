// bench: run the listing-price ensemble benchmark from the command line.
//
//   bench run --synth 1200 --noise 6000 --seed 42 --format md
//   bench run --input listings.csv --report report.json --format json --scatter-dir scatter/
//   bench describe-synth

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tabens/bench.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPipeline = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Every run option as raw text, so flags and config-file values share one conversion path.
struct RawOptions {
  std::map<std::string, std::string> values;
  std::vector<std::string> overrides;
};

const std::vector<std::string> kRunKeys = {"input",  "synth",       "noise",       "synth-seed", "seed",
                                           "test-fraction", "models", "report",   "format",     "scatter-dir",
                                           "jobs",   "delimiter",   "max-missing", "encoding"};

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  unsigned long long x = 0;
  try {
    if (!v.empty() && v.front() == '-') throw std::invalid_argument("negative");
    x = std::stoull(v, &pos);
  } catch (const std::exception&) {
    pos = std::string::npos;
  }
  if (pos != v.size()) throw UsageError("--" + key + " expects an unsigned integer, got '" + v + "'");
  return x;
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double x = 0;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = std::string::npos;
  }
  if (pos != v.size()) throw UsageError("--" + key + " expects a number, got '" + v + "'");
  return x;
}

struct RunPlan {
  tabens::BenchConfig config;
  std::optional<std::string> report_path;
  tabens::ReportFormat format = tabens::ReportFormat::markdown;
  std::optional<std::string> scatter_dir;
};

RunPlan make_plan(const RawOptions& raw) {
  RunPlan plan;
  auto& cfg = plan.config;
  const auto& v = raw.values;
  auto get = [&](const std::string& k) -> const std::string* {
    auto it = v.find(k);
    return it == v.end() ? nullptr : &it->second;
  };

  if (const auto* s = get("seed")) cfg.seed = to_u64("seed", *s);
  if (const auto* in = get("input")) cfg.input = *in;
  if (const auto* n = get("synth")) {
    tabens::SyntheticSpec spec;
    spec.n = to_u64("synth", *n);
    spec.seed = cfg.seed;
    if (const auto* s = get("noise")) spec.noise_sigma = to_double("noise", *s);
    if (const auto* s = get("synth-seed")) spec.seed = to_u64("synth-seed", *s);
    if (spec.n < 20) throw UsageError("--synth must be >= 20");
    if (!(spec.noise_sigma >= 0.0)) throw UsageError("--noise must be >= 0");
    cfg.synth = spec;
  } else if (get("noise") || get("synth-seed")) {
    throw UsageError("--noise/--synth-seed require --synth");
  }
  if (cfg.input && cfg.synth) throw UsageError("--input and --synth are mutually exclusive");
  if (!cfg.input && !cfg.synth) throw UsageError("one of --input or --synth is required");

  if (const auto* s = get("test-fraction")) {
    cfg.test_fraction = to_double("test-fraction", *s);
    if (!(cfg.test_fraction > 0.0 && cfg.test_fraction < 1.0)) throw UsageError("--test-fraction must lie in (0, 1)");
  }
  if (const auto* s = get("max-missing")) {
    cfg.max_missing_fraction = to_double("max-missing", *s);
    if (!(cfg.max_missing_fraction >= 0.0 && cfg.max_missing_fraction < 1.0))
      throw UsageError("--max-missing must lie in [0, 1)");
  }
  if (const auto* s = get("models")) {
    cfg.models.clear();
    std::stringstream in(*s);
    std::string name;
    while (std::getline(in, name, ',')) {
      if (name.empty()) continue;
      auto k = tabens::parse_model_kind(name);
      if (!k) throw UsageError("unknown model '" + name + "'");
      cfg.models.push_back(*k);
    }
    if (cfg.models.empty()) throw UsageError("--models is empty");
  }
  if (const auto* s = get("format")) {
    auto f = tabens::parse_report_format(*s);
    if (!f) throw UsageError("--format must be md, csv or json");
    plan.format = *f;
  }
  if (const auto* s = get("encoding")) {
    if (*s == "ordinal") cfg.encoding = tabens::CategoricalEncoding::ordinal;
    else if (*s == "onehot" || *s == "one_hot") cfg.encoding = tabens::CategoricalEncoding::one_hot;
    else throw UsageError("--encoding must be ordinal or onehot");
  }
  if (const auto* s = get("delimiter")) {
    if (s->size() != 1) throw UsageError("--delimiter must be a single character");
    cfg.delimiter = (*s)[0];
  }
  if (const auto* s = get("jobs")) cfg.n_jobs = static_cast<unsigned>(to_u64("jobs", *s));
  if (const auto* s = get("report")) plan.report_path = *s;
  if (const auto* s = get("scatter-dir")) plan.scatter_dir = *s;

  for (const auto& o : raw.overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects model.param=value, got '" + o + "'");
    cfg.overrides.emplace_back(o.substr(0, eq), o.substr(eq + 1));
  }
  // Validate every override against its model now, so typos are usage errors.
  for (auto k : tabens::kAllModelKinds) {
    try {
      (void)tabens::model_spec_for(cfg, k);
    } catch (const tabens::Error& e) {
      throw UsageError(e.what());
    }
  }
  return plan;
}

int run(const RunPlan& plan) {
  const auto report = tabens::run_benchmark(plan.config);
  const auto text = tabens::render_report(report, plan.format);
  if (plan.report_path) {
    std::ofstream out(*plan.report_path, std::ios::binary);
    if (!out || !(out << text)) throw tabens::IoError("cannot write report to " + *plan.report_path);
  } else {
    std::cout << text;
  }
  if (plan.scatter_dir) tabens::export_scatter(report, *plan.scatter_dir);
  for (const auto& m : report.models)
    if (m.error) std::cerr << "warning: " << tabens::display_name(m.kind) << " failed: " << *m.error << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ensemble regression benchmark for listing-price data"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "Run the preprocessing pipeline and all requested models");
  RawOptions raw;
  std::map<std::string, std::string> flag_values;
  std::map<std::string, CLI::Option*> flag_options;
  const std::map<std::string, std::string> help = {
      {"input", "Listing CSV file (header row required)"},
      {"synth", "Generate N synthetic listings instead of reading a file"},
      {"noise", "Synthetic price noise sigma in dollars (default 6000)"},
      {"synth-seed", "Seed of the synthetic generator (default: --seed)"},
      {"seed", "Seed for the split and every model (default 42)"},
      {"test-fraction", "Held-out fraction (default 0.25)"},
      {"models", "Comma-separated model list (default: all eight)"},
      {"report", "Write the report here instead of stdout"},
      {"format", "Report format: md, csv or json (default md)"},
      {"scatter-dir", "Write actual/predicted CSVs per model into this directory"},
      {"jobs", "Worker threads for ensemble members, 0 = all cores (default 1)"},
      {"delimiter", "CSV delimiter (default ',')"},
      {"max-missing", "Drop feature columns whose missing fraction exceeds this (default 0)"},
      {"encoding", "Categorical coding: ordinal or onehot (default ordinal)"},
  };
  for (const auto& key : kRunKeys) flag_options[key] = run_cmd->add_option("--" + key, flag_values[key], help.at(key));
  std::vector<std::string> set_flags;
  run_cmd->add_option("--set", set_flags, "Model parameter override model.param=value (repeatable)");
  std::string config_path;
  run_cmd->add_option("--config", config_path, "key = value config file mirroring the flags; flags win");

  app.add_subcommand("describe-synth", "Print the synthetic price function and multiplier tables");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (app.got_subcommand("describe-synth")) {
    std::cout << tabens::describe_synthetic();
    return kExitOk;
  }

  try {
    if (!config_path.empty()) {
      std::ifstream in(config_path, std::ios::binary);
      if (!in) throw UsageError("cannot read config file " + config_path);
      std::stringstream buf;
      buf << in.rdbuf();
      for (const auto& [key, value] : tabens::parse_key_values(buf.str())) {
        if (key.find('.') != std::string::npos) {
          raw.overrides.push_back(key + "=" + value);
          continue;
        }
        auto it = flag_options.find(key);
        if (it == flag_options.end()) throw UsageError("unknown config key '" + key + "'");
        if (it->second->count() == 0) raw.values[key] = value;
      }
    }
    for (const auto& [key, opt] : flag_options)
      if (opt->count() > 0) raw.values[key] = flag_values[key];
    raw.overrides.insert(raw.overrides.end(), set_flags.begin(), set_flags.end());

    const auto plan = make_plan(raw);
    return run(plan);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const tabens::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPipeline;
  }
}
