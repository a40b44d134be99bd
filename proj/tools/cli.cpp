#include "cli.hpp"

#include "volrisk/arima.hpp"
#include "volrisk/bench.hpp"
#include "volrisk/ingest.hpp"
#include "volrisk/linmod.hpp"
#include "volrisk/report.hpp"
#include "volrisk/stattests.hpp"
#include "volrisk/types.hpp"
#include "volrisk/volcore.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

namespace volrisk::cli {
namespace {

namespace fs = std::filesystem;

struct RunConfig {
  fs::path data_dir = ".";
  std::string benchmark = "INDEX";
  std::vector<int> windows{5, 10, 30, 90};
  std::optional<Frequency> frequency;
  std::vector<int> horizons{5, 10, 30, 90};
  std::vector<int> sizes{10, 30, 50, 80};
  std::uint64_t seed = 42;
  fs::path out = "out";
  std::optional<int> rank;
  std::optional<int> lag;
  std::optional<int> vol_window;
  double guardrail_mult = 3.0;
  double alpha = 0.05;
  int portfolios = 100;
  int estimation_window = 1000;
  bench::EvaluationMode mode = bench::EvaluationMode::Fixed;
  std::optional<std::string> fixed_clock;
  int assets = 30;
  int length = 2000;
  ingest::CsvSchema schema;
  std::map<std::string, std::string> raw;  // merged settings, for the run record
};

// Keys accepted both as --flags and in the key=value config file.
const std::vector<std::string> kKeys{"data-dir",   "benchmark", "windows",     "frequency",         "horizon",
                                     "sizes",      "seed",      "out",         "rank",              "lag",
                                     "vol-window", "guardrail-mult", "alpha",  "portfolios",        "estimation-window",
                                     "evaluation", "fixed-clock", "assets",    "length",            "timestamp-col",
                                     "price-col",  "timestamp-format"};

std::vector<int> parse_int_list(const std::string& key, const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size() || v <= 0) throw std::invalid_argument("");
      out.push_back(v);
    } catch (const std::exception&) {
      throw DataError("--" + key + ": '" + item + "' is not a positive integer");
    }
  }
  if (out.empty()) throw DataError("--" + key + ": empty list");
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    T v{};
    if constexpr (std::is_same_v<T, double>) {
      v = std::stod(text, &used);
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
      v = std::stoull(text, &used);
    } else {
      v = static_cast<T>(std::stol(text, &used));
    }
    if (used != text.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw DataError("--" + key + ": cannot parse '" + text + "'");
  }
}

RunConfig make_config(const std::map<std::string, std::string>& raw) {
  RunConfig c;
  c.raw = raw;
  auto get = [&](const std::string& k) -> const std::string* {
    const auto it = raw.find(k);
    return it == raw.end() ? nullptr : &it->second;
  };
  if (auto v = get("data-dir")) c.data_dir = *v;
  if (auto v = get("benchmark")) c.benchmark = *v;
  if (auto v = get("windows")) c.windows = parse_int_list("windows", *v);
  if (auto v = get("frequency")) c.frequency = parse_frequency(*v);
  if (auto v = get("horizon")) c.horizons = parse_int_list("horizon", *v);
  if (auto v = get("sizes")) c.sizes = parse_int_list("sizes", *v);
  if (auto v = get("seed")) c.seed = parse_number<std::uint64_t>("seed", *v);
  if (auto v = get("out")) c.out = *v;
  if (auto v = get("rank")) c.rank = parse_number<int>("rank", *v);
  if (auto v = get("lag")) c.lag = parse_number<int>("lag", *v);
  if (auto v = get("vol-window")) c.vol_window = parse_number<int>("vol-window", *v);
  if (auto v = get("guardrail-mult")) c.guardrail_mult = parse_number<double>("guardrail-mult", *v);
  if (auto v = get("alpha")) c.alpha = parse_number<double>("alpha", *v);
  if (auto v = get("portfolios")) c.portfolios = parse_number<int>("portfolios", *v);
  if (auto v = get("estimation-window")) c.estimation_window = parse_number<int>("estimation-window", *v);
  if (auto v = get("evaluation")) {
    if (*v == "fixed") {
      c.mode = bench::EvaluationMode::Fixed;
    } else if (*v == "rolling") {
      c.mode = bench::EvaluationMode::Rolling;
    } else {
      throw DataError("--evaluation must be 'fixed' or 'rolling'");
    }
  }
  if (auto v = get("fixed-clock")) c.fixed_clock = *v;
  if (auto v = get("assets")) c.assets = parse_number<int>("assets", *v);
  if (auto v = get("length")) c.length = parse_number<int>("length", *v);

  std::map<std::string, std::string> schema_cfg;
  if (auto v = get("timestamp-col")) schema_cfg["timestamp_col"] = *v;
  if (auto v = get("price-col")) schema_cfg["price_col"] = *v;
  if (auto v = get("timestamp-format")) schema_cfg["timestamp_format"] = *v;
  c.schema = ingest::schema_from_config(schema_cfg);
  c.schema.frequency = c.frequency;

  if (!(c.alpha == 0.01 || c.alpha == 0.05 || c.alpha == 0.10)) throw DataError("--alpha must be 0.01, 0.05 or 0.10");
  if (!(c.guardrail_mult > 0.0)) throw DataError("--guardrail-mult must be positive");
  if (c.portfolios < 1) throw DataError("--portfolios must be >= 1");
  for (int w : c.windows) {
    if (w < 2) throw DataError("--windows entries must be >= 2");
  }
  return c;
}

std::string generated_at(const RunConfig& c) {
  if (c.fixed_clock) return *c.fixed_clock;
  const auto now = std::chrono::system_clock::now();
  return ingest::format_iso8601(std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count());
}

struct Dataset {
  ReturnSeries market;
  std::vector<ReturnSeries> assets;
  Frequency frequency = Frequency::Day;
};

Dataset load_dataset(const RunConfig& c, std::ostream& err) {
  if (!fs::is_directory(c.data_dir)) throw DataError("data directory not found: " + c.data_dir.string());
  const fs::path bench_path = c.data_dir / (c.benchmark + ".csv");
  if (!fs::exists(bench_path)) throw DataError("benchmark file not found: " + bench_path.string());

  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(c.data_dir)) {
    if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());

  auto load = [&](const fs::path& p) {
    auto res = ingest::load_csv(p, c.schema);
    for (const auto& r : res.rejected) err << "warning: " << p.string() << ':' << r.line << ": " << r.reason << '\n';
    if (res.series.size() < 2) throw DataError("'" + p.string() + "' has fewer than 2 valid rows");
    return ingest::to_log_returns(res.series);
  };
  Dataset d;
  d.market = load(bench_path);
  for (const auto& p : files) {
    if (p.stem() == c.benchmark) continue;
    d.assets.push_back(load(p));
  }
  if (d.assets.empty()) throw DataError("no asset CSVs besides the benchmark in " + c.data_dir.string());
  d.frequency = d.market.frequency;
  for (const auto& a : d.assets) {
    if (a.frequency != d.frequency) throw DataError("'" + a.asset_id + "' and the benchmark have different frequencies");
  }
  return d;
}

struct WindowData {
  int window = 0;
  VolSeries market;
  std::vector<VolSeries> asset_vols;  // assets long enough for the window
  std::vector<RatioSeries> hvrs;
};

WindowData window_data(const Dataset& d, int k, std::ostream& err) {
  WindowData w;
  w.window = k;
  w.market = vol::rolling_vol(d.market, k);
  for (const auto& a : d.assets) {
    if (a.size() < static_cast<std::size_t>(k)) {
      err << "warning: '" << a.asset_id << "' is shorter than window " << k << ", skipped\n";
      continue;
    }
    auto v = vol::rolling_vol(a, k);
    auto r = vol::hvr(v, w.market);
    w.asset_vols.push_back(std::move(v));
    w.hvrs.push_back(std::move(r));
  }
  return w;
}

void write_run_record(const RunConfig& c, const std::string& command) {
  nlohmann::json j;
  j["command"] = command;
  j["generated_at"] = generated_at(c);
  auto settings = c.raw;
  settings.erase("out");  // keeps the record identical across output directories
  j["settings"] = settings;
  report::write_text(c.out / "run.json", j.dump(2) + "\n");
}

void cmd_hvr(const RunConfig& c, const Dataset& d, std::ostream& out, std::ostream& err) {
  const std::string stamp = generated_at(c);
  std::vector<std::pair<std::string, vol::DistDiagnostics>> dists;
  for (int k : c.windows) {
    const auto w = window_data(d, k, err);
    std::vector<double> means;
    for (const auto& r : w.hvrs) {
      const fs::path base = c.out / "hvr" / (r.asset_id + "_" + std::to_string(k));
      report::write_text(base.string() + ".csv", report::ratio_series_csv(r));
      report::write_text(base.string() + ".json", report::ratio_metadata_json(r, stamp));
      if (!r.ratios.empty()) means.push_back(vol::mean_ratio(r));
    }
    out << horizon_label(k, d.frequency) << ": " << w.hvrs.size() << " HVR series written\n";
    if (means.size() >= 8) dists.emplace_back(horizon_label(k, d.frequency), vol::hvr_distribution(means));
  }
  if (!dists.empty()) report::write_text(c.out / "hvr_distribution.json", report::distribution_json(dists));
}

void cmd_tests(const RunConfig& c, const Dataset& d, std::ostream& out, std::ostream& err) {
  std::vector<stattests::BatchSummary> rows;
  for (int k : c.windows) {
    const auto w = window_data(d, k, err);
    std::vector<stattests::VolPair> pairs;
    for (const auto& v : w.asset_vols) pairs.push_back({v, w.market});
    rows.push_back(stattests::batch_classify(w.hvrs, pairs, horizon_label(k, d.frequency), c.alpha));
    out << rows.back().horizon << ": " << report::fixed(rows.back().pct_stationary, 1) << "% stationary, "
        << report::fixed(rows.back().pct_cointegrated, 1) << "% cointegrated (" << rows.back().n_tested
        << " tested, " << rows.back().n_dropped << " dropped)\n";
  }
  report::write_text(c.out / "table3_stationarity.csv", report::tests_table_csv(rows));
}

void cmd_naive(const RunConfig& c, const Dataset& d, std::ostream& out, std::ostream& err) {
  std::vector<linmod::ModelComparison> rows;
  for (int k : c.windows) {
    const auto w = window_data(d, k, err);
    for (auto m : {linmod::NaiveModel::M1, linmod::NaiveModel::M2}) {
      rows.push_back(linmod::naive_model_battery(w.asset_vols, w.market, horizon_label(k, d.frequency), m, c.alpha));
      out << rows.back().horizon << ' ' << linmod::to_string(m) << ": mean adj R2 "
          << report::fixed(rows.back().mean_adj_r2, 1) << "%, mean MAPE " << report::fixed(rows.back().mean_mape, 1)
          << "%\n";
    }
  }
  report::write_text(c.out / "table1_2_naive_models.csv", report::naive_table_csv(rows));
}

void cmd_arima(const RunConfig& c, const Dataset& d, std::ostream& out, std::ostream& err) {
  std::vector<arima::OrderCensus> rows;
  arima::AutoOptions opts;
  opts.alpha = c.alpha;
  for (int k : c.windows) {
    const auto w = window_data(d, k, err);
    std::vector<std::vector<double>> panel;
    for (const auto& r : w.hvrs) panel.push_back(r.ratios);
    rows.push_back(arima::order_census(panel, horizon_label(k, d.frequency), opts));
    out << rows.back().horizon << ": best " << arima::to_string(rows.back().best) << " ("
        << report::fixed(rows.back().coverage_pct, 1) << "% coverage, " << rows.back().n_failed << " failed)\n";
  }
  report::write_text(c.out / "table4_arima.csv", report::arima_table_csv(rows));
}

void cmd_bench(const RunConfig& c, const Dataset& d, std::ostream& out) {
  const auto panel = bench::make_panel(d.assets);
  bench::BenchConfig cfg;
  cfg.sizes = c.sizes;
  cfg.horizons = c.horizons;
  cfg.n_portfolios = c.portfolios;
  cfg.estimation_window = c.estimation_window;
  cfg.seed = c.seed;
  cfg.guardrail_multiplier = c.guardrail_mult;
  cfg.rank = c.rank;
  cfg.vecm_lag = c.lag;
  cfg.vol_window = c.vol_window;
  cfg.mode = c.mode;
  const auto res = bench::run_benchmark(panel, cfg);
  const auto census = bench::guardrail_census(res.records);
  report::write_text(c.out / "table5_vecm_vs_classical.csv", report::bench_table_csv(res.table, panel.frequency));
  report::write_text(c.out / "table6_guardrail_hits.csv", report::guardrail_table_csv(census, panel.frequency));
  report::write_text(c.out / "ape_boxplots.json", report::boxplot_json(bench::ape_boxplot_data(res.records), panel.frequency));
  report::write_text(c.out / "bench_records.csv", report::bench_records_csv(res.records, panel.frequency));
  for (const auto& r : res.table) {
    out << horizon_label(r.horizon, panel.frequency) << " N=" << r.n_assets << ": V " << report::fixed(r.v(), 2)
        << " C " << report::fixed(r.c(), 2) << " delta " << report::fixed(r.delta(), 2) << " win "
        << report::fixed(r.win_pct(), 1) << "% guardrail " << r.guardrail_hits << '\n';
  }
}

void write_prices(const fs::path& path, const PriceSeries& s) {
  std::ostringstream csv;
  csv << "timestamp,price\n";
  char buf[64];
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.12g", s.prices[i]);
    csv << ingest::format_iso8601(s.times[i]) << ',' << buf << '\n';
  }
  report::write_text(path, csv.str());
}

void cmd_synth(const RunConfig& c, std::ostream& out) {
  bench::SyntheticSpec spec;
  spec.n = c.assets;
  spec.rank = c.rank;
  spec.length = c.length;
  spec.seed = c.seed;
  spec.frequency = c.frequency.value_or(Frequency::Day);
  const auto syn = bench::generate_synthetic(spec);
  for (const auto& p : bench::to_prices(syn.panel)) write_prices(c.out / (p.asset_id + ".csv"), p);

  bench::ReturnPanel index_panel;
  index_panel.asset_ids = {c.benchmark};
  index_panel.frequency = syn.panel.frequency;
  index_panel.times = syn.panel.times;
  const auto index = bench::synthetic_index(syn.panel, c.benchmark);
  index_panel.returns = Eigen::Map<const Eigen::VectorXd>(index.returns.data(), static_cast<Eigen::Index>(index.size()));
  write_prices(c.out / (c.benchmark + ".csv"), bench::to_prices(index_panel).front());

  nlohmann::json truth;
  truth["n"] = spec.n;
  truth["rank"] = spec.rank.value_or(spec.n - 1);
  truth["length"] = spec.length;
  truth["seed"] = spec.seed;
  truth["loading"] = spec.loading;
  truth["logvol_noise"] = spec.logvol_noise;
  truth["correlation"] = spec.correlation;
  truth["frequency"] = to_string(spec.frequency);
  truth["anchor"] = syn.panel.asset_ids.back();
  truth["mu"] = std::vector<double>(syn.mu.data(), syn.mu.data() + syn.mu.size());
  truth["generated_at"] = generated_at(c);
  report::write_text(c.out / "synthetic_truth.json", truth.dump(2) + "\n");
  out << "wrote " << spec.n << " assets and " << c.benchmark << " (" << spec.length << " returns each) to "
      << c.out.string() << '\n';
}

const char* kUsage =
    "usage: volrisk <command> [options]\n"
    "commands:\n"
    "  hvr       rolling HVR series per asset and window, plus log-HVR distribution data\n"
    "  tests     ADF / Engle-Granger shares per window (Table 3)\n"
    "  naive     naive volatility models M1 and M2 (Tables 1-2)\n"
    "  arima     auto-ARIMA order census on HVRs (Table 4)\n"
    "  bench     VECM vs classical benchmark (Tables 5-6, boxplot data)\n"
    "  synth     write a synthetic cointegrated-volatility dataset\n"
    "  pipeline  hvr, tests, naive, arima and bench in sequence\n"
    "run 'volrisk <command> --help' for options\n";

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  if (args.empty() || args[0] == "--help" || args[0] == "-h") {
    (args.empty() ? err : out) << kUsage;
    return args.empty() ? 2 : 0;
  }
  const std::string command = args[0];
  const std::vector<std::string> known{"hvr", "tests", "naive", "arima", "bench", "synth", "pipeline"};
  if (std::find(known.begin(), known.end(), command) == known.end()) {
    err << "unknown command '" << command << "'\n" << kUsage;
    return 2;
  }

  CLI::App app("volrisk " + command);
  std::map<std::string, std::string> flag_values;
  std::map<std::string, CLI::Option*> flag_opts;
  for (const auto& k : kKeys) {
    if (k == "fixed-clock") continue;
    flag_opts[k] = app.add_option("--" + k, flag_values[k]);
  }
  std::string clock_value;
  auto* clock_opt = app.add_option("--fixed-clock", clock_value, "use this timestamp in metadata (default epoch 0)")
                        ->expected(0, 1);
  std::string config_path;
  app.add_option("--config", config_path, "key=value settings file; flags take precedence");

  try {
    std::vector<std::string> rest(args.begin() + 1, args.end());
    std::reverse(rest.begin(), rest.end());
    app.parse(rest);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    std::map<std::string, std::string> merged;
    if (!config_path.empty()) {
      for (const auto& [key, v] : ingest::load_key_value(config_path)) {
        std::string k = key;
        std::replace(k.begin(), k.end(), '_', '-');
        if (std::find(kKeys.begin(), kKeys.end(), k) == kKeys.end()) throw DataError("config: unknown key '" + k + "'");
        merged[k] = v;
      }
    }
    for (const auto& [k, opt] : flag_opts) {
      if (opt->count() > 0) merged[k] = flag_values[k];
    }
    if (clock_opt->count() > 0) merged["fixed-clock"] = clock_value.empty() ? "1970-01-01T00:00:00Z" : clock_value;

    const RunConfig cfg = make_config(merged);
    if (command == "synth") {
      cmd_synth(cfg, out);
      write_run_record(cfg, command);
      return 0;
    }
    const Dataset data = load_dataset(cfg, err);
    if (command == "hvr" || command == "pipeline") cmd_hvr(cfg, data, out, err);
    if (command == "tests" || command == "pipeline") cmd_tests(cfg, data, out, err);
    if (command == "naive" || command == "pipeline") cmd_naive(cfg, data, out, err);
    if (command == "arima" || command == "pipeline") cmd_arima(cfg, data, out, err);
    if (command == "bench" || command == "pipeline") cmd_bench(cfg, data, out);
    write_run_record(cfg, command);
    return 0;
  } catch (const DataError& e) {
    err << "input error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "input error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    err << "computation failed: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "computation failed: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace volrisk::cli
