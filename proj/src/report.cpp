#include "volrisk/report.hpp"

#include "volrisk/ingest.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace volrisk::report {
namespace {

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

std::string fixed(double v, int decimals) {
  if (!std::isfinite(v)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);  // no "-0.00"
  return s;
}

std::string naive_table_csv(std::span<const linmod::ModelComparison> rows) {
  std::vector<std::string> horizons;
  std::map<std::pair<std::string, std::string>, const linmod::ModelComparison*> cell;
  for (const auto& r : rows) {
    if (std::find(horizons.begin(), horizons.end(), r.horizon) == horizons.end()) horizons.push_back(r.horizon);
    cell[{linmod::to_string(r.model), r.horizon}] = &r;
  }
  std::ostringstream out;
  out << "model,statistic";
  for (const auto& h : horizons) out << ',' << h;
  out << '\n';
  struct Stat {
    const char* name;
    double (*get)(const linmod::ModelComparison&);
    int decimals;
  };
  const Stat stats[] = {
      {"pct_beta_significant", [](const linmod::ModelComparison& m) { return m.pct_beta_significant; }, 1},
      {"mean_adj_r2_pct", [](const linmod::ModelComparison& m) { return m.mean_adj_r2; }, 1},
      {"mean_mape_pct", [](const linmod::ModelComparison& m) { return m.mean_mape; }, 1},
      {"mean_aic", [](const linmod::ModelComparison& m) { return m.mean_aic; }, 1},
      {"mean_bic", [](const linmod::ModelComparison& m) { return m.mean_bic; }, 1},
  };
  for (const char* model : {"M1", "M2"}) {
    for (const auto& s : stats) {
      out << model << ',' << s.name;
      for (const auto& h : horizons) {
        const auto it = cell.find({model, h});
        out << ',' << (it == cell.end() ? "NA" : fixed(s.get(*it->second), s.decimals));
      }
      out << '\n';
    }
  }
  return out.str();
}

std::string tests_table_csv(std::span<const stattests::BatchSummary> rows) {
  std::ostringstream out;
  out << "horizon,stationary_pct,cointegrated_pct,n_tested,n_dropped\n";
  for (const auto& r : rows) {
    const bool any = r.n_tested > 0;
    out << r.horizon << ',' << (any ? fixed(r.pct_stationary, 1) : "NA") << ','
        << (any ? fixed(r.pct_cointegrated, 1) : "NA") << ',' << r.n_tested << ',' << r.n_dropped << '\n';
  }
  return out.str();
}

std::string arima_table_csv(std::span<const arima::OrderCensus> rows) {
  std::ostringstream out;
  out << "horizon,modal_p,modal_p_pct,modal_d,modal_d_pct,modal_q,modal_q_pct,best_triple,coverage_pct,mape_pct,rmse\n";
  for (const auto& r : rows) {
    out << r.horizon << ',' << r.modal_p << ',' << fixed(r.modal_p_pct, 1) << ',' << r.modal_d << ','
        << fixed(r.modal_d_pct, 1) << ',' << r.modal_q << ',' << fixed(r.modal_q_pct, 1) << ",\""
        << arima::to_string(r.best) << "\"," << fixed(r.coverage_pct, 1) << ',' << fixed(r.mean_mape, 2) << ','
        << fixed(r.mean_rmse, 3) << '\n';
  }
  return out.str();
}

std::string bench_table_csv(std::span<const bench::BenchRow> rows, Frequency freq) {
  std::ostringstream out;
  out << "horizon,N,V,C,delta,win_pct\n";
  for (const auto& r : rows) {
    out << horizon_label(r.horizon, freq) << ',' << r.n_assets << ',' << fixed(r.v(), 2) << ',' << fixed(r.c(), 2)
        << ',' << fixed(r.delta(), 2) << ',' << fixed(r.win_pct(), 1) << '\n';
  }
  return out.str();
}

std::string guardrail_table_csv(std::span<const bench::CensusRow> rows, Frequency freq) {
  std::vector<int> horizons, sizes;
  std::map<std::pair<int, int>, std::size_t> hits;
  for (const auto& r : rows) {
    if (std::find(horizons.begin(), horizons.end(), r.horizon) == horizons.end()) horizons.push_back(r.horizon);
    if (std::find(sizes.begin(), sizes.end(), r.n_assets) == sizes.end()) sizes.push_back(r.n_assets);
    hits[{r.horizon, r.n_assets}] += r.hits;
  }
  std::ostringstream out;
  out << "horizon";
  for (int n : sizes) out << ",N=" << n;
  out << '\n';
  for (int h : horizons) {
    out << horizon_label(h, freq);
    for (int n : sizes) {
      const auto it = hits.find({h, n});
      out << ',' << (it == hits.end() ? std::string("NA") : std::to_string(it->second));
    }
    out << '\n';
  }
  return out.str();
}

std::string bench_records_csv(std::span<const bench::BenchRecord> records, Frequency freq) {
  std::ostringstream out;
  out << "horizon,N,portfolio,origin,realized,forecast_vecm_raw,forecast_vecm,forecast_classical,trailing_average,"
         "ape_vecm,ape_classical,guardrail_hit,unstable,vecm_lag\n";
  for (const auto& r : records) {
    out << horizon_label(r.horizon, freq) << ',' << r.n_assets << ',' << r.portfolio_id << ',' << r.origin << ','
        << fixed(r.realized, 8) << ',' << fixed(r.forecast_vecm_raw, 8) << ',' << fixed(r.forecast_vecm, 8) << ','
        << fixed(r.forecast_classical, 8) << ',' << fixed(r.trailing_average, 8) << ',' << fixed(r.mape_vecm, 6)
        << ',' << fixed(r.mape_classical, 6) << ',' << (r.guardrail_hit ? 1 : 0) << ',' << (r.unstable ? 1 : 0)
        << ',' << r.vecm_lag << '\n';
  }
  return out.str();
}

std::string boxplot_json(std::span<const bench::BoxGroup> groups, Frequency freq) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& g : groups) {
    j.push_back({{"method", g.method},
                 {"N", g.n_assets},
                 {"horizon", horizon_label(g.horizon, freq)},
                 {"n", g.stats.n},
                 {"median", g.stats.median},
                 {"q1", g.stats.q1},
                 {"q3", g.stats.q3},
                 {"whisker_low", g.stats.whisker_low},
                 {"whisker_high", g.stats.whisker_high},
                 {"outliers", g.stats.outliers}});
  }
  return j.dump(2) + "\n";
}

std::string ratio_series_csv(const RatioSeries& s) {
  std::ostringstream out;
  out << "timestamp,ratio\n";
  char buf[64];
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", s.ratios[i]);
    out << ingest::format_iso8601(s.times[i]) << ',' << buf << '\n';
  }
  return out.str();
}

std::string ratio_metadata_json(const RatioSeries& s, const std::string& generated_at) {
  nlohmann::json j;
  j["asset_id"] = s.asset_id;
  j["benchmark_id"] = s.benchmark_id;
  j["kind"] = s.kind == RatioKind::Hvr ? "HVR" : "DVR";
  j["frequency"] = to_string(s.frequency);
  j["window"] = s.window;
  j["points"] = s.size();
  j["excluded"] = s.excluded;
  j["generated_at"] = generated_at;
  return j.dump(2) + "\n";
}

std::string distribution_json(std::span<const std::pair<std::string, vol::DistDiagnostics>> by_horizon) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& [label, d] : by_horizon) {
    nlohmann::json qq = nlohmann::json::array();
    for (const auto& p : d.qq_points) qq.push_back({p.theoretical, p.sample});
    j.push_back({{"horizon", label},
                 {"n", d.n},
                 {"log_mean", d.sample_mean},
                 {"log_std", d.sample_std},
                 {"skewness", number_or_null(d.skewness)},
                 {"excess_kurtosis", number_or_null(d.excess_kurtosis)},
                 {"t_location", d.fitted_t_location},
                 {"t_scale", d.fitted_t_scale},
                 {"t_dof", d.fitted_t_dof},
                 {"qq", qq}});
  }
  return j.dump(2) + "\n";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

}  // namespace volrisk::report
