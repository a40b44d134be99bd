#pragma once

#include "volrisk/types.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace volrisk::bench {

/// Aligned log-returns, rows are time and columns assets.
struct ReturnPanel {
  std::vector<std::string> asset_ids;
  Frequency frequency = Frequency::Day;
  std::vector<EpochSeconds> times;
  Eigen::MatrixXd returns;
};

/// Aligns the series on common timestamps.
ReturnPanel make_panel(std::span<const ReturnSeries> series);

enum class EvaluationMode { Fixed, Rolling };

struct BenchConfig {
  std::vector<int> sizes{10, 30, 50, 80};
  std::vector<int> horizons{5, 10, 30, 90};
  int n_portfolios = 100;
  int estimation_window = 1000;
  std::uint64_t seed = 42;
  double guardrail_multiplier = 3.0;
  std::optional<int> rank;        // N - 1 when absent
  std::optional<int> vecm_lag;    // AIC selection when absent
  std::optional<int> vol_window;  // rolling-vol window; the horizon when absent
  EvaluationMode mode = EvaluationMode::Fixed;
  bool normalize_weights = false;

  /// Throws std::invalid_argument on an inconsistent configuration.
  void validate() const;
};

struct BenchRecord {
  int portfolio_id = 0;
  int n_assets = 0;
  int horizon = 0;
  std::vector<int> assets;  // column indices into the panel
  std::vector<double> weights;
  std::size_t origin = 0;   // first out-of-sample row
  double realized = 0.0;
  double forecast_vecm_raw = 0.0;
  double forecast_vecm = 0.0;
  double forecast_classical = 0.0;
  double trailing_average = 0.0;
  double mape_vecm = 0.0;       // absolute percentage error of the single h-window forecast
  double mape_classical = 0.0;
  bool guardrail_hit = false;
  bool unstable = false;        // VECM fit failed or its path overflowed
  int vecm_lag = 0;
  bool valid = true;            // false when the realized vol is zero
  std::string note;
};

struct BenchRow {
  int horizon = 0;
  int n_assets = 0;
  std::size_t n_portfolios = 0;
  // Means rounded to hundredths and stored as integer hundredths, so delta = C - V exactly.
  std::int64_t v_hundredths = 0;
  std::int64_t c_hundredths = 0;
  std::int64_t wins = 0;
  std::size_t guardrail_hits = 0;

  [[nodiscard]] double v() const { return static_cast<double>(v_hundredths) / 100.0; }
  [[nodiscard]] double c() const { return static_cast<double>(c_hundredths) / 100.0; }
  [[nodiscard]] std::int64_t delta_hundredths() const { return c_hundredths - v_hundredths; }
  [[nodiscard]] double delta() const { return static_cast<double>(delta_hundredths()) / 100.0; }
  [[nodiscard]] double win_pct() const {
    return n_portfolios ? 100.0 * static_cast<double>(wins) / static_cast<double>(n_portfolios) : 0.0;
  }
};

struct BenchResult {
  std::vector<BenchRecord> records;
  std::vector<BenchRow> table;  // horizon-major, sizes in configuration order
};

BenchResult run_benchmark(const ReturnPanel& panel, const BenchConfig& cfg);

/// One row per (horizon, N) present in `records`, in first-seen order. A VECM win
/// requires a strictly lower error after rounding both to 1e-6.
std::vector<BenchRow> summarize(std::span<const BenchRecord> records);

struct CensusRow {
  int horizon = 0;
  int n_assets = 0;
  std::size_t hits = 0;
};
std::vector<CensusRow> guardrail_census(std::span<const BenchRecord> records);

struct BoxStats {
  std::size_t n = 0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double whisker_low = 0.0;   // smallest value >= q1 - 1.5 IQR
  double whisker_high = 0.0;  // largest value <= q3 + 1.5 IQR
  std::vector<double> outliers;
};

/// Type-7 quartiles with 1.5 x IQR whiskers. Throws std::invalid_argument on empty input.
BoxStats box_stats(std::span<const double> values);

struct BoxGroup {
  std::string method;  // "VECM" or "Classical"
  int n_assets = 0;
  int horizon = 0;
  BoxStats stats;
};
std::vector<BoxGroup> ape_boxplot_data(std::span<const BenchRecord> records);

// --- synthetic data ----------------------------------------------------------

/// Multiplies the vols of the first `n_assets` assets by `scale` over [start, start + length).
struct QuietRegime {
  std::size_t start = 0;
  std::size_t length = 0;
  double scale = 1e-3;
  int n_assets = 1;
};

/// Log-vols: assets 0..rank-1 error-correct toward the last asset,
///   dh_i = -loading (h_i - h_anchor - mu_i) + e_i,
/// the remaining assets follow random walks. Returns are vol-scaled equicorrelated normals.
struct SyntheticSpec {
  int n = 10;
  std::optional<int> rank;  // n - 1 when absent
  int length = 2000;
  double loading = 0.1;
  double logvol_noise = 0.03;
  double base_vol = 0.01;
  double spread = 0.3;       // mu_i drawn from U(-spread, spread)
  double correlation = 0.3;
  std::uint64_t seed = 1;
  int burn_in = 200;
  Frequency frequency = Frequency::Day;
  std::optional<QuietRegime> quiet;

  void validate() const;
};

struct SyntheticPanel {
  ReturnPanel panel;
  Eigen::MatrixXd log_vols;   // true, before any quiet regime
  Eigen::MatrixXd true_vols;  // as used for the returns
  Eigen::MatrixXd beta;       // n x rank
  Eigen::VectorXd mu;         // rank
};

SyntheticPanel generate_synthetic(const SyntheticSpec& spec);

/// Equal-weighted index of the panel's returns.
ReturnSeries synthetic_index(const ReturnPanel& panel, const std::string& id = "INDEX");

/// Prices 100 exp(cumulative return), starting one period before the first return.
std::vector<PriceSeries> to_prices(const ReturnPanel& panel);

}  // namespace volrisk::bench
