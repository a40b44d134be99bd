#pragma once

#include "volrisk/arima.hpp"
#include "volrisk/types.hpp"

#include <span>
#include <utility>
#include <vector>

namespace volrisk::vol {

/// Sample standard deviation (divisor k-1) of the k most recent returns,
/// timestamped at the last return of each window. No annualisation.
VolSeries rolling_vol(const ReturnSeries& r, int k);

/// HVR_t = sigma_asset,t / sigma_market,t over common timestamps. Points where the
/// market vol is zero are excluded and counted in `RatioSeries::excluded`.
RatioSeries hvr(const VolSeries& asset, const VolSeries& market);

/// Values of two vol series at their common timestamps.
struct AlignedPair {
  std::vector<EpochSeconds> times;
  std::vector<double> asset;
  std::vector<double> market;
};
AlignedPair align_pair(const VolSeries& asset, const VolSeries& market);

/// Arithmetic mean of the ratios of one series.
double mean_ratio(const RatioSeries& ratios);

// --- GARCH(1,1) -----------------------------------------------------------

struct GarchModel {
  double omega = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double log_likelihood = 0.0;

  [[nodiscard]] double persistence() const noexcept { return alpha + beta; }
  [[nodiscard]] double unconditional_variance() const noexcept { return omega / (1.0 - alpha - beta); }
};

/// Filter state needed for the next-step forecast.
struct GarchState {
  double last_return = 0.0;
  double last_variance = 0.0;
};

struct GarchFit {
  GarchModel model;
  GarchState state;
  int iterations = 0;
  double gradient_norm = 0.0;
};

inline constexpr std::size_t kGarchMinObservations = 100;
inline constexpr double kGarchMaxPersistence = 0.9999;

/// Gaussian QML estimate of sigma2_t = omega + alpha r_{t-1}^2 + beta sigma2_{t-1},
/// with sigma2_0 set to the sample variance. Throws NumericalError on non-convergence.
GarchFit fit_garch11(std::span<const double> returns);
GarchFit fit_garch11(const ReturnSeries& returns);

/// Conditional variances sigma2_0..sigma2_n (n+1 values; the last is the
/// one-step-ahead forecast after the final return).
std::vector<double> garch_filter(const GarchModel& m, std::span<const double> returns);
double garch_log_likelihood(const GarchModel& m, std::span<const double> returns);

double one_step_variance(const GarchModel& m, const GarchState& s);

/// Variance forecasts for steps 1..h via the analytic recursion
/// E[sigma2_{t+j}] = omega + (alpha + beta) E[sigma2_{t+j-1}].
std::vector<double> forecast_variance(const GarchModel& m, const GarchState& s, int h);

/// sigma_asset,t+1|t / sigma_market,t+1|t from one-step GARCH recursions.
double dvr(const GarchModel& asset, const GarchState& asset_state, const GarchModel& market,
           const GarchState& market_state);

/// Alternative DVR path: forecast the HVR series itself with an ARIMA model and use
/// the `steps`-ahead point forecast.
double dvr_from_hvr_forecast(const RatioSeries& hvr_series, arima::ArimaOrder order, int steps = 1);

// --- HVR distribution -----------------------------------------------------

struct QqPoint {
  double theoretical = 0.0;
  double sample = 0.0;
};

struct DistDiagnostics {
  std::size_t n = 0;
  double sample_mean = 0.0;  // of log-values
  double sample_std = 0.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  std::vector<QqPoint> qq_points;  // standardised logs vs N(0,1) quantiles
  double fitted_t_location = 0.0;
  double fitted_t_scale = 0.0;
  double fitted_t_dof = 0.0;
};

inline constexpr double kMaxTDof = 1000.0;

/// Diagnostics of log(values): moments, normal QQ points and an ML location-scale
/// Student-t fit (dof capped at kMaxTDof). Needs at least 8 positive values.
DistDiagnostics hvr_distribution(std::span<const double> mean_hvrs);

}  // namespace volrisk::vol
