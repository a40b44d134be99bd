#pragma once

#include "volrisk/types.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace volrisk::stattests {

/// Deterministic terms of the ADF test regression.
enum class Deterministic { None, Constant };

enum class AdfDecision { Stationary, UnitRoot, Dropped };

std::string to_string(AdfDecision d);

inline constexpr std::size_t kMinTestLength = 25;

struct AdfOptions {
  Deterministic regression = Deterministic::Constant;
  std::optional<int> max_lags;  // default floor(12 (n/100)^(1/4))
  bool autolag = true;          // AIC over 0..max_lags; otherwise exactly max_lags
  double alpha = 0.05;          // one of 0.01, 0.05, 0.10
};

struct AdfResult {
  double statistic = 0.0;
  int lags_used = 0;
  int n_obs = 0;  // observations in the final test regression
  AdfDecision decision = AdfDecision::Dropped;
  double alpha_level = 0.05;
  double critical_value = 0.0;
  double p_value = 1.0;
};

/// t-ratio on gamma in dx_t = [c] + gamma x_{t-1} + sum_j phi_j dx_{t-j} + e_t.
/// Series shorter than 25 yield AdfDecision::Dropped instead of throwing.
AdfResult adf_test(std::span<const double> x, const AdfOptions& opts = {});

/// Same regression, with critical values for residual-based cointegration tests
/// over `n_vars` variables (n_vars = 1 is the plain unit-root case).
AdfResult adf_test_with_table(std::span<const double> x, const AdfOptions& opts, Deterministic table, int n_vars);

/// MacKinnon (2010) response surface b0 + b1/T + b2/T^2 + b3/T^3.
double mackinnon_critical_value(Deterministic regression, int n_vars, double alpha, int nobs);
/// MacKinnon (1994) asymptotic p-value approximation.
double mackinnon_p_value(double statistic, Deterministic regression, int n_vars);

enum class CointDecision { Cointegrated, NotCointegrated, Dropped };

struct CointResult {
  double alpha_hat = 0.0;  // intercept of asset vol on market vol
  double beta_hat = 0.0;
  AdfResult residual_adf;
  CointDecision decision = CointDecision::Dropped;
};

/// Engle-Granger two-step: OLS y = a + b x + e, then ADF (no deterministic terms)
/// on e against two-variable critical values.
CointResult engle_granger(std::span<const double> y, std::span<const double> x, double alpha = 0.05);
CointResult engle_granger(const VolSeries& asset, const VolSeries& market, double alpha = 0.05);

struct KpssResult {
  double statistic = 0.0;
  int lags = 0;
  double p_value = 0.0;  // interpolated, clamped to [0.01, 0.10]
  bool reject = false;   // level stationarity rejected at alpha
};

/// KPSS level-stationarity test with a Bartlett long-run variance,
/// default bandwidth floor(3 sqrt(n) / 13).
KpssResult kpss_test(std::span<const double> x, std::optional<int> lags = std::nullopt, double alpha = 0.05);

struct BatchSummary {
  std::string horizon;
  double pct_stationary = 0.0;
  double pct_cointegrated = 0.0;
  std::size_t n_tested = 0;
  std::size_t n_dropped = 0;
  std::size_t n_stationary = 0;
  std::size_t n_cointegrated = 0;
};

struct VolPair {
  VolSeries asset;
  VolSeries market;
};

/// ADF (constant) on each HVR and Engle-Granger on each vol pair. Percentages are
/// taken over series that were long enough to test.
BatchSummary batch_classify(std::span<const RatioSeries> hvrs, std::span<const VolPair> pairs,
                            std::string horizon, double alpha = 0.05);

}  // namespace volrisk::stattests
