#pragma once

#include <compare>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace volrisk::arima {

struct ArimaOrder {
  int p = 0;
  int d = 0;
  int q = 0;

  auto operator<=>(const ArimaOrder&) const = default;
};

std::string to_string(const ArimaOrder& o);

enum class FitMethod {
  CssMl,  // conditional sum of squares for starting values, then exact ML
  Ml,     // exact ML from zero starting values
  Css,    // conditional sum of squares only (used as the search approximation)
};

/// ARIMA(p,d,q) for x with (1 - sum ar_i B^i)(1-B)^d (x_t - mu) = (1 + sum ma_j B^j) e_t,
/// where mu (the intercept) applies to the d-times differenced series.
struct ArimaModel {
  ArimaOrder order;
  std::vector<double> ar;
  std::vector<double> ma;
  bool has_intercept = false;
  double intercept = 0.0;
  double sigma2 = 0.0;
  double log_likelihood = 0.0;
  double aic = 0.0;
  std::size_t n_used = 0;  // length of the differenced series
  FitMethod method = FitMethod::CssMl;

  [[nodiscard]] int parameter_count() const noexcept {
    return order.p + order.q + (has_intercept ? 1 : 0) + 1;
  }
};

/// Roots of 1 - sum ar_i z^i all lie outside the unit circle.
bool is_stationary(std::span<const double> ar);
/// Roots of 1 + sum ma_j z^j all lie outside the unit circle.
bool is_invertible(std::span<const double> ma);
/// Reflects MA roots inside the unit circle to their reciprocals.
std::vector<double> invert_ma(std::span<const double> ma);

/// Exact Gaussian log-likelihood of a zero-mean ARMA series via the Kalman filter,
/// with the innovation variance concentrated out. Returns -inf for a
/// non-stationary AR part.
double arma_exact_log_likelihood(std::span<const double> y, std::span<const double> ar,
                                 std::span<const double> ma, double* sigma2_out = nullptr);

inline constexpr std::size_t kMinFitLength = 25;

/// Requires length >= 25 + p + d + q. Throws NumericalError when the optimiser
/// fails from every start or the optimum violates stationarity.
ArimaModel fit_arima(std::span<const double> x, ArimaOrder order, bool intercept,
                     FitMethod method = FitMethod::CssMl);

struct ArimaForecast {
  std::vector<double> mean;
  std::vector<double> se;
};

/// Point forecasts and standard errors for steps 1..h given the observed history
/// the model was fitted on. Forecasts of integrated models are returned in levels.
ArimaForecast forecast(const ArimaModel& m, std::span<const double> history, int h);

/// One-step-ahead in-sample fitted values in levels; NaN for the first d points.
std::vector<double> fitted_values(const ArimaModel& m, std::span<const double> history);

struct AutoOptions {
  int max_p = 5;
  int max_d = 2;
  int max_q = 5;
  double alpha = 0.05;              // KPSS level for the differencing decision
  std::optional<bool> approximation;  // default: on when the series is longer than 150
  int max_models = 94;
};

struct AutoResult {
  ArimaOrder order;
  bool intercept = false;
  ArimaModel model;
  int models_evaluated = 0;
};

/// Number of differences needed for KPSS level-stationarity at `alpha`, capped at max_d.
int ndiffs(std::span<const double> x, double alpha = 0.05, int max_d = 2);

/// Stepwise Hyndman-Khandakar search by AIC. Exact AIC ties prefer the lower p+q,
/// then the lower q.
AutoResult auto_arima(std::span<const double> x, const AutoOptions& opts = {});
ArimaOrder auto_order(std::span<const double> x, const AutoOptions& opts = {});

struct OrderCensus {
  std::string horizon;
  std::size_t n_series = 0;
  std::size_t n_failed = 0;  // series where order selection or re-estimation failed
  int modal_p = 0;
  double modal_p_pct = 0.0;
  int modal_d = 0;
  double modal_d_pct = 0.0;
  int modal_q = 0;
  double modal_q_pct = 0.0;
  ArimaOrder best;
  double coverage_pct = 0.0;
  double mean_mape = 0.0;  // in-sample, levels, zero actuals excluded
  double mean_rmse = 0.0;
  std::vector<ArimaOrder> selected;  // per series, in panel order
};

OrderCensus order_census(std::span<const std::vector<double>> panel, std::string horizon,
                         const AutoOptions& opts = {});

}  // namespace volrisk::arima
