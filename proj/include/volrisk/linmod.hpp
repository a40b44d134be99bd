#pragma once

#include "volrisk/types.hpp"

#include <span>
#include <string>
#include <vector>

namespace volrisk::linmod {

/// Fit of y = [a] + b x + e. Coefficient vectors hold the intercept first when present.
struct OlsFit {
  bool has_intercept = false;
  std::vector<double> coefficients;
  std::vector<double> stderrs;
  std::vector<double> t_stats;
  std::vector<double> p_values;
  double r2 = 0.0;
  double adj_r2 = 0.0;
  double sigma2 = 0.0;  // SSR / (n - regressors)
  double log_likelihood = 0.0;
  double aic = 0.0;
  double bic = 0.0;
  std::vector<double> residuals;

  [[nodiscard]] double slope() const { return coefficients.back(); }
  [[nodiscard]] double slope_p_value() const { return p_values.back(); }
  [[nodiscard]] double intercept() const { return has_intercept ? coefficients.front() : 0.0; }
  /// Regressors plus the error variance.
  [[nodiscard]] int parameter_count() const { return static_cast<int>(coefficients.size()) + 1; }
};

/// R^2 is centred with an intercept and uncentred without one. The log-likelihood
/// uses the ML variance SSR/n.
OlsFit ols(std::span<const double> y, std::span<const double> x, bool intercept);

struct MapeResult {
  double value = 0.0;  // percent
  std::size_t included = 0;
  std::size_t excluded = 0;  // points with a zero actual
};

/// 100 * mean |a - p| / |a| over points with a nonzero actual.
/// Throws DataError when every actual is zero.
MapeResult mape(std::span<const double> actual, std::span<const double> predicted);
double rmse(std::span<const double> actual, std::span<const double> predicted);

enum class NaiveModel { M1, M2 };  // M1: no intercept, M2: with intercept

std::string to_string(NaiveModel m);

struct ModelComparison {
  NaiveModel model = NaiveModel::M1;
  std::string horizon;
  std::size_t n_assets = 0;
  double pct_beta_significant = 0.0;
  double mean_adj_r2 = 0.0;  // percent
  double mean_mape = 0.0;    // percent; NaN when no asset had a usable MAPE
  std::size_t mape_excluded_points = 0;
  double mean_aic = 0.0;
  double mean_bic = 0.0;
};

/// Regresses each asset's vol on the market vol over their common timestamps.
ModelComparison naive_model_battery(std::span<const VolSeries> assets, const VolSeries& market,
                                    std::string horizon, NaiveModel model, double alpha = 0.05);

}  // namespace volrisk::linmod
