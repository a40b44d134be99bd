#pragma once

#include "volrisk/vecm.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace volrisk::portfolio {

struct PortfolioSpec {
  std::vector<std::string> asset_ids;
  std::vector<double> weights;  // each in (0, 1), used as given

  [[nodiscard]] std::size_t size() const { return weights.size(); }
  /// Throws std::invalid_argument unless n >= 2, sizes match and every weight is in (0, 1).
  void validate() const;
  [[nodiscard]] Eigen::VectorXd weight_vector() const;
  /// Weights rescaled to sum to one.
  [[nodiscard]] PortfolioSpec normalized() const;
};

struct CorrelationMatrix {
  Eigen::MatrixXd values;
  std::size_t window = 0;  // observations it was estimated on

  /// Symmetric, unit diagonal, eigenvalues >= -1e-8; throws std::invalid_argument otherwise.
  void validate() const;
};

/// Sample correlation of the columns of `returns` (rows are time).
CorrelationMatrix sample_correlation(const Eigen::MatrixXd& returns);

/// sqrt(w' S w) with S the sample covariance of the last `window` rows of `returns`.
double classical_vol(const Eigen::MatrixXd& returns, const PortfolioSpec& spec, int window);

/// w' D R D w with D = diag(vols).
double portfolio_variance(const Eigen::VectorXd& weights, const Eigen::VectorXd& vols, const Eigen::MatrixXd& corr);

enum class Method { Vecm, Classical, HvrRecon, DvrRecon };

std::string to_string(Method m);

struct GuardrailOutcome {
  double value = 0.0;
  bool triggered = false;
};

/// Replaces a forecast above multiplier x trailing average (strictly) with the
/// trailing average. Non-finite forecasts are replaced as well.
GuardrailOutcome guardrail(double forecast, double trailing_average, double multiplier = 3.0);

/// Mean over the rows of `recent_vols` (one row per period, one column per asset)
/// of sqrt(w' D_t R D_t w).
double trailing_average_vol(const Eigen::MatrixXd& recent_vols, const Eigen::VectorXd& weights,
                            const Eigen::MatrixXd& corr);

struct ForecastResult {
  Method method = Method::Vecm;
  std::vector<double> step_variances;
  double raw_vol = 0.0;        // sqrt of the mean step variance, before the guardrail
  double aggregate_vol = 0.0;  // after the guardrail
  bool guardrail_triggered = false;
  std::optional<double> fallback;  // trailing average used when triggered
  bool unstable = false;
  std::string diagnostics;
};

/// Quadratic form per forecast step on the vols of `forecast`, then root-mean-variance.
ForecastResult vecm_portfolio_forecast(const vecm::VolForecast& forecast, const Eigen::VectorXd& weights,
                                       const CorrelationMatrix& corr, double trailing_average,
                                       double multiplier = 3.0);

/// Fits nothing: forecasts from a fitted model and its log-vol history.
ForecastResult vecm_portfolio_forecast(const vecm::VecmModel& model, const Eigen::MatrixXd& log_vol_history,
                                       const PortfolioSpec& spec, int h, const CorrelationMatrix& corr,
                                       double trailing_average, double multiplier = 3.0);

/// Sigma_ij = rho_ij ratio_i ratio_j market_vol^2.
Eigen::MatrixXd covariance_reconstruct(const Eigen::VectorXd& ratios, double market_vol, const CorrelationMatrix& corr);

/// Corr(i, m) x HVR_i.
double capm_beta(double corr_with_market, double hvr);

std::string to_json(const ForecastResult& r);

}  // namespace volrisk::portfolio
