#include "volrisk/portfolio.hpp"

#include "volrisk/numeric.hpp"

#include <json.hpp>

#include <cmath>
#include <numeric>

namespace volrisk::portfolio {

void PortfolioSpec::validate() const {
  if (weights.size() < 2) throw std::invalid_argument("portfolio needs at least 2 assets");
  if (asset_ids.size() != weights.size()) throw std::invalid_argument("portfolio: asset ids and weights differ in length");
  for (double w : weights) {
    if (!(w > 0.0 && w < 1.0)) throw std::invalid_argument("portfolio weights must lie in (0, 1)");
  }
}

Eigen::VectorXd PortfolioSpec::weight_vector() const {
  return Eigen::Map<const Eigen::VectorXd>(weights.data(), static_cast<Eigen::Index>(weights.size()));
}

PortfolioSpec PortfolioSpec::normalized() const {
  PortfolioSpec out = *this;
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  for (double& w : out.weights) w /= total;
  return out;
}

void CorrelationMatrix::validate() const {
  if (values.rows() != values.cols() || values.rows() == 0) throw std::invalid_argument("correlation matrix must be square");
  if (!values.isApprox(values.transpose(), 1e-12)) throw std::invalid_argument("correlation matrix is not symmetric");
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    if (std::abs(values(i, i) - 1.0) > 1e-10) throw std::invalid_argument("correlation matrix diagonal is not 1");
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(values, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-8) throw std::invalid_argument("correlation matrix is not positive semidefinite");
}

CorrelationMatrix sample_correlation(const Eigen::MatrixXd& returns) {
  CorrelationMatrix c;
  c.values = numeric::covariance_to_correlation(numeric::sample_covariance(returns));
  c.window = static_cast<std::size_t>(returns.rows());
  return c;
}

double classical_vol(const Eigen::MatrixXd& returns, const PortfolioSpec& spec, int window) {
  if (returns.cols() != static_cast<Eigen::Index>(spec.size())) {
    throw std::invalid_argument("classical_vol: return panel does not match the portfolio assets");
  }
  if (window < 2 || window > returns.rows()) {
    throw std::invalid_argument("classical_vol: window " + std::to_string(window) + " exceeds the " +
                                std::to_string(returns.rows()) + " available rows");
  }
  const Eigen::MatrixXd cov = numeric::sample_covariance(returns.bottomRows(window));
  const Eigen::VectorXd w = spec.weight_vector();
  return std::sqrt(std::max(0.0, w.dot(cov * w)));
}

double portfolio_variance(const Eigen::VectorXd& weights, const Eigen::VectorXd& vols, const Eigen::MatrixXd& corr) {
  if (weights.size() != vols.size() || corr.rows() != vols.size()) {
    throw std::invalid_argument("portfolio_variance: dimension mismatch");
  }
  const Eigen::VectorXd scaled = weights.cwiseProduct(vols);
  return scaled.dot(corr * scaled);
}

std::string to_string(Method m) {
  switch (m) {
    case Method::Vecm: return "VECM";
    case Method::Classical: return "Classical";
    case Method::HvrRecon: return "HVR-recon";
    case Method::DvrRecon: return "DVR-recon";
  }
  return "unknown";
}

GuardrailOutcome guardrail(double forecast, double trailing_average, double multiplier) {
  if (!(trailing_average > 0.0) || !std::isfinite(trailing_average)) {
    throw std::invalid_argument("guardrail: trailing average must be positive and finite");
  }
  if (!std::isfinite(forecast) || forecast > multiplier * trailing_average) return {trailing_average, true};
  return {forecast, false};
}

double trailing_average_vol(const Eigen::MatrixXd& recent_vols, const Eigen::VectorXd& weights,
                            const Eigen::MatrixXd& corr) {
  if (recent_vols.rows() == 0) throw std::invalid_argument("trailing_average_vol: no periods");
  double acc = 0.0;
  for (Eigen::Index t = 0; t < recent_vols.rows(); ++t) {
    acc += std::sqrt(std::max(0.0, portfolio_variance(weights, recent_vols.row(t).transpose(), corr)));
  }
  return acc / static_cast<double>(recent_vols.rows());
}

ForecastResult vecm_portfolio_forecast(const vecm::VolForecast& forecast, const Eigen::VectorXd& weights,
                                       const CorrelationMatrix& corr, double trailing_average, double multiplier) {
  ForecastResult out;
  out.method = Method::Vecm;
  out.unstable = forecast.unstable;
  double total = 0.0;
  for (Eigen::Index j = 0; j < forecast.vols.rows(); ++j) {
    const double v = portfolio_variance(weights, forecast.vols.row(j).transpose(), corr.values);
    out.step_variances.push_back(v);
    total += v;
  }
  out.raw_vol = std::sqrt(total / static_cast<double>(forecast.vols.rows()));
  if (out.unstable) {
    out.diagnostics = "VECM forecast path overflowed";
    out.aggregate_vol = trailing_average;
    out.guardrail_triggered = true;
    out.fallback = trailing_average;
    return out;
  }
  const auto g = guardrail(out.raw_vol, trailing_average, multiplier);
  out.aggregate_vol = g.value;
  out.guardrail_triggered = g.triggered;
  if (g.triggered) {
    out.fallback = trailing_average;
    out.diagnostics = "forecast above guardrail multiple of trailing average";
  }
  return out;
}

ForecastResult vecm_portfolio_forecast(const vecm::VecmModel& model, const Eigen::MatrixXd& log_vol_history,
                                       const PortfolioSpec& spec, int h, const CorrelationMatrix& corr,
                                       double trailing_average, double multiplier) {
  spec.validate();
  if (model.n != static_cast<int>(spec.size())) throw std::invalid_argument("vecm_portfolio_forecast: model dimension mismatch");
  const auto fc = vecm::forecast_logvol(model, log_vol_history, h);
  return vecm_portfolio_forecast(fc, spec.weight_vector(), corr, trailing_average, multiplier);
}

Eigen::MatrixXd covariance_reconstruct(const Eigen::VectorXd& ratios, double market_vol, const CorrelationMatrix& corr) {
  if (corr.values.rows() != ratios.size() || corr.values.cols() != ratios.size()) {
    throw std::invalid_argument("covariance_reconstruct: ratio vector and correlation matrix differ in size");
  }
  if ((ratios.array() <= 0.0).any()) throw std::invalid_argument("covariance_reconstruct: ratios must be positive");
  const auto n = ratios.size();
  const double m2 = market_vol * market_vol;
  Eigen::MatrixXd cov(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) cov(i, j) = cov(j, i) = m2 * ratios(i) * ratios(j) * corr.values(i, j);
  }
  return cov;
}

double capm_beta(double corr_with_market, double hvr) {
  if (!(corr_with_market >= -1.0 && corr_with_market <= 1.0)) throw std::invalid_argument("capm_beta: correlation outside [-1, 1]");
  if (!(hvr > 0.0)) throw std::invalid_argument("capm_beta: HVR must be positive");
  return corr_with_market * hvr;
}

std::string to_json(const ForecastResult& r) {
  nlohmann::json j;
  j["method"] = to_string(r.method);
  j["step_variances"] = r.step_variances;
  j["raw_vol"] = r.raw_vol;
  j["aggregate_vol"] = r.aggregate_vol;
  j["guardrail_triggered"] = r.guardrail_triggered;
  j["fallback"] = r.fallback ? nlohmann::json(*r.fallback) : nlohmann::json(nullptr);
  j["unstable"] = r.unstable;
  j["diagnostics"] = r.diagnostics;
  return j.dump(2);
}

}  // namespace volrisk::portfolio
