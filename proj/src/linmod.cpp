#include "volrisk/linmod.hpp"

#include "volrisk/numeric.hpp"
#include "volrisk/volcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace volrisk::linmod {

OlsFit ols(std::span<const double> y, std::span<const double> x, bool intercept) {
  if (y.size() != x.size()) {
    throw std::invalid_argument("ols: length mismatch (" + std::to_string(y.size()) + " vs " +
                                std::to_string(x.size()) + ")");
  }
  const std::size_t n = y.size();
  if (n < 3) throw std::invalid_argument("ols needs at least 3 observations");
  const double nd = static_cast<double>(n);
  const int k = intercept ? 2 : 1;

  OlsFit fit;
  fit.has_intercept = intercept;
  double a = 0.0, b = 0.0;
  double var_a = 0.0, var_b = 0.0;  // multiples of sigma^2
  if (intercept) {
    const double xm = numeric::mean(x), ym = numeric::mean(y);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sxx += (x[i] - xm) * (x[i] - xm);
      sxy += (x[i] - xm) * (y[i] - ym);
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("ols: regressor is constant");
    b = sxy / sxx;
    a = ym - b * xm;
    var_b = 1.0 / sxx;
    var_a = 1.0 / nd + xm * xm / sxx;
  } else {
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sxx += x[i] * x[i];
      sxy += x[i] * y[i];
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("ols: regressor is identically zero");
    b = sxy / sxx;
    var_b = 1.0 / sxx;
  }

  fit.residuals.resize(n);
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    fit.residuals[i] = y[i] - a - b * x[i];
    ssr += fit.residuals[i] * fit.residuals[i];
  }
  double tss = 0.0;
  const double centre = intercept ? numeric::mean(y) : 0.0;
  for (double v : y) tss += (v - centre) * (v - centre);

  const double df = nd - k;
  fit.sigma2 = ssr / df;
  fit.r2 = tss > 0.0 ? 1.0 - ssr / tss : 1.0;
  fit.adj_r2 = 1.0 - (nd - (intercept ? 1.0 : 0.0)) / df * (1.0 - fit.r2);

  if (intercept) fit.coefficients.push_back(a);
  fit.coefficients.push_back(b);
  const std::vector<double> scale = intercept ? std::vector<double>{var_a, var_b} : std::vector<double>{var_b};
  for (std::size_t j = 0; j < fit.coefficients.size(); ++j) {
    const double se = std::sqrt(fit.sigma2 * scale[j]);
    fit.stderrs.push_back(se);
    double t = 0.0;
    if (se > 0.0) {
      t = fit.coefficients[j] / se;
    } else {
      t = fit.coefficients[j] == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), fit.coefficients[j]);
    }
    fit.t_stats.push_back(t);
    fit.p_values.push_back(std::isfinite(t) ? numeric::student_t_two_sided_p(t, df) : 0.0);
  }

  // An exact fit has an unbounded likelihood; SSR is floored so AIC/BIC stay finite.
  const double ml_var = std::max(ssr / nd, std::numeric_limits<double>::min());
  fit.log_likelihood = -0.5 * nd * (std::log(2.0 * std::numbers::pi * ml_var) + 1.0);
  const double params = static_cast<double>(fit.parameter_count());
  fit.aic = 2.0 * params - 2.0 * fit.log_likelihood;
  fit.bic = params * std::log(nd) - 2.0 * fit.log_likelihood;
  return fit;
}

MapeResult mape(std::span<const double> actual, std::span<const double> predicted) {
  if (actual.size() != predicted.size()) throw std::invalid_argument("mape: length mismatch");
  MapeResult out;
  double acc = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (actual[i] == 0.0) {
      ++out.excluded;
      continue;
    }
    acc += std::abs(actual[i] - predicted[i]) / std::abs(actual[i]);
    ++out.included;
  }
  if (out.included == 0) throw DataError("mape: every actual value is zero or the series is empty");
  out.value = 100.0 * acc / static_cast<double>(out.included);
  return out;
}

double rmse(std::span<const double> actual, std::span<const double> predicted) {
  if (actual.size() != predicted.size()) throw std::invalid_argument("rmse: length mismatch");
  if (actual.empty()) throw std::invalid_argument("rmse: empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) acc += (actual[i] - predicted[i]) * (actual[i] - predicted[i]);
  return std::sqrt(acc / static_cast<double>(actual.size()));
}

std::string to_string(NaiveModel m) { return m == NaiveModel::M1 ? "M1" : "M2"; }

ModelComparison naive_model_battery(std::span<const VolSeries> assets, const VolSeries& market, std::string horizon,
                                    NaiveModel model, double alpha) {
  if (assets.empty()) throw std::invalid_argument("naive_model_battery: empty panel");
  ModelComparison out;
  out.model = model;
  out.horizon = std::move(horizon);
  const bool intercept = model == NaiveModel::M2;
  std::size_t significant = 0, with_mape = 0;
  double adj = 0.0, mape_sum = 0.0, aic = 0.0, bic = 0.0;
  for (const auto& asset : assets) {
    const auto pair = vol::align_pair(asset, market);
    if (pair.times.size() < 3) {
      throw DataError("naive_model_battery: '" + asset.asset_id + "' shares fewer than 3 points with the market");
    }
    const auto fit = ols(pair.asset, pair.market, intercept);
    ++out.n_assets;
    if (fit.slope_p_value() < alpha) ++significant;
    adj += fit.adj_r2;
    aic += fit.aic;
    bic += fit.bic;
    std::vector<double> pred(pair.asset.size());
    for (std::size_t i = 0; i < pred.size(); ++i) pred[i] = pair.asset[i] - fit.residuals[i];
    const bool all_zero = std::all_of(pair.asset.begin(), pair.asset.end(), [](double v) { return v == 0.0; });
    if (!all_zero) {
      const auto m = mape(pair.asset, pred);
      mape_sum += m.value;
      out.mape_excluded_points += m.excluded;
      ++with_mape;
    }
  }
  const double n = static_cast<double>(out.n_assets);
  out.pct_beta_significant = 100.0 * static_cast<double>(significant) / n;
  out.mean_adj_r2 = 100.0 * adj / n;
  out.mean_mape = with_mape > 0 ? mape_sum / static_cast<double>(with_mape) : std::numeric_limits<double>::quiet_NaN();
  out.mean_aic = aic / n;
  out.mean_bic = bic / n;
  return out;
}

}  // namespace volrisk::linmod
