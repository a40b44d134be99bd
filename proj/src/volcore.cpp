#include "volrisk/volcore.hpp"

#include "volrisk/numeric.hpp"
#include "volrisk/optim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

namespace volrisk::vol {
namespace {

double logistic(double u) { return 1.0 / (1.0 + std::exp(-u)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

GarchModel garch_from_raw(const std::vector<double>& x) {
  GarchModel m;
  const double pers = kGarchMaxPersistence * logistic(x[1]);
  m.omega = std::exp(x[0]);
  m.alpha = pers * logistic(x[2]);
  m.beta = pers - m.alpha;
  return m;
}

std::vector<double> garch_to_raw(double omega, double alpha, double beta) {
  const double pers = (alpha + beta) / kGarchMaxPersistence;
  return {std::log(omega), logit(pers), logit(alpha / (alpha + beta))};
}

}  // namespace

VolSeries rolling_vol(const ReturnSeries& r, int k) {
  if (k < 2) throw std::invalid_argument("rolling_vol window must be >= 2 (got " + std::to_string(k) + ")");
  if (r.size() < static_cast<std::size_t>(k)) {
    throw std::invalid_argument("rolling_vol: series '" + r.asset_id + "' shorter than window " + std::to_string(k));
  }
  VolSeries out;
  out.asset_id = r.asset_id;
  out.frequency = r.frequency;
  out.window = k;
  const std::size_t n = r.size() - static_cast<std::size_t>(k) + 1;
  out.times.reserve(n);
  out.sigma.reserve(n);
  const std::span<const double> all(r.returns);
  // Two-pass per window: exact for constant windows and free of cancellation drift.
  for (std::size_t end = static_cast<std::size_t>(k); end <= r.size(); ++end) {
    const auto window = all.subspan(end - static_cast<std::size_t>(k), static_cast<std::size_t>(k));
    const double m = numeric::mean(window);
    double ss = 0.0;
    for (double v : window) ss += (v - m) * (v - m);
    out.times.push_back(r.times[end - 1]);
    out.sigma.push_back(std::sqrt(ss / static_cast<double>(k - 1)));
  }
  return out;
}

AlignedPair align_pair(const VolSeries& asset, const VolSeries& market) {
  AlignedPair out;
  std::size_t i = 0, j = 0;
  while (i < asset.size() && j < market.size()) {
    if (asset.times[i] < market.times[j]) {
      ++i;
    } else if (market.times[j] < asset.times[i]) {
      ++j;
    } else {
      out.times.push_back(asset.times[i]);
      out.asset.push_back(asset.sigma[i]);
      out.market.push_back(market.sigma[j]);
      ++i;
      ++j;
    }
  }
  return out;
}

RatioSeries hvr(const VolSeries& asset, const VolSeries& market) {
  if (asset.window != market.window) {
    throw std::invalid_argument("hvr: window mismatch (" + std::to_string(asset.window) + " vs " +
                                std::to_string(market.window) + ")");
  }
  if (asset.frequency != market.frequency) throw std::invalid_argument("hvr: frequency mismatch");
  const AlignedPair pair = align_pair(asset, market);
  if (pair.times.empty()) throw std::invalid_argument("hvr: '" + asset.asset_id + "' and '" + market.asset_id + "' do not overlap");

  RatioSeries out;
  out.asset_id = asset.asset_id;
  out.benchmark_id = market.asset_id;
  out.kind = RatioKind::Hvr;
  out.frequency = asset.frequency;
  out.window = asset.window;
  for (std::size_t t = 0; t < pair.times.size(); ++t) {
    // A zero asset vol would give ratio 0, which is outside the ratio domain too.
    if (pair.market[t] <= 0.0 || pair.asset[t] <= 0.0) {
      ++out.excluded;
      continue;
    }
    out.times.push_back(pair.times[t]);
    out.ratios.push_back(pair.asset[t] / pair.market[t]);
  }
  return out;
}

double mean_ratio(const RatioSeries& ratios) { return numeric::mean(ratios.ratios); }

std::vector<double> garch_filter(const GarchModel& m, std::span<const double> returns) {
  std::vector<double> s2(returns.size() + 1);
  s2[0] = numeric::sample_variance(returns);
  for (std::size_t t = 0; t < returns.size(); ++t) {
    s2[t + 1] = m.omega + m.alpha * returns[t] * returns[t] + m.beta * s2[t];
  }
  return s2;
}

double garch_log_likelihood(const GarchModel& m, std::span<const double> returns) {
  const auto s2 = garch_filter(m, returns);
  double ll = 0.0;
  for (std::size_t t = 0; t < returns.size(); ++t) {
    ll += std::log(s2[t]) + returns[t] * returns[t] / s2[t];
  }
  return -0.5 * (static_cast<double>(returns.size()) * std::log(2.0 * std::numbers::pi) + ll);
}

GarchFit fit_garch11(std::span<const double> returns) {
  if (returns.size() < kGarchMinObservations) {
    throw std::invalid_argument("fit_garch11 needs at least " + std::to_string(kGarchMinObservations) +
                                " returns (got " + std::to_string(returns.size()) + ")");
  }
  const double var = numeric::sample_variance(returns);
  if (!(var > 0.0)) throw std::invalid_argument("fit_garch11: zero-variance return series");
  const double n = static_cast<double>(returns.size());

  const optim::Objective objective = [&](const std::vector<double>& x) {
    return -garch_log_likelihood(garch_from_raw(x), returns) / n;
  };

  // Variance-targeted starts: omega = var * (1 - alpha - beta).
  constexpr std::array<std::array<double, 2>, 4> starts{{{0.05, 0.90}, {0.10, 0.80}, {0.05, 0.50}, {0.02, 0.10}}};
  optim::Result best;
  best.value = std::numeric_limits<double>::infinity();
  for (const auto& [a, b] : starts) {
    auto res = optim::minimize_bfgs(objective, garch_to_raw(var * (1.0 - a - b), a, b));
    if (res.value < best.value) best = std::move(res);
  }
  if (!best.converged || !std::isfinite(best.value)) {
    std::ostringstream msg;
    msg << "GARCH(1,1) optimiser did not converge (final gradient norm " << best.gradient_norm << ")";
    throw NumericalError(msg.str());
  }

  GarchFit fit;
  fit.model = garch_from_raw(best.x);
  fit.model.log_likelihood = -best.value * n;
  fit.iterations = best.iterations;
  fit.gradient_norm = best.gradient_norm;
  const auto s2 = garch_filter(fit.model, returns);
  fit.state.last_return = returns.back();
  fit.state.last_variance = s2[s2.size() - 2];
  return fit;
}

GarchFit fit_garch11(const ReturnSeries& returns) { return fit_garch11(std::span<const double>(returns.returns)); }

double one_step_variance(const GarchModel& m, const GarchState& s) {
  return m.omega + m.alpha * s.last_return * s.last_return + m.beta * s.last_variance;
}

std::vector<double> forecast_variance(const GarchModel& m, const GarchState& s, int h) {
  if (h < 1) throw std::invalid_argument("forecast_variance: horizon must be >= 1");
  std::vector<double> out(static_cast<std::size_t>(h));
  out[0] = one_step_variance(m, s);
  for (std::size_t j = 1; j < out.size(); ++j) out[j] = m.omega + m.persistence() * out[j - 1];
  return out;
}

double dvr(const GarchModel& asset, const GarchState& asset_state, const GarchModel& market,
           const GarchState& market_state) {
  const double market_var = one_step_variance(market, market_state);
  if (!(market_var > 0.0)) throw std::invalid_argument("dvr: market one-step variance is not positive");
  return std::sqrt(one_step_variance(asset, asset_state) / market_var);
}

double dvr_from_hvr_forecast(const RatioSeries& hvr_series, arima::ArimaOrder order, int steps) {
  const auto model = arima::fit_arima(hvr_series.ratios, order, order.d == 0);
  const auto fc = arima::forecast(model, hvr_series.ratios, steps);
  const double value = fc.mean.back();
  if (!(value > 0.0)) throw NumericalError("ARIMA forecast of HVR is not positive");
  return value;
}

DistDiagnostics hvr_distribution(std::span<const double> mean_hvrs) {
  if (mean_hvrs.size() < 8) {
    throw std::invalid_argument("hvr_distribution needs at least 8 values (got " + std::to_string(mean_hvrs.size()) + ")");
  }
  std::vector<double> logs;
  logs.reserve(mean_hvrs.size());
  for (double v : mean_hvrs) {
    if (!(v > 0.0)) throw std::invalid_argument("hvr_distribution: values must be positive");
    logs.push_back(std::log(v));
  }
  DistDiagnostics d;
  d.n = logs.size();
  const double n = static_cast<double>(logs.size());
  d.sample_mean = numeric::mean(logs);
  d.sample_std = numeric::sample_std(logs);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : logs) {
    const double c = v - d.sample_mean;
    m2 += c * c;
    m3 += c * c * c;
    m4 += c * c * c * c;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  d.skewness = m3 / std::pow(m2, 1.5);
  d.excess_kurtosis = m4 / (m2 * m2) - 3.0;

  std::vector<double> sorted = logs;
  std::sort(sorted.begin(), sorted.end());
  d.qq_points.reserve(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double p = (static_cast<double>(i) + 0.5) / n;
    d.qq_points.push_back({numeric::normal_quantile(p), (sorted[i] - d.sample_mean) / d.sample_std});
  }

  auto dof_of = [](double u) { return 0.5 + (kMaxTDof - 0.5) * logistic(u); };
  const optim::Objective nll = [&](const std::vector<double>& x) {
    const double scale = std::exp(x[1]);
    const double dof = dof_of(x[2]);
    double ll = 0.0;
    for (double v : logs) ll += numeric::student_t_log_pdf(v, x[0], scale, dof);
    return -ll / n;
  };
  const auto res = optim::minimize_bfgs(
      nll, {d.sample_mean, std::log(d.sample_std), logit((10.0 - 0.5) / (kMaxTDof - 0.5))});
  d.fitted_t_location = res.x[0];
  d.fitted_t_scale = std::exp(res.x[1]);
  d.fitted_t_dof = dof_of(res.x[2]);
  return d;
}

}  // namespace volrisk::vol
