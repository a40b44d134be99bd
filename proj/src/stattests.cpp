#include "volrisk/stattests.hpp"

#include "volrisk/numeric.hpp"
#include "volrisk/volcore.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace volrisk::stattests {
namespace {

// MacKinnon (2010), Table 2: rows are the 1%, 5%, 10% levels; columns b0..b3.
using Surface = std::array<std::array<double, 4>, 3>;
constexpr Surface kTauNone1{{{-2.56574, -2.2358, -3.627, 0.0},
                             {-1.94100, -0.2686, -3.365, 31.223},
                             {-1.61682, 0.2656, -2.714, 25.364}}};
constexpr Surface kTauConst1{{{-3.43035, -6.5393, -16.786, -79.433},
                              {-2.86154, -2.8903, -4.234, -40.040},
                              {-2.56677, -1.5384, -2.809, 0.0}}};
constexpr Surface kTauConst2{{{-3.89644, -10.9519, -33.527, 0.0},
                              {-3.33613, -6.1101, -6.823, 0.0},
                              {-3.04445, -4.2412, -2.720, 0.0}}};

// MacKinnon (1994) p-value polynomials, already multiplied by their scalings.
struct PValueSurface {
  double tau_max, tau_min, tau_star;
  std::array<double, 3> small;
  std::array<double, 4> large;
};
constexpr PValueSurface kPNone1{std::numeric_limits<double>::infinity(), -19.04, -1.04,
                                {0.6344, 1.2378, 3.2496e-2},
                                {0.4797, 9.3557e-1, -0.6999e-1, 3.3066e-2}};
constexpr PValueSurface kPNone2{1.51, -19.62, -1.53,
                                {1.9129, 1.3857, 3.5322e-2},
                                {1.5578, 8.558e-1, -2.083e-1, -3.3549e-2}};
constexpr PValueSurface kPConst1{2.74, -18.83, -1.61,
                                 {2.1659, 1.4412, 3.8269e-2},
                                 {1.7339, 9.3202e-1, -1.2745e-1, -1.0368e-2}};
constexpr PValueSurface kPConst2{0.92, -18.86, -2.62,
                                 {2.92, 1.5012, 3.9796e-2},
                                 {2.1945, 6.4695e-1, -2.9198e-1, -4.2377e-2}};

int level_index(double alpha) {
  if (std::abs(alpha - 0.01) < 1e-12) return 0;
  if (std::abs(alpha - 0.05) < 1e-12) return 1;
  if (std::abs(alpha - 0.10) < 1e-12) return 2;
  throw std::invalid_argument("significance level must be 0.01, 0.05 or 0.10");
}

const Surface& surface_for(Deterministic reg, int n_vars) {
  if (reg == Deterministic::None && n_vars == 1) return kTauNone1;
  if (reg == Deterministic::Constant && n_vars == 1) return kTauConst1;
  if (reg == Deterministic::Constant && n_vars == 2) return kTauConst2;
  throw std::invalid_argument("no critical-value table for this deterministic term / variable count");
}

// Regression dx_t on [x_{t-1}, (1), dx_{t-1..t-lags}] for t in [first, n).
struct Design {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
};

Design build_design(std::span<const double> x, int lags, int first, bool constant) {
  const int n = static_cast<int>(x.size());
  const int rows = n - first;
  const int cols = 1 + (constant ? 1 : 0) + lags;
  Design d{Eigen::MatrixXd(rows, cols), Eigen::VectorXd(rows)};
  for (int r = 0; r < rows; ++r) {
    const int t = first + r;
    d.y(r) = x[t] - x[t - 1];
    int c = 0;
    d.X(r, c++) = x[t - 1];
    if (constant) d.X(r, c++) = 1.0;
    for (int j = 1; j <= lags; ++j) d.X(r, c++) = x[t - j] - x[t - j - 1];
  }
  return d;
}

struct TStat {
  double t;
  int nobs;
};

TStat gamma_t_ratio(std::span<const double> x, int lags, bool constant) {
  const Design d = build_design(x, lags, lags + 1, constant);
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(d.X);
  const Eigen::VectorXd b = qr.solve(d.y);
  const Eigen::VectorXd resid = d.y - d.X * b;
  const auto nobs = static_cast<int>(d.X.rows());
  const auto k = static_cast<int>(d.X.cols());
  const double s2 = resid.squaredNorm() / (nobs - k);
  const Eigen::MatrixXd xtx_inv = (d.X.transpose() * d.X).inverse();
  return {b(0) / std::sqrt(s2 * xtx_inv(0, 0)), nobs};
}

int select_lag_aic(std::span<const double> x, int max_lags, bool constant) {
  // Common sample for every candidate; normal equations on nested leading blocks.
  const Design d = build_design(x, max_lags, max_lags + 1, constant);
  const Eigen::MatrixXd xtx = d.X.transpose() * d.X;
  const Eigen::VectorXd xty = d.X.transpose() * d.y;
  const double yty = d.y.squaredNorm();
  const double nobs = static_cast<double>(d.X.rows());
  const int base = 1 + (constant ? 1 : 0);
  int best_lag = 0;
  double best_aic = std::numeric_limits<double>::infinity();
  for (int lag = 0; lag <= max_lags; ++lag) {
    const int k = base + lag;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(xtx.topLeftCorner(k, k));
    const Eigen::VectorXd b = ldlt.solve(xty.head(k));
    const double ssr = std::max(yty - b.dot(xty.head(k)), 1e-300);
    const double aic = nobs * std::log(ssr / nobs) + 2.0 * k;
    if (aic < best_aic) {
      best_aic = aic;
      best_lag = lag;
    }
  }
  return best_lag;
}

}  // namespace

std::string to_string(AdfDecision d) {
  switch (d) {
    case AdfDecision::Stationary: return "stationary";
    case AdfDecision::UnitRoot: return "unit_root";
    case AdfDecision::Dropped: return "dropped";
  }
  return "unknown";
}

double mackinnon_critical_value(Deterministic regression, int n_vars, double alpha, int nobs) {
  const auto& b = surface_for(regression, n_vars)[static_cast<std::size_t>(level_index(alpha))];
  const double inv = 1.0 / static_cast<double>(nobs);
  return b[0] + b[1] * inv + b[2] * inv * inv + b[3] * inv * inv * inv;
}

double mackinnon_p_value(double statistic, Deterministic regression, int n_vars) {
  const PValueSurface* s = nullptr;
  if (regression == Deterministic::None) s = n_vars == 1 ? &kPNone1 : n_vars == 2 ? &kPNone2 : nullptr;
  if (regression == Deterministic::Constant) s = n_vars == 1 ? &kPConst1 : n_vars == 2 ? &kPConst2 : nullptr;
  if (!s) throw std::invalid_argument("no p-value surface for this deterministic term / variable count");
  if (statistic > s->tau_max) return 1.0;
  if (statistic < s->tau_min) return 0.0;
  double z = 0.0;
  if (statistic <= s->tau_star) {
    z = s->small[0] + s->small[1] * statistic + s->small[2] * statistic * statistic;
  } else {
    z = s->large[0] + s->large[1] * statistic + s->large[2] * statistic * statistic +
        s->large[3] * statistic * statistic * statistic;
  }
  return numeric::normal_cdf(z);
}

AdfResult adf_test_with_table(std::span<const double> x, const AdfOptions& opts, Deterministic table, int n_vars) {
  AdfResult res;
  res.alpha_level = opts.alpha;
  level_index(opts.alpha);
  if (x.size() < kMinTestLength) {
    res.decision = AdfDecision::Dropped;
    res.n_obs = static_cast<int>(x.size());
    return res;
  }
  const bool constant = opts.regression == Deterministic::Constant;
  const int n = static_cast<int>(x.size());
  const int ntrend = constant ? 1 : 0;
  int max_lags = opts.max_lags.value_or(static_cast<int>(std::floor(12.0 * std::pow(n / 100.0, 0.25))));
  max_lags = std::clamp(max_lags, 0, std::max(0, n / 2 - ntrend - 1));

  const int lags = opts.autolag ? select_lag_aic(x, max_lags, constant) : max_lags;
  const auto ts = gamma_t_ratio(x, lags, constant);
  res.statistic = ts.t;
  res.lags_used = lags;
  res.n_obs = ts.nobs;
  res.critical_value = mackinnon_critical_value(table, n_vars, opts.alpha, ts.nobs);
  res.p_value = mackinnon_p_value(ts.t, table, n_vars);
  res.decision = ts.t < res.critical_value ? AdfDecision::Stationary : AdfDecision::UnitRoot;
  return res;
}

AdfResult adf_test(std::span<const double> x, const AdfOptions& opts) {
  return adf_test_with_table(x, opts, opts.regression, 1);
}

CointResult engle_granger(std::span<const double> y, std::span<const double> x, double alpha) {
  if (y.size() != x.size()) throw std::invalid_argument("engle_granger: length mismatch");
  CointResult res;
  if (y.size() < kMinTestLength) {
    res.residual_adf.n_obs = static_cast<int>(y.size());
    res.residual_adf.alpha_level = alpha;
    return res;
  }
  const double xm = numeric::mean(x), ym = numeric::mean(y);
  double sxx = 0.0, sxy = 0.0, sx2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - xm) * (x[i] - xm);
    sxy += (x[i] - xm) * (y[i] - ym);
    sx2 += x[i] * x[i];
  }
  // Centred sum of squares at rounding level of the raw one means a constant regressor.
  if (!(sxx > 1e-24 * sx2) || !(sxx > 0.0) || !std::isfinite(sxx)) {
    throw std::invalid_argument("engle_granger: regressor (market vol) has zero variance");
  }
  res.beta_hat = sxy / sxx;
  res.alpha_hat = ym - res.beta_hat * xm;
  std::vector<double> resid(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) resid[i] = y[i] - res.alpha_hat - res.beta_hat * x[i];

  AdfOptions opts;
  opts.regression = Deterministic::None;
  opts.alpha = alpha;
  res.residual_adf = adf_test_with_table(resid, opts, Deterministic::Constant, 2);
  res.decision = res.residual_adf.decision == AdfDecision::Stationary ? CointDecision::Cointegrated
                                                                       : CointDecision::NotCointegrated;
  return res;
}

CointResult engle_granger(const VolSeries& asset, const VolSeries& market, double alpha) {
  const auto pair = vol::align_pair(asset, market);
  return engle_granger(pair.asset, pair.market, alpha);
}

KpssResult kpss_test(std::span<const double> x, std::optional<int> lags, double alpha) {
  const std::size_t n = x.size();
  if (n < 3) throw std::invalid_argument("kpss_test needs at least 3 observations");
  KpssResult res;
  res.lags = lags.value_or(static_cast<int>(std::floor(3.0 * std::sqrt(static_cast<double>(n)) / 13.0)));
  res.lags = std::clamp(res.lags, 0, static_cast<int>(n) - 1);
  const double m = numeric::mean(x);
  std::vector<double> e(n);
  for (std::size_t i = 0; i < n; ++i) e[i] = x[i] - m;

  double partial = 0.0, eta_num = 0.0, s2 = 0.0;
  for (double v : e) {
    partial += v;
    eta_num += partial * partial;
    s2 += v * v;
  }
  const double nd = static_cast<double>(n);
  for (int j = 1; j <= res.lags; ++j) {
    double acc = 0.0;
    for (std::size_t t = static_cast<std::size_t>(j); t < n; ++t) acc += e[t] * e[t - static_cast<std::size_t>(j)];
    s2 += 2.0 * (1.0 - j / (res.lags + 1.0)) * acc;
  }
  s2 /= nd;
  res.statistic = s2 > 0.0 ? eta_num / (nd * nd * s2) : 0.0;

  // Kwiatkowski et al. (1992) level-stationarity critical values.
  constexpr std::array<double, 4> probs{0.10, 0.05, 0.025, 0.01};
  constexpr std::array<double, 4> crit{0.347, 0.463, 0.574, 0.739};
  auto interp = [](double v, const auto& xs, const auto& ys) {
    if (v <= xs.front()) return ys.front();
    if (v >= xs.back()) return ys.back();
    std::size_t i = 1;
    while (xs[i] < v) ++i;
    const double w = (v - xs[i - 1]) / (xs[i] - xs[i - 1]);
    return ys[i - 1] + w * (ys[i] - ys[i - 1]);
  };
  res.p_value = interp(res.statistic, crit, probs);
  if (alpha > 0.10 || alpha < 0.01) throw std::invalid_argument("kpss_test: alpha must be within [0.01, 0.10]");
  constexpr std::array<double, 4> probs_up{0.01, 0.025, 0.05, 0.10};
  constexpr std::array<double, 4> crit_up{0.739, 0.574, 0.463, 0.347};
  res.reject = res.statistic > interp(alpha, probs_up, crit_up);
  return res;
}

BatchSummary batch_classify(std::span<const RatioSeries> hvrs, std::span<const VolPair> pairs, std::string horizon,
                            double alpha) {
  if (hvrs.empty() && pairs.empty()) throw std::invalid_argument("batch_classify: empty panel");
  if (hvrs.size() != pairs.size()) {
    throw std::invalid_argument("batch_classify: need one HVR series per (asset, market) vol pair");
  }
  BatchSummary out;
  out.horizon = std::move(horizon);
  AdfOptions opts;
  opts.alpha = alpha;
  for (std::size_t i = 0; i < hvrs.size(); ++i) {
    const auto adf = adf_test(hvrs[i].ratios, opts);
    const auto pair = vol::align_pair(pairs[i].asset, pairs[i].market);
    CointResult eg;
    if (pair.times.size() >= kMinTestLength) eg = engle_granger(pair.asset, pair.market, alpha);
    if (adf.decision == AdfDecision::Dropped || eg.decision == CointDecision::Dropped) {
      ++out.n_dropped;
      continue;
    }
    ++out.n_tested;
    if (adf.decision == AdfDecision::Stationary) ++out.n_stationary;
    if (eg.decision == CointDecision::Cointegrated) ++out.n_cointegrated;
  }
  if (out.n_tested > 0) {
    out.pct_stationary = 100.0 * static_cast<double>(out.n_stationary) / static_cast<double>(out.n_tested);
    out.pct_cointegrated = 100.0 * static_cast<double>(out.n_cointegrated) / static_cast<double>(out.n_tested);
  }
  return out;
}

}  // namespace volrisk::stattests
