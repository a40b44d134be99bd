#include "support.hpp"

#include "volrisk/stattests.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace volrisk;
using namespace volrisk::stattests;

namespace {

// Dickey-Fuller t-ratio with no augmentation lags, computed from the 2x2 (or 1x1)
// normal equations directly.
double df_t_ratio(const std::vector<double>& x, bool constant) {
  const std::size_t m = x.size() - 1;
  double sy = 0, sl = 0, sll = 0, sly = 0, syy = 0;
  for (std::size_t t = 1; t <= m; ++t) {
    const double dy = x[t] - x[t - 1];
    const double l = x[t - 1];
    sy += dy;
    sl += l;
    sll += l * l;
    sly += l * dy;
    syy += dy * dy;
  }
  const double n = static_cast<double>(m);
  if (!constant) {
    const double g = sly / sll;
    const double ssr = syy - g * sly;
    const double s2 = ssr / (n - 1.0);
    return g / std::sqrt(s2 / sll);
  }
  const double cll = sll - sl * sl / n;
  const double cly = sly - sl * sy / n;
  const double g = cly / cll;
  const double ssr = (syy - sy * sy / n) - g * cly;
  const double s2 = ssr / (n - 2.0);
  return g / std::sqrt(s2 / cll);
}

std::vector<double> ols_residuals(const std::vector<double>& y, const std::vector<double>& x) {
  const double n = static_cast<double>(y.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  const double b = sxy / sxx;
  std::vector<double> e(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) e[i] = y[i] - my - b * (x[i] - mx);
  return e;
}

double quantile(std::vector<double> v, double p) {
  const auto k = static_cast<std::size_t>(p * static_cast<double>(v.size()));
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
  return v[k];
}

RatioSeries ratio_series(const std::vector<double>& r) {
  RatioSeries s;
  s.asset_id = "A";
  s.benchmark_id = "M";
  s.window = 5;
  s.ratios = r;
  for (std::size_t i = 0; i < r.size(); ++i) s.times.push_back(static_cast<EpochSeconds>(i));
  return s;
}

VolSeries vol_series(const std::vector<double>& v) {
  VolSeries s;
  s.asset_id = "A";
  s.window = 5;
  s.sigma = v;
  for (std::size_t i = 0; i < v.size(); ++i) s.times.push_back(static_cast<EpochSeconds>(i));
  return s;
}

}  // namespace

TEST_CASE("critical values match a Monte-Carlo null distribution") {
  constexpr int kReps = 50000;
  constexpr std::size_t kT = 500;
  std::vector<double> tau_c, tau_n, tau_eg;
  tau_c.reserve(kReps);
  tau_n.reserve(kReps);
  tau_eg.reserve(kReps);
  auto rng = testsupport::make_rng(2024);
  std::normal_distribution<double> g;
  std::vector<double> x(kT), y(kT);
  for (int r = 0; r < kReps; ++r) {
    x[0] = g(rng);
    y[0] = g(rng);
    for (std::size_t t = 1; t < kT; ++t) {
      x[t] = x[t - 1] + g(rng);
      y[t] = y[t - 1] + g(rng);
    }
    tau_c.push_back(df_t_ratio(x, true));
    tau_n.push_back(df_t_ratio(x, false));
    tau_eg.push_back(df_t_ratio(ols_residuals(y, x), false));
  }
  const int nobs = static_cast<int>(kT) - 1;
  CHECK(std::abs(quantile(tau_c, 0.05) - mackinnon_critical_value(Deterministic::Constant, 1, 0.05, nobs)) < 0.03);
  CHECK(std::abs(quantile(tau_n, 0.05) - mackinnon_critical_value(Deterministic::None, 1, 0.05, nobs)) < 0.03);
  CHECK(std::abs(quantile(tau_eg, 0.05) - mackinnon_critical_value(Deterministic::Constant, 2, 0.05, nobs)) < 0.03);
}

TEST_CASE("critical value tables") {
  CHECK(mackinnon_critical_value(Deterministic::Constant, 1, 0.05, 100000) == doctest::Approx(-2.8621).epsilon(1e-3));
  CHECK(mackinnon_critical_value(Deterministic::Constant, 1, 0.01, 500) <
        mackinnon_critical_value(Deterministic::Constant, 1, 0.05, 500));
  CHECK(mackinnon_critical_value(Deterministic::Constant, 1, 0.05, 500) <
        mackinnon_critical_value(Deterministic::Constant, 1, 0.10, 500));
  CHECK_THROWS_AS(mackinnon_critical_value(Deterministic::Constant, 1, 0.025, 500), std::invalid_argument);
}

TEST_CASE("p-values are monotone and nominal at the asymptotic critical value") {
  const std::pair<Deterministic, int> tables[] = {
      {Deterministic::None, 1}, {Deterministic::Constant, 1}, {Deterministic::Constant, 2}};
  for (const auto& [reg, k] : tables) {
    {
      const double cv = mackinnon_critical_value(reg, k, 0.05, 1000000);
      CHECK(mackinnon_p_value(cv, reg, k) == doctest::Approx(0.05).epsilon(0.1));
      double prev = 0.0;
      for (double s = -8.0; s <= 3.0; s += 0.25) {
        const double p = mackinnon_p_value(s, reg, k);
        CHECK(p >= prev - 1e-12);
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
        prev = p;
      }
    }
  }
}

TEST_CASE("ADF examples") {
  CHECK(adf_test(testsupport::random_walk(500, 11)).decision == AdfDecision::UnitRoot);
  const auto stat = adf_test(testsupport::ar1(500, 0.5, 12));
  CHECK(stat.decision == AdfDecision::Stationary);
  CHECK(stat.statistic < stat.critical_value);
  CHECK(stat.p_value < 0.05);
  const auto short_series = adf_test(testsupport::white_noise(10, 1));
  CHECK(short_series.decision == AdfDecision::Dropped);
}

TEST_CASE("ADF decision agrees with the critical value") {
  for (std::uint64_t s = 0; s < 40; ++s) {
    const auto x = testsupport::ar1(120, 0.9, 100 + s);
    const auto r = adf_test(x);
    CHECK((r.decision == AdfDecision::Stationary) == (r.statistic < r.critical_value));
    CHECK(r.lags_used >= 0);
    CHECK(r.lags_used <= static_cast<int>(std::floor(12.0 * std::pow(1.2, 0.25))));
  }
}

TEST_CASE("ADF statistic is affine invariant with a constant") {
  const auto x = testsupport::ar1(300, 0.8, 21);
  std::vector<double> y;
  for (double v : x) y.push_back(-4.0 * v + 17.0);
  const auto a = adf_test(x);
  const auto b = adf_test(y);
  CHECK(a.lags_used == b.lags_used);
  CHECK(a.statistic == doctest::Approx(b.statistic).epsilon(1e-8));
}

TEST_CASE("ADF with fixed lags and no constant") {
  AdfOptions o;
  o.autolag = false;
  o.max_lags = 0;
  o.regression = Deterministic::None;
  const auto x = testsupport::random_walk(200, 5);
  const auto r = adf_test(x, o);
  CHECK(r.lags_used == 0);
  CHECK(r.n_obs == 199);
  CHECK(r.statistic == doctest::Approx(df_t_ratio(x, false)).epsilon(1e-9));
  o.regression = Deterministic::Constant;
  CHECK(adf_test(x, o).statistic == doctest::Approx(df_t_ratio(x, true)).epsilon(1e-9));
}

TEST_CASE("Engle-Granger examples") {
  const auto x = testsupport::random_walk(1000, 31);
  const auto u = testsupport::ar1(1000, 0.5, 32);
  std::vector<double> y(1000);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = 2.0 * x[i] + u[i];
  const auto c = engle_granger(y, x);
  CHECK(c.decision == CointDecision::Cointegrated);
  CHECK(c.beta_hat >= 1.9);
  CHECK(c.beta_hat <= 2.1);

  const auto w = testsupport::random_walk(1000, 33);
  CHECK(engle_granger(w, x).decision == CointDecision::NotCointegrated);

  const std::vector<double> flat(100, 0.2);
  CHECK_THROWS(engle_granger(testsupport::white_noise(100, 1), flat));
  CHECK(engle_granger(testsupport::white_noise(10, 1), testsupport::white_noise(10, 2)).decision ==
        CointDecision::Dropped);
}

TEST_CASE("Engle-Granger decision is invariant to positive rescaling") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto x = testsupport::random_walk(300, 500 + s);
    const auto u = testsupport::ar1(300, 0.85, 600 + s);
    std::vector<double> y(300), ys(300), xs(300);
    for (std::size_t i = 0; i < y.size(); ++i) {
      y[i] = x[i] + u[i];
      ys[i] = 7.0 * y[i];
      xs[i] = 0.01 * x[i];
    }
    const auto base = engle_granger(y, x).decision;
    CHECK(engle_granger(ys, x).decision == base);
    CHECK(engle_granger(y, xs).decision == base);
  }
}

TEST_CASE("Engle-Granger size on independent walks") {
  int rejections = 0;
  for (std::uint64_t s = 0; s < 300; ++s) {
    const auto a = testsupport::random_walk(500, 7000 + s);
    const auto b = testsupport::random_walk(500, 8000 + s);
    if (engle_granger(a, b).decision == CointDecision::Cointegrated) ++rejections;
  }
  CHECK(rejections <= 30);
}

TEST_CASE("KPSS") {
  const auto wn = kpss_test(testsupport::white_noise(500, 41));
  CHECK_FALSE(wn.reject);
  CHECK(wn.lags == static_cast<int>(std::floor(3.0 * std::sqrt(500.0) / 13.0)));
  const auto rw = kpss_test(testsupport::random_walk(500, 42));
  CHECK(rw.reject);
  CHECK(rw.p_value == doctest::Approx(0.01));
  CHECK(wn.p_value >= 0.01);
  CHECK(wn.p_value <= 0.10);
}

TEST_CASE("batch classification") {
  std::vector<RatioSeries> hvrs;
  std::vector<VolPair> pairs;
  for (std::uint64_t s = 0; s < 20; ++s) {
    auto r = testsupport::white_noise(200, 900 + s, 0.1);
    for (auto& v : r) v += 1.0;
    hvrs.push_back(ratio_series(r));
    auto m = testsupport::random_walk(200, 950 + s, 0.01);
    for (auto& v : m) v += 1.0;
    const auto noise = testsupport::white_noise(200, 980 + s, 0.01);
    std::vector<double> a(200);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = 1.5 * m[i] + noise[i];
    pairs.push_back({vol_series(a), vol_series(m)});
  }
  hvrs.push_back(ratio_series(std::vector<double>(10, 1.0)));
  pairs.push_back({vol_series(testsupport::white_noise(10, 1)), vol_series(testsupport::white_noise(10, 2))});

  const auto b = batch_classify(hvrs, pairs, "5 days");
  CHECK(b.horizon == "5 days");
  CHECK(b.n_dropped == 1);
  CHECK(b.n_tested + b.n_dropped == hvrs.size());
  CHECK(b.pct_stationary == doctest::Approx(100.0));
  CHECK(b.pct_cointegrated == doctest::Approx(100.0));
  CHECK(b.pct_stationary == doctest::Approx(100.0 * static_cast<double>(b.n_stationary) / static_cast<double>(b.n_tested)));

  CHECK_THROWS_AS(batch_classify(std::vector<RatioSeries>{}, std::vector<VolPair>{}, "x"), std::invalid_argument);
}

TEST_CASE("batch size under random-walk ratios") {
  std::vector<RatioSeries> hvrs;
  std::vector<VolPair> pairs;
  for (std::uint64_t s = 0; s < 400; ++s) {
    auto r = testsupport::random_walk(400, 3000 + s, 0.01);
    for (auto& v : r) v += 1.0;
    hvrs.push_back(ratio_series(r));
    pairs.push_back({vol_series(testsupport::random_walk(400, 4000 + s)), vol_series(testsupport::random_walk(400, 5000 + s))});
  }
  const auto b = batch_classify(hvrs, pairs, "x");
  CHECK(b.pct_stationary > 2.0);
  CHECK(b.pct_stationary < 9.0);
  CHECK(b.pct_cointegrated < 9.0);
}
