#include "support.hpp"

#include "volrisk/numeric.hpp"
#include "volrisk/volcore.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace volrisk;
using namespace volrisk::vol;

namespace {

ReturnSeries make_returns(const std::vector<double>& r, std::string id = "A", EpochSeconds start = 0) {
  ReturnSeries s;
  s.asset_id = std::move(id);
  s.returns = r;
  for (std::size_t i = 0; i < r.size(); ++i) s.times.push_back(start + static_cast<EpochSeconds>(86400 * (i + 1)));
  return s;
}

VolSeries make_vols(const std::vector<double>& sigma, int window = 5, std::string id = "A") {
  VolSeries v;
  v.asset_id = std::move(id);
  v.window = window;
  v.sigma = sigma;
  for (std::size_t i = 0; i < sigma.size(); ++i) v.times.push_back(static_cast<EpochSeconds>(i));
  return v;
}

}  // namespace

TEST_CASE("rolling vol examples") {
  const auto flat = rolling_vol(make_returns(std::vector<double>(20, 0.003)), 5);
  CHECK(flat.size() == 16);
  for (double s : flat.sigma) CHECK(s == 0.0);

  const auto alt = rolling_vol(make_returns({0.01, -0.01, 0.01, -0.01}), 4);
  REQUIRE(alt.size() == 1);
  CHECK(alt.sigma[0] == doctest::Approx(std::sqrt(4e-4 / 3.0)).epsilon(1e-12));
  CHECK(alt.sigma[0] == doctest::Approx(0.011547).epsilon(1e-4));

  CHECK_THROWS_AS(rolling_vol(make_returns({0.1, 0.2, 0.3}), 1), std::invalid_argument);
  CHECK_THROWS_AS(rolling_vol(make_returns({0.1, 0.2, 0.3}), 4), std::invalid_argument);
}

TEST_CASE("rolling vol matches a direct sample std per window") {
  const auto r = testsupport::white_noise(300, 11, 0.01);
  const auto v = rolling_vol(make_returns(r), 30);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::vector<double> w(r.begin() + static_cast<std::ptrdiff_t>(i), r.begin() + static_cast<std::ptrdiff_t>(i + 30));
    double m = 0.0;
    for (double x : w) m += x / 30.0;
    double ss = 0.0;
    for (double x : w) ss += (x - m) * (x - m);
    CHECK(v.sigma[i] == doctest::Approx(std::sqrt(ss / 29.0)).epsilon(1e-12));
  }
}

TEST_CASE("prepending data leaves later rolling vols unchanged") {
  const auto r = testsupport::white_noise(200, 5, 0.01);
  const auto extra = testsupport::white_noise(50, 6, 0.01);
  std::vector<double> longer = extra;
  longer.insert(longer.end(), r.begin(), r.end());
  const auto base = rolling_vol(make_returns(r, "A", 50 * 86400), 10);
  const auto ext = rolling_vol(make_returns(longer), 10);
  for (std::size_t i = 0; i < base.size(); ++i) {
    const auto it = std::find(ext.times.begin(), ext.times.end(), base.times[i]);
    REQUIRE(it != ext.times.end());
    CHECK(ext.sigma[static_cast<std::size_t>(it - ext.times.begin())] == doctest::Approx(base.sigma[i]).epsilon(1e-14));
  }
}

TEST_CASE("HVR examples") {
  const auto m = make_vols({0.01, 0.02, 0.03});
  const auto same = hvr(m, m);
  for (double x : same.ratios) CHECK(x == 1.0);

  const auto two = hvr(make_vols({0.02}), make_vols({0.01}));
  CHECK(two.ratios.at(0) == doctest::Approx(2.0));

  const auto zero = hvr(make_vols({0.02, 0.02, 0.02}), make_vols({0.01, 0.0, 0.01}));
  CHECK(zero.size() == 2);
  CHECK(zero.excluded == 1);

  CHECK_THROWS_AS(hvr(make_vols({0.1}, 5), make_vols({0.1}, 10)), std::invalid_argument);
  auto late = make_vols({0.1});
  late.times = {1000};
  CHECK_THROWS_AS(hvr(late, make_vols({0.1})), std::invalid_argument);
}

TEST_CASE("HVR is invariant to a common rescaling of returns") {
  const auto ra = testsupport::white_noise(400, 21, 0.02);
  const auto rm = testsupport::white_noise(400, 22, 0.01);
  std::vector<double> ra_c, rm_c;
  for (double x : ra) ra_c.push_back(7.5 * x);
  for (double x : rm) rm_c.push_back(7.5 * x);
  const auto h1 = hvr(rolling_vol(make_returns(ra, "A"), 20), rolling_vol(make_returns(rm, "M"), 20));
  const auto h2 = hvr(rolling_vol(make_returns(ra_c, "A"), 20), rolling_vol(make_returns(rm_c, "M"), 20));
  REQUIRE(h1.size() == h2.size());
  for (std::size_t i = 0; i < h1.size(); ++i) CHECK(h2.ratios[i] == doctest::Approx(h1.ratios[i]).epsilon(1e-12));
}

TEST_CASE("GARCH(1,1) parameter recovery") {
  const auto path = testsupport::garch11(20000, 1e-6, 0.05, 0.90, 2024);
  const auto fit = fit_garch11(path.returns);
  CHECK(std::abs(fit.model.alpha - 0.05) < 0.05);
  CHECK(std::abs(fit.model.beta - 0.90) < 0.05);
  CHECK(fit.model.persistence() < kGarchMaxPersistence + 1e-12);
  CHECK(fit.model.omega > 0.0);
  CHECK(one_step_variance(fit.model, fit.state) >= fit.model.omega);
}

TEST_CASE("GARCH on i.i.d. returns: small persistence, variance close to the sample variance") {
  const auto r = testsupport::white_noise(5000, 77, 0.01);
  const auto fit = fit_garch11(r);
  CHECK(fit.model.persistence() < 0.2);
  const double sv = numeric::sample_variance(r);
  CHECK(std::abs(fit.model.unconditional_variance() / sv - 1.0) < 0.10);
}

TEST_CASE("GARCH length floor") {
  CHECK_THROWS_AS(fit_garch11(testsupport::white_noise(50, 1)), std::invalid_argument);
}

TEST_CASE("GARCH forecast recursion") {
  GarchModel m{1e-6, 0.1, 0.8, 0.0};
  GarchState s{0.01, 2e-4};
  const auto f = forecast_variance(m, s, 4);
  CHECK(f[0] == doctest::Approx(1e-6 + 0.1 * 1e-4 + 0.8 * 2e-4));
  for (std::size_t j = 1; j < f.size(); ++j) CHECK(f[j] == doctest::Approx(1e-6 + 0.9 * f[j - 1]));
  CHECK_THROWS_AS(forecast_variance(m, s, 0), std::invalid_argument);
}

TEST_CASE("DVR examples") {
  GarchModel m{1e-6, 0.05, 0.9, 0.0};
  GarchState s{0.01, 1e-4};
  CHECK(dvr(m, s, m, s) == doctest::Approx(1.0));

  GarchModel a{4e-4, 0.0, 0.0, 0.0}, b{1e-4, 0.0, 0.0, 0.0};
  CHECK(dvr(a, {}, b, {}) == doctest::Approx(2.0));
}

TEST_CASE("DVR of a scaled copy equals the scale") {
  const auto path = testsupport::garch11(3000, 2e-6, 0.08, 0.88, 99);
  std::vector<double> scaled;
  for (double x : path.returns) scaled.push_back(2.5 * x);
  const auto fm = fit_garch11(path.returns);
  const auto fa = fit_garch11(scaled);
  CHECK(dvr(fa.model, fa.state, fm.model, fm.state) == doctest::Approx(2.5).epsilon(1e-3));
}

TEST_CASE("DVR via an ARIMA forecast of the HVR") {
  RatioSeries h;
  h.asset_id = "A";
  for (std::size_t i = 0; i < 300; ++i) {
    h.times.push_back(static_cast<EpochSeconds>(i));
    h.ratios.push_back(1.5);
  }
  const auto noise = testsupport::white_noise(300, 8, 0.01);
  for (std::size_t i = 0; i < 300; ++i) h.ratios[i] += noise[i];
  const double v = dvr_from_hvr_forecast(h, {0, 1, 0});
  CHECK(v == doctest::Approx(h.ratios.back()));
}

TEST_CASE("HVR distribution diagnostics") {
  auto rng = testsupport::make_rng(404);
  std::normal_distribution<double> g(0.2, 0.3);
  std::vector<double> lognormal(5000);
  for (auto& v : lognormal) v = std::exp(g(rng));
  const auto d = hvr_distribution(lognormal);
  CHECK(std::abs(d.skewness) < 0.05);
  CHECK(d.fitted_t_dof > 50.0);
  CHECK(d.sample_mean == doctest::Approx(0.2).epsilon(0.05));
  for (std::size_t i = 1; i < d.qq_points.size(); ++i) CHECK(d.qq_points[i].sample >= d.qq_points[i - 1].sample);

  std::student_t_distribution<double> t5(5.0);
  std::vector<double> logt(5000);
  for (auto& v : logt) v = std::exp(0.1 + 0.2 * t5(rng));
  const auto dt = hvr_distribution(logt);
  CHECK(dt.fitted_t_dof >= 3.5);
  CHECK(dt.fitted_t_dof <= 7.0);
  CHECK(dt.fitted_t_scale == doctest::Approx(0.2).epsilon(0.1));

  CHECK_THROWS_AS(hvr_distribution(std::vector<double>{1.0, 1.1, 0.9}), std::invalid_argument);
}
