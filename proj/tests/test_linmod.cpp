#include "support.hpp"

#include "volrisk/linmod.hpp"

#include <Eigen/Dense>
#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace volrisk;
using namespace volrisk::linmod;

namespace {

VolSeries vols(std::string id, const std::vector<double>& sigma) {
  VolSeries v;
  v.asset_id = std::move(id);
  v.window = 10;
  v.sigma = sigma;
  for (std::size_t i = 0; i < sigma.size(); ++i) v.times.push_back(static_cast<EpochSeconds>(i));
  return v;
}

}  // namespace

TEST_CASE("exact proportional fit without intercept") {
  const std::vector<double> x{1, 2, 3, 4, 5};
  const std::vector<double> y{2, 4, 6, 8, 10};
  const auto fit = ols(y, x, false);
  CHECK(fit.slope() == doctest::Approx(2.0));
  CHECK(fit.adj_r2 == doctest::Approx(1.0));
  for (double e : fit.residuals) CHECK(std::abs(e) < 1e-12);
}

TEST_CASE("irrelevant regressor with intercept") {
  const auto x = testsupport::white_noise(1000, 31);
  auto y = testsupport::white_noise(1000, 32, 0.5);
  for (auto& v : y) v += 3.0;
  const auto fit = ols(y, x, true);
  CHECK(fit.slope_p_value() > 0.05);
  CHECK(fit.intercept() == doctest::Approx(3.0).epsilon(0.02));
}

TEST_CASE("coefficients agree with a QR least-squares solve") {
  const auto x = testsupport::white_noise(300, 41);
  auto y = testsupport::white_noise(300, 42, 0.3);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += 0.5 + 1.7 * x[i];
  Eigen::MatrixXd X(300, 2);
  Eigen::VectorXd Y(300);
  for (int i = 0; i < 300; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = x[static_cast<std::size_t>(i)];
    Y(i) = y[static_cast<std::size_t>(i)];
  }
  const Eigen::VectorXd b = X.colPivHouseholderQr().solve(Y);
  const auto fit = ols(y, x, true);
  CHECK(fit.intercept() == doctest::Approx(b(0)).epsilon(1e-10));
  CHECK(fit.slope() == doctest::Approx(b(1)).epsilon(1e-10));

  // Standard errors from sigma^2 (X'X)^-1.
  const Eigen::VectorXd e = Y - X * b;
  const double s2 = e.squaredNorm() / 298.0;
  const Eigen::MatrixXd cov = s2 * (X.transpose() * X).inverse();
  CHECK(fit.stderrs[0] == doctest::Approx(std::sqrt(cov(0, 0))).epsilon(1e-9));
  CHECK(fit.stderrs[1] == doctest::Approx(std::sqrt(cov(1, 1))).epsilon(1e-9));

  const auto m1 = ols(y, x, false);
  const Eigen::VectorXd b1 = X.col(1).colPivHouseholderQr().solve(Y);
  CHECK(m1.slope() == doctest::Approx(b1(0)).epsilon(1e-10));
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += x[i] * y[i];
    sxx += x[i] * x[i];
  }
  CHECK(std::abs(m1.slope() - sxy / sxx) < 1e-10);
}

TEST_CASE("OLS invariants") {
  const auto x = testsupport::random_walk(200, 51);
  auto y = testsupport::white_noise(200, 52);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += 0.8 * x[i];
  for (bool intercept : {true, false}) {
    const auto fit = ols(y, x, intercept);
    double dot_x = 0.0, sum = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      dot_x += fit.residuals[i] * x[i];
      sum += fit.residuals[i];
      scale += std::abs(x[i] * y[i]);
    }
    CHECK(std::abs(dot_x) < 1e-8 * scale);
    if (intercept) {
      CHECK(std::abs(sum / 200.0) < 1e-10);
      CHECK(fit.adj_r2 <= fit.r2);
      CHECK(fit.r2 <= 1.0);
    }
    CHECK(fit.aic == doctest::Approx(2.0 * fit.parameter_count() - 2.0 * fit.log_likelihood));
    CHECK(fit.bic >= fit.aic);
  }
}

TEST_CASE("OLS preconditions") {
  CHECK_THROWS_AS(ols(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2}, true), std::invalid_argument);
  CHECK_THROWS_AS(ols(std::vector<double>{1, 2, 3}, std::vector<double>{2, 2, 2}, true), std::invalid_argument);
  CHECK_THROWS_AS(ols(std::vector<double>{1, 2, 3}, std::vector<double>{0, 0, 0}, false), std::invalid_argument);
}

TEST_CASE("MAPE") {
  const std::vector<double> a{1.0, 2.0};
  CHECK(mape(a, a).value == 0.0);
  CHECK(mape(a, std::vector<double>{1.1, 1.8}).value == doctest::Approx(10.0));
  const auto z = mape(std::vector<double>{0.0, 2.0, 4.0}, std::vector<double>{1.0, 1.0, 4.0});
  CHECK(z.excluded == 1);
  CHECK(z.included == 2);
  CHECK(z.value == doctest::Approx(25.0));
  CHECK_THROWS_AS(mape(std::vector<double>{0.0}, std::vector<double>{1.0}), DataError);

  const auto act = testsupport::white_noise(50, 3);
  const auto pred = testsupport::white_noise(50, 4);
  std::vector<double> ca, cp;
  for (double v : act) ca.push_back(-3.0 * v);
  for (double v : pred) cp.push_back(-3.0 * v);
  CHECK(mape(ca, cp).value == doctest::Approx(mape(act, pred).value).epsilon(1e-12));
  CHECK(rmse(std::vector<double>{1, 2}, std::vector<double>{2, 4}) == doctest::Approx(std::sqrt(2.5)));
}

TEST_CASE("naive battery on exact fits") {
  const auto market_sigma = testsupport::random_walk(100, 61, 0.001);
  std::vector<double> m;
  for (double v : market_sigma) m.push_back(0.02 + std::abs(v));
  const auto market = vols("M", m);
  std::vector<VolSeries> assets;
  for (double b : {0.5, 1.2, 2.0}) {
    std::vector<double> s;
    for (double v : m) s.push_back(b * v);
    assets.push_back(vols("A" + std::to_string(b), s));
  }
  const auto r = naive_model_battery(assets, market, "10 days", NaiveModel::M1);
  CHECK(r.pct_beta_significant == 100.0);
  CHECK(r.mean_adj_r2 == doctest::Approx(100.0));
  CHECK(r.mean_mape == doctest::Approx(0.0).scale(1e-9));
  CHECK_THROWS_AS(naive_model_battery(std::vector<VolSeries>{}, market, "x", NaiveModel::M1), std::invalid_argument);
}

TEST_CASE("naive battery size under independence") {
  const auto m = testsupport::white_noise(200, 70);
  const auto market = vols("M", m);
  std::vector<VolSeries> assets;
  for (int i = 0; i < 600; ++i) assets.push_back(vols("A", testsupport::white_noise(200, 1000 + i)));
  const auto r = naive_model_battery(assets, market, "5 days", NaiveModel::M2);
  CHECK(r.pct_beta_significant > 3.0);
  CHECK(r.pct_beta_significant < 7.5);
}
