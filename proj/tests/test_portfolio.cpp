#include "support.hpp"

#include "volrisk/portfolio.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>

using namespace volrisk;
using namespace volrisk::portfolio;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd random_returns(int rows, int cols, std::uint64_t seed) {
  auto rng = testsupport::make_rng(seed);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> scale(0.005, 0.03);
  MatrixXd r(rows, cols);
  std::vector<double> s(static_cast<std::size_t>(cols));
  for (auto& v : s) v = scale(rng);
  for (int t = 0; t < rows; ++t) {
    const double f = g(rng);
    for (int c = 0; c < cols; ++c) r(t, c) = s[static_cast<std::size_t>(c)] * (0.5 * f + g(rng));
  }
  return r;
}

MatrixXd sample_cov(const MatrixXd& x) {
  const MatrixXd c = x.rowwise() - x.colwise().mean();
  return c.transpose() * c / static_cast<double>(x.rows() - 1);
}

CorrelationMatrix corr_of(const MatrixXd& v) {
  CorrelationMatrix c;
  c.values = v;
  return c;
}

vecm::VolForecast flat_forecast(const VectorXd& vols, int h) {
  vecm::VolForecast f;
  f.horizon = h;
  f.vols = vols.transpose().replicate(h, 1);
  f.log_levels = f.vols.array().log().matrix();
  return f;
}

}  // namespace

TEST_CASE("portfolio spec validation") {
  PortfolioSpec ok{{"A", "B"}, {0.3, 0.9}};
  CHECK_NOTHROW(ok.validate());
  CHECK_THROWS_AS((PortfolioSpec{{"A"}, {0.5}}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((PortfolioSpec{{"A", "B"}, {0.5, 1.0}}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((PortfolioSpec{{"A", "B"}, {0.5, 0.0}}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((PortfolioSpec{{"A", "B", "C"}, {0.5, 0.2}}.validate()), std::invalid_argument);
  const auto n = ok.normalized();
  CHECK(n.weights[0] + n.weights[1] == doctest::Approx(1.0));
  CHECK(n.weights[0] == doctest::Approx(0.25));
}

TEST_CASE("correlation validation") {
  CHECK_NOTHROW(corr_of(MatrixXd::Identity(3, 3)).validate());
  MatrixXd asym = MatrixXd::Identity(2, 2);
  asym(0, 1) = 0.3;
  CHECK_THROWS_AS(corr_of(asym).validate(), std::invalid_argument);
  MatrixXd bad(3, 3);
  bad << 1, 0.9, -0.9, 0.9, 1, 0.9, -0.9, 0.9, 1;
  CHECK_THROWS_AS(corr_of(bad).validate(), std::invalid_argument);
  const auto s = sample_correlation(random_returns(200, 4, 1));
  CHECK_NOTHROW(s.validate());
  CHECK(s.window == 200);
}

TEST_CASE("quadratic form examples") {
  VectorXd w(2), v(2);
  w << 0.5, 0.5;
  v << 0.02, 0.02;
  CHECK(std::sqrt(portfolio_variance(w, v, MatrixXd::Identity(2, 2))) == doctest::Approx(std::sqrt(2 * 0.25 * 4e-4)));
  CHECK(std::sqrt(portfolio_variance(w, v, MatrixXd::Identity(2, 2))) == doctest::Approx(0.014142).epsilon(1e-5));

  VectorXd w2(2), v2(2);
  w2 << 0.3, 0.6;
  v2 << 0.015, 0.04;
  const MatrixXd ones = MatrixXd::Ones(2, 2);
  CHECK(std::sqrt(portfolio_variance(w2, v2, ones)) == doctest::Approx(0.3 * 0.015 + 0.6 * 0.04).epsilon(1e-14));

  VectorXd w3(2), v3(2);
  w3 << 0.6, 0.4;
  v3 << 0.02, 0.01;
  MatrixXd r(2, 2);
  r << 1, 0.5, 0.5, 1;
  CHECK(portfolio_variance(w3, v3, r) == doctest::Approx(2.08e-4).epsilon(1e-12));
  CHECK(std::sqrt(portfolio_variance(w3, v3, r)) == doctest::Approx(0.014422).epsilon(1e-5));
}

TEST_CASE("classical vol") {
  const auto rets = random_returns(300, 2, 2);
  const PortfolioSpec degenerate{{"A", "B"}, {0.7, 1e-9}};
  const double sd0 = std::sqrt(sample_cov(rets.bottomRows(250))(0, 0));
  CHECK(classical_vol(rets, degenerate, 250) == doctest::Approx(0.7 * sd0).epsilon(1e-6));
  const PortfolioSpec spec{{"A", "B"}, {0.4, 0.5}};
  const MatrixXd s = sample_cov(rets.bottomRows(100));
  const VectorXd w = spec.weight_vector();
  CHECK(classical_vol(rets, spec, 100) == doctest::Approx(std::sqrt(w.dot(s * w))).epsilon(1e-12));
  CHECK_THROWS_AS(classical_vol(rets, spec, 301), std::invalid_argument);
  CHECK_THROWS_AS(classical_vol(rets, PortfolioSpec{{"A", "B", "C"}, {0.1, 0.2, 0.3}}, 100), std::invalid_argument);
}

TEST_CASE("guardrail") {
  auto g = guardrail(4.0, 1.0);
  CHECK(g.triggered);
  CHECK(g.value == 1.0);
  g = guardrail(2.0, 1.0);
  CHECK_FALSE(g.triggered);
  CHECK(g.value == 2.0);
  g = guardrail(3.0, 1.0);
  CHECK_FALSE(g.triggered);
  CHECK(g.value == 3.0);
  CHECK(guardrail(std::nan(""), 1.0).triggered);
  CHECK_THROWS_AS(guardrail(1.0, 0.0), std::invalid_argument);

  auto rng = testsupport::make_rng(5);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int i = 0; i < 1000; ++i) {
    const double f = u(rng), a = u(rng) + 1e-3;
    CHECK(guardrail(f, a).value <= std::max(f, a));
  }
}

TEST_CASE("VECM portfolio forecast aggregation") {
  VectorXd w(3), v(3);
  w << 0.2, 0.5, 0.7;
  v << 0.01, 0.02, 0.015;
  const auto ident = corr_of(MatrixXd::Identity(3, 3));
  const auto r = vecm_portfolio_forecast(flat_forecast(v, 4), w, ident, 1.0);
  double expected = 0.0;
  for (int i = 0; i < 3; ++i) expected += w(i) * w(i) * v(i) * v(i);
  for (double s : r.step_variances) CHECK(s == doctest::Approx(expected).epsilon(1e-14));

  vecm::VolForecast f;
  f.horizon = 5;
  f.vols = MatrixXd(5, 3);
  f.vols << 0.01, 0.02, 0.03, 0.02, 0.01, 0.02, 0.03, 0.03, 0.01, 0.015, 0.02, 0.025, 0.011, 0.012, 0.013;
  f.log_levels = f.vols.array().log().matrix();
  MatrixXd rr(3, 3);
  rr << 1, 0.3, 0.2, 0.3, 1, 0.4, 0.2, 0.4, 1;
  const auto res = vecm_portfolio_forecast(f, w, corr_of(rr), 1.0);
  double mean = 0.0;
  for (int s = 0; s < 5; ++s) {
    const VectorXd d = f.vols.row(s).transpose();
    const double var = portfolio_variance(w, d, rr);
    CHECK(res.step_variances[static_cast<std::size_t>(s)] == var);
    mean += var;
  }
  CHECK(res.raw_vol == std::sqrt(mean / 5.0));
  CHECK(res.aggregate_vol == res.raw_vol);
  CHECK_FALSE(res.guardrail_triggered);

  // Homogeneity in the vols.
  vecm::VolForecast scaled = f;
  scaled.vols *= 3.0;
  CHECK(vecm_portfolio_forecast(scaled, w, corr_of(rr), 1.0).raw_vol == doctest::Approx(3.0 * res.raw_vol).epsilon(1e-14));

  const auto hit = vecm_portfolio_forecast(f, w, corr_of(rr), res.raw_vol / 4.0);
  CHECK(hit.guardrail_triggered);
  REQUIRE(hit.fallback.has_value());
  CHECK(hit.aggregate_vol == *hit.fallback);

  vecm::VolForecast broken = f;
  broken.unstable = true;
  const auto fb = vecm_portfolio_forecast(broken, w, corr_of(rr), 0.02);
  CHECK(fb.unstable);
  CHECK(fb.guardrail_triggered);
  CHECK(fb.aggregate_vol == 0.02);

  const auto j = nlohmann::json::parse(to_json(res));
  CHECK(j["method"] == "VECM");
  CHECK(j["step_variances"].size() == 5);
}

TEST_CASE("classical and degenerate VECM paths agree") {
  const auto rets = random_returns(500, 3, 7);
  const MatrixXd s = sample_cov(rets);
  const VectorXd vols = s.diagonal().cwiseSqrt();
  const auto corr = sample_correlation(rets);
  const PortfolioSpec spec{{"A", "B", "C"}, {0.3, 0.2, 0.9}};

  vecm::VecmModel m;
  m.n = 3;
  m.rank = 1;
  m.lag = 2;
  m.alpha = MatrixXd::Zero(3, 1);
  m.beta = MatrixXd::Zero(3, 1);
  m.rho = VectorXd::Zero(1);
  m.gamma = {MatrixXd::Zero(3, 3)};
  m.residual_cov = MatrixXd::Identity(3, 3);
  const MatrixXd hist = vols.array().log().matrix().transpose().replicate(2, 1);
  const auto r = vecm_portfolio_forecast(m, hist, spec, 5, corr, 1.0);
  CHECK(std::abs(r.raw_vol - classical_vol(rets, spec, 500)) < 1e-10 * r.raw_vol);
}

TEST_CASE("covariance reconstruction") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto rets = random_returns(500, 6, 100 + seed);
    const MatrixXd s = sample_cov(rets);
    const VectorXd sd = s.diagonal().cwiseSqrt();
    const double market = 0.013;
    const VectorXd hvr = sd / market;
    const MatrixXd rebuilt = covariance_reconstruct(hvr, market, sample_correlation(rets));
    CHECK(((rebuilt - s).array().abs() / s.array().abs().max(1e-300)).maxCoeff() < 1e-12);
    CHECK((rebuilt - rebuilt.transpose()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(rebuilt);
    CHECK(es.eigenvalues().minCoeff() >= -1e-15);
  }
  const MatrixXd unit = covariance_reconstruct(VectorXd::Ones(4), 0.02, corr_of(MatrixXd::Identity(4, 4)));
  CHECK((unit - 4e-4 * MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-18);
  CHECK_THROWS_AS(covariance_reconstruct(VectorXd::Ones(3), 0.02, corr_of(MatrixXd::Identity(4, 4))),
                  std::invalid_argument);
}

TEST_CASE("CAPM beta through the volatility ratio") {
  CHECK(capm_beta(1.0, 1.0) == 1.0);
  CHECK(capm_beta(0.5, 1.6) == doctest::Approx(0.8));
  const auto rets = random_returns(400, 2, 9);
  const MatrixXd s = sample_cov(rets);
  const double corr = s(0, 1) / std::sqrt(s(0, 0) * s(1, 1));
  const double hvr = std::sqrt(s(0, 0) / s(1, 1));
  CHECK(std::abs(capm_beta(corr, hvr) - s(0, 1) / s(1, 1)) < 1e-10);
}

TEST_CASE("trailing average") {
  MatrixXd recent(3, 2);
  recent << 0.01, 0.02, 0.02, 0.02, 0.03, 0.01;
  VectorXd w(2);
  w << 0.5, 0.5;
  const MatrixXd r = MatrixXd::Identity(2, 2);
  double expected = 0.0;
  for (int t = 0; t < 3; ++t) expected += std::sqrt(portfolio_variance(w, recent.row(t).transpose(), r)) / 3.0;
  CHECK(trailing_average_vol(recent, w, r) == doctest::Approx(expected).epsilon(1e-14));
}
