#include "volrisk/numeric.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace volrisk::numeric {

double mean(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("mean of empty sample");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sample_variance(std::span<const double> x) {
  if (x.size() < 2) throw std::invalid_argument("sample variance needs at least 2 values");
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / static_cast<double>(x.size() - 1);
}

double sample_std(std::span<const double> x) { return std::sqrt(sample_variance(x)); }

double quantile_sorted(std::span<const double> sorted, double prob) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
  if (prob < 0.0 || prob > 1.0) throw std::invalid_argument("quantile probability outside [0,1]");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<double> difference(std::span<const double> x, int times) {
  std::vector<double> out(x.begin(), x.end());
  for (int d = 0; d < times; ++d) {
    if (out.size() < 2) return {};
    for (std::size_t i = 0; i + 1 < out.size(); ++i) out[i] = out[i + 1] - out[i];
    out.pop_back();
  }
  return out;
}

Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& data) {
  if (data.rows() < 2) throw std::invalid_argument("covariance needs at least 2 rows");
  const Eigen::RowVectorXd mu = data.colwise().mean();
  const Eigen::MatrixXd centered = data.rowwise() - mu;
  return (centered.transpose() * centered) / static_cast<double>(data.rows() - 1);
}

Eigen::MatrixXd covariance_to_correlation(const Eigen::MatrixXd& cov) {
  const Eigen::VectorXd sd = cov.diagonal().cwiseSqrt();
  if ((sd.array() <= 0.0).any()) throw std::invalid_argument("zero variance column in correlation");
  Eigen::MatrixXd corr = cov.array() / (sd * sd.transpose()).array();
  corr.diagonal().setOnes();
  return corr;
}

double normal_cdf(double z) {
  return boost::math::cdf(boost::math::normal_distribution<double>{}, z);
}

double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>{}, p);
}

double student_t_two_sided_p(double t, double dof) {
  if (!std::isfinite(t)) return 0.0;
  boost::math::students_t_distribution<double> dist(dof);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

double student_t_log_pdf(double x, double location, double scale, double dof) {
  const double z = (x - location) / scale;
  return std::lgamma(0.5 * (dof + 1.0)) - std::lgamma(0.5 * dof) -
         0.5 * std::log(dof * std::numbers::pi) - std::log(scale) -
         0.5 * (dof + 1.0) * std::log1p(z * z / dof);
}

}  // namespace volrisk::numeric
