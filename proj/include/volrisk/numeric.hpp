#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace volrisk::numeric {

double mean(std::span<const double> x);

/// Sample variance with divisor n-1.
double sample_variance(std::span<const double> x);
double sample_std(std::span<const double> x);

/// Linear-interpolation quantile (Hyndman-Fan type 7). `sorted` must be ascending.
double quantile_sorted(std::span<const double> sorted, double prob);

std::vector<double> difference(std::span<const double> x, int times = 1);

/// Sample covariance (divisor T-1) of the columns of `data` (rows = time).
Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& data);
Eigen::MatrixXd covariance_to_correlation(const Eigen::MatrixXd& cov);

double normal_cdf(double z);
double normal_quantile(double p);

/// Two-sided p-value of a t statistic with `dof` degrees of freedom.
double student_t_two_sided_p(double t, double dof);

/// Log-density of a location-scale Student t.
double student_t_log_pdf(double x, double location, double scale, double dof);

}  // namespace volrisk::numeric
