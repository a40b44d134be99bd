#include "volrisk/optim.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace volrisk::optim {
namespace {

double safe_eval(const Objective& f, const std::vector<double>& x) {
  const double v = f(x);
  return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

std::vector<double> numerical_gradient(const Objective& f, const std::vector<double>& x,
                                       double rel_step) {
  std::vector<double> g(x.size());
  std::vector<double> probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double h = rel_step * std::max(1.0, std::abs(x[i]));
    probe[i] = x[i] + h;
    const double up = safe_eval(f, probe);
    probe[i] = x[i] - h;
    const double down = safe_eval(f, probe);
    probe[i] = x[i];
    if (std::isfinite(up) && std::isfinite(down)) {
      g[i] = (up - down) / (2.0 * h);
    } else {
      // One-sided fallback near the edge of the feasible region.
      const double mid = safe_eval(f, x);
      g[i] = std::isfinite(up) ? (up - mid) / h : (mid - down) / h;
      if (!std::isfinite(g[i])) g[i] = 0.0;
    }
  }
  return g;
}

Result minimize_bfgs(const Objective& f, std::vector<double> x0, const Options& opts) {
  const auto n = static_cast<Eigen::Index>(x0.size());
  Result res;
  res.x = std::move(x0);
  res.value = safe_eval(f, res.x);
  if (!std::isfinite(res.value)) return res;
  if (n == 0) {
    res.converged = true;
    return res;
  }

  Eigen::VectorXd x = to_eigen(res.x);
  Eigen::VectorXd g = to_eigen(numerical_gradient(f, res.x, opts.fd_step));
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
  bool fresh_h = true;
  double fx = res.value;

  auto grad_ok = [&](double tol) { return g.lpNorm<Eigen::Infinity>() <= tol * (1.0 + std::abs(fx)); };

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    res.iterations = iter + 1;
    if (grad_ok(opts.gradient_tolerance)) {
      res.converged = true;
      break;
    }
    Eigen::VectorXd dir = -H * g;
    double slope = g.dot(dir);
    if (!(slope < 0.0)) {
      H.setIdentity();
      fresh_h = true;
      dir = -g;
      slope = g.dot(dir);
    }
    // Keep the first trial step bounded in the sup norm.
    double step = std::min(1.0, 2.0 / std::max(dir.lpNorm<Eigen::Infinity>(), 1e-300));
    double f_new = std::numeric_limits<double>::infinity();
    Eigen::VectorXd x_new;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      x_new = x + step * dir;
      f_new = safe_eval(f, to_std(x_new));
      if (f_new <= fx + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (!fresh_h) {
        H.setIdentity();
        fresh_h = true;
        continue;
      }
      res.converged = grad_ok(std::sqrt(opts.gradient_tolerance));
      break;
    }

    const Eigen::VectorXd g_new = to_eigen(numerical_gradient(f, to_std(x_new), opts.fd_step));
    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    const double rel_change = std::abs(fx - f_new) / (1.0 + std::abs(fx));
    x = x_new;
    g = g_new;
    fx = f_new;

    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (fresh_h) {
        H *= sy / y.squaredNorm();
        fresh_h = false;
      }
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
      H = (I - rho * s * y.transpose()) * H * (I - rho * y * s.transpose()) + rho * s * s.transpose();
    }
    if (rel_change < opts.function_tolerance && grad_ok(std::sqrt(opts.gradient_tolerance))) {
      res.converged = true;
      res.iterations = iter + 1;
      break;
    }
  }
  res.x = to_std(x);
  res.value = fx;
  res.gradient_norm = g.lpNorm<Eigen::Infinity>();
  if (!res.converged) res.converged = grad_ok(opts.gradient_tolerance);
  return res;
}

}  // namespace volrisk::optim
