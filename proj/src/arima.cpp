#include "volrisk/arima.hpp"

#include "volrisk/linmod.hpp"
#include "volrisk/numeric.hpp"
#include "volrisk/optim.hpp"
#include "volrisk/stattests.hpp"
#include "volrisk/types.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <tuple>

namespace volrisk::arima {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Iteration cap and relative tolerance of the usual ARIMA optimiser settings; ARMA
// surfaces with near-cancelling roots are flat enough that tighter limits only burn time.
optim::Options arma_optim_options() {
  optim::Options o;
  o.max_iterations = 100;
  o.function_tolerance = 1e-8;
  return o;
}

// Maps unconstrained values to the coefficients of a stationary AR polynomial via
// partial autocorrelations in (-1, 1).
std::vector<double> partrans(std::span<const double> raw) {
  const std::size_t p = raw.size();
  std::vector<double> phi(p), work(p);
  for (std::size_t i = 0; i < p; ++i) work[i] = phi[i] = std::tanh(raw[i]);
  for (std::size_t j = 1; j < p; ++j) {
    const double a = phi[j];
    for (std::size_t k = 0; k < j; ++k) work[k] -= a * phi[j - k - 1];
    std::copy(work.begin(), work.begin() + static_cast<std::ptrdiff_t>(j), phi.begin());
  }
  return phi;
}

std::vector<double> inverse_partrans(std::span<const double> phi_in) {
  const std::size_t p = phi_in.size();
  std::vector<double> phi(phi_in.begin(), phi_in.end()), work(phi);
  for (std::size_t j = p; j-- > 1;) {
    const double a = phi[j];
    for (std::size_t k = 0; k < j; ++k) work[k] = (phi[k] + a * phi[j - k - 1]) / (1.0 - a * a);
    std::copy(work.begin(), work.begin() + static_cast<std::ptrdiff_t>(j), phi.begin());
  }
  for (double& v : phi) v = std::atanh(std::clamp(v, -0.99, 0.99));
  return phi;
}

// Roots of c0 + c1 z + ... + cn z^n (c0 != 0), trailing zeros trimmed.
std::vector<std::complex<double>> poly_roots(std::vector<double> c) {
  while (c.size() > 1 && std::abs(c.back()) < 1e-12) c.pop_back();
  const auto deg = static_cast<Eigen::Index>(c.size()) - 1;
  if (deg < 1) return {};
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(deg, deg);
  for (Eigen::Index i = 0; i < deg; ++i) companion(0, i) = -c[static_cast<std::size_t>(deg - 1 - i)] / c.back();
  for (Eigen::Index i = 1; i < deg; ++i) companion(i, i - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);
  std::vector<std::complex<double>> roots;
  for (Eigen::Index i = 0; i < deg; ++i) roots.push_back(es.eigenvalues()(i));
  return roots;
}

// Smallest root modulus of 1 + sign * sum c_i z^i; infinity for an empty polynomial.
double min_root_modulus(std::span<const double> c, double sign) {
  std::vector<double> poly{1.0};
  for (double v : c) poly.push_back(sign * v);
  double m = kInf;
  for (const auto& r : poly_roots(poly)) m = std::min(m, std::abs(r));
  return m;
}

struct KalmanRun {
  double ssq = 0.0;
  double sumlog = 0.0;
  bool ok = true;
  Eigen::VectorXd a_filtered;
  std::vector<double> innovations;  // y_t minus its one-step prediction
};

// Harvey state-space form: state dim r = max(p, q + 1), T has the AR coefficients
// in its first column and ones on the superdiagonal, R = (1, ma_1, ..., ma_{r-1}).
KalmanRun run_kalman(std::span<const double> y, std::span<const double> ar, std::span<const double> ma,
                     bool keep_innovations) {
  const auto p = static_cast<Eigen::Index>(ar.size());
  const auto q = static_cast<Eigen::Index>(ma.size());
  const Eigen::Index r = std::max(p, q + 1);
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(r, r);
  for (Eigen::Index i = 0; i < p; ++i) T(i, 0) = ar[static_cast<std::size_t>(i)];
  for (Eigen::Index i = 0; i + 1 < r; ++i) T(i, i + 1) = 1.0;
  Eigen::VectorXd R = Eigen::VectorXd::Zero(r);
  R(0) = 1.0;
  for (Eigen::Index i = 0; i < q; ++i) R(i + 1) = ma[static_cast<std::size_t>(i)];
  const Eigen::MatrixXd Q = R * R.transpose();

  KalmanRun out;
  // Stationary initial covariance: vec(P) = (I - T (x) T)^{-1} vec(Q).
  const Eigen::Index r2 = r * r;
  Eigen::MatrixXd kron(r2, r2);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < r; ++j) kron.block(i * r, j * r, r, r) = T(i, j) * T;
  }
  const Eigen::VectorXd vecQ = Eigen::Map<const Eigen::VectorXd>(Q.data(), r2);
  const Eigen::VectorXd vecP = (Eigen::MatrixXd::Identity(r2, r2) - kron).partialPivLu().solve(vecQ);
  Eigen::MatrixXd P = Eigen::Map<const Eigen::MatrixXd>(vecP.data(), r, r);
  if (!P.allFinite() || P(0, 0) <= 0.0) {
    out.ok = false;
    return out;
  }

  Eigen::VectorXd a = Eigen::VectorXd::Zero(r);
  Eigen::VectorXd a_f(r);
  Eigen::VectorXd K(r);
  Eigen::MatrixXd P_f(r, r), TP(r, r), P_next(r, r);
  double F = 0.0;
  bool steady = false;
  if (keep_innovations) out.innovations.reserve(y.size());
  for (double yt : y) {
    const double v = yt - a(0);
    if (!steady) {
      F = P(0, 0);
      if (!(F > 0.0) || !std::isfinite(F)) {
        out.ok = false;
        return out;
      }
      K = P.col(0) / F;
    }
    out.ssq += v * v / F;
    out.sumlog += std::log(F);
    if (keep_innovations) out.innovations.push_back(v);
    a_f = a + K * v;
    // T a: AR column times the first state plus the shifted state.
    for (Eigen::Index i = 0; i < r; ++i) a(i) = T(i, 0) * a_f(0) + (i + 1 < r ? a_f(i + 1) : 0.0);
    if (!steady) {
      for (Eigen::Index j = 0; j < r; ++j) {
        for (Eigen::Index i = 0; i < r; ++i) P_f(i, j) = P(i, j) - K(i) * P(0, j);
      }
      // T P_f T' using the sparse shape of T.
      for (Eigen::Index j = 0; j < r; ++j) {
        for (Eigen::Index i = 0; i < r; ++i) TP(i, j) = T(i, 0) * P_f(0, j) + (i + 1 < r ? P_f(i + 1, j) : 0.0);
      }
      for (Eigen::Index j = 0; j < r; ++j) {
        for (Eigen::Index i = 0; i < r; ++i) {
          P_next(i, j) = TP(i, 0) * T(j, 0) + (j + 1 < r ? TP(i, j + 1) : 0.0) + Q(i, j);
        }
      }
      double change = 0.0;
      for (Eigen::Index j = 0; j < r; ++j) {
        for (Eigen::Index i = 0; i < r; ++i) change = std::max(change, std::abs(P_next(i, j) - P(i, j)));
      }
      steady = change < 1e-12 * std::max(1.0, P(0, 0));
      P.swap(P_next);
    }
  }
  out.a_filtered = a_f;
  return out;
}

struct CssResult {
  double sse = 0.0;
  std::size_t n_eff = 0;
};

// Residuals of w - mu under the ARMA recursion, with zero pre-sample innovations.
CssResult css(std::span<const double> w, double mu, std::span<const double> ar, std::span<const double> ma) {
  const std::size_t p = ar.size(), q = ma.size();
  CssResult out;
  thread_local std::vector<double> e;
  e.assign(w.size(), 0.0);
  for (std::size_t t = p; t < w.size(); ++t) {
    double v = w[t] - mu;
    for (std::size_t i = 0; i < p; ++i) v -= ar[i] * (w[t - i - 1] - mu);
    for (std::size_t j = 0; j < q && j + 1 <= t; ++j) v -= ma[j] * e[t - j - 1];
    e[t] = v;
    out.sse += v * v;
  }
  out.n_eff = w.size() - p;
  return out;
}

std::vector<double> demean(std::span<const double> w, double mu) {
  std::vector<double> y(w.begin(), w.end());
  for (double& v : y) v -= mu;
  return y;
}

struct Unpacked {
  std::vector<double> ar, ma;
  double mu = 0.0;
};

Unpacked unpack(const std::vector<double>& x, ArimaOrder o, bool intercept, bool transform_ar) {
  Unpacked u;
  const auto p = static_cast<std::size_t>(o.p), q = static_cast<std::size_t>(o.q);
  std::span<const double> raw(x);
  u.ar = transform_ar ? partrans(raw.subspan(0, p)) : std::vector<double>(raw.begin(), raw.begin() + static_cast<std::ptrdiff_t>(p));
  u.ma.assign(raw.begin() + static_cast<std::ptrdiff_t>(p), raw.begin() + static_cast<std::ptrdiff_t>(p + q));
  if (intercept) u.mu = x[p + q];
  return u;
}

double exact_ll(std::span<const double> w, const Unpacked& u, double* sigma2) {
  const auto y = demean(w, u.mu);
  return arma_exact_log_likelihood(y, u.ar, u.ma, sigma2);
}

ArimaModel finish(ArimaOrder o, bool intercept, Unpacked u, std::span<const double> w, FitMethod method) {
  ArimaModel m;
  m.order = o;
  m.has_intercept = intercept;
  m.method = method;
  m.n_used = w.size();
  if (!is_invertible(u.ma)) u.ma = invert_ma(u.ma);
  m.ar = std::move(u.ar);
  m.ma = std::move(u.ma);
  m.intercept = intercept ? u.mu : 0.0;
  if (method == FitMethod::Css) {
    const auto c = css(w, m.intercept, m.ar, m.ma);
    m.sigma2 = c.sse / static_cast<double>(c.n_eff);
    // Scaled to the full differenced length so that orders conditioning on
    // different numbers of start-up values stay comparable.
    const double n = static_cast<double>(w.size());
    m.log_likelihood = -0.5 * n * (std::log(2.0 * std::numbers::pi * m.sigma2) + 1.0);
  } else {
    m.log_likelihood = exact_ll(w, {m.ar, m.ma, m.intercept}, &m.sigma2);
  }
  m.aic = -2.0 * m.log_likelihood + 2.0 * m.parameter_count();
  return m;
}

bool aic_better(double a_aic, ArimaOrder a, double b_aic, ArimaOrder b) {
  if (!std::isfinite(b_aic)) return std::isfinite(a_aic);
  if (!std::isfinite(a_aic)) return false;
  const double tol = 1e-9 * (1.0 + std::abs(b_aic));
  if (a_aic < b_aic - tol) return true;
  if (a_aic > b_aic + tol || !std::isfinite(a_aic)) return false;
  return std::make_tuple(a.p + a.q, a.q) < std::make_tuple(b.p + b.q, b.q);
}

// Forecast of the differenced series plus psi-weights of the integrated model.
std::vector<double> psi_weights(const ArimaModel& m, int h) {
  // phi*(B) = phi(B) (1 - B)^d
  std::vector<double> poly{1.0};
  for (double a : m.ar) poly.push_back(-a);
  for (int k = 0; k < m.order.d; ++k) {
    std::vector<double> next(poly.size() + 1, 0.0);
    for (std::size_t i = 0; i < poly.size(); ++i) {
      next[i] += poly[i];
      next[i + 1] -= poly[i];
    }
    poly = std::move(next);
  }
  std::vector<double> psi(static_cast<std::size_t>(h), 0.0);
  psi[0] = 1.0;
  for (std::size_t j = 1; j < psi.size(); ++j) {
    double v = j <= m.ma.size() ? m.ma[j - 1] : 0.0;
    for (std::size_t i = 1; i < poly.size() && i <= j; ++i) v -= poly[i] * psi[j - i];
    psi[j] = v;
  }
  return psi;
}

}  // namespace

std::string to_string(const ArimaOrder& o) {
  return "(" + std::to_string(o.p) + "," + std::to_string(o.d) + "," + std::to_string(o.q) + ")";
}

bool is_stationary(std::span<const double> ar) {
  std::vector<double> c{1.0};
  for (double a : ar) c.push_back(-a);
  for (const auto& z : poly_roots(c)) {
    if (std::abs(z) <= 1.0 + 1e-8) return false;
  }
  return true;
}

bool is_invertible(std::span<const double> ma) {
  std::vector<double> c{1.0};
  c.insert(c.end(), ma.begin(), ma.end());
  for (const auto& z : poly_roots(c)) {
    if (std::abs(z) < 1.0) return false;
  }
  return true;
}

std::vector<double> invert_ma(std::span<const double> ma) {
  std::vector<double> c{1.0};
  c.insert(c.end(), ma.begin(), ma.end());
  auto roots = poly_roots(c);
  if (roots.empty()) return {ma.begin(), ma.end()};
  for (auto& z : roots) {
    if (std::abs(z) < 1.0) z = 1.0 / z;
  }
  // prod_i (1 - z / root_i)
  std::vector<std::complex<double>> coef{1.0};
  for (const auto& z : roots) {
    std::vector<std::complex<double>> next(coef.size() + 1, 0.0);
    for (std::size_t i = 0; i < coef.size(); ++i) {
      next[i] += coef[i];
      next[i + 1] -= coef[i] / z;
    }
    coef = std::move(next);
  }
  std::vector<double> out(ma.size(), 0.0);
  for (std::size_t i = 0; i < out.size() && i + 1 < coef.size(); ++i) out[i] = coef[i + 1].real();
  return out;
}

double arma_exact_log_likelihood(std::span<const double> y, std::span<const double> ar,
                                 std::span<const double> ma, double* sigma2_out) {
  if (!ar.empty() && !is_stationary(ar)) return -kInf;
  const auto run = run_kalman(y, ar, ma, false);
  if (!run.ok) return -kInf;
  const double n = static_cast<double>(y.size());
  const double s2 = run.ssq / n;
  if (sigma2_out) *sigma2_out = s2;
  return -0.5 * (n * std::log(2.0 * std::numbers::pi * s2) + run.sumlog + n);
}

ArimaModel fit_arima(std::span<const double> x, ArimaOrder order, bool intercept, FitMethod method) {
  if (order.p < 0 || order.d < 0 || order.q < 0) throw std::invalid_argument("fit_arima: negative order");
  const std::size_t need = kMinFitLength + static_cast<std::size_t>(order.p + order.d + order.q);
  if (x.size() < need) {
    throw std::invalid_argument("fit_arima " + to_string(order) + " needs at least " + std::to_string(need) +
                                " observations (got " + std::to_string(x.size()) + ")");
  }
  const auto w = numeric::difference(x, order.d);
  const double n = static_cast<double>(w.size());
  const double w_mean = numeric::mean(w);
  const auto p = static_cast<std::size_t>(order.p), q = static_cast<std::size_t>(order.q);

  if (p == 0 && q == 0) {
    return finish(order, intercept, {{}, {}, intercept ? w_mean : 0.0}, w, method);
  }

  const std::size_t k = p + q + (intercept ? 1 : 0);
  std::vector<double> start(k, 0.0);
  if (intercept) start[p + q] = w_mean;

  Unpacked css_est{std::vector<double>(p, 0.0), std::vector<double>(q, 0.0), intercept ? w_mean : 0.0};
  if (method != FitMethod::Ml) {
    const optim::Objective css_obj = [&](const std::vector<double>& v) {
      const auto u = unpack(v, order, intercept, false);
      const auto c = css(w, u.mu, u.ar, u.ma);
      return 0.5 * std::log(c.sse / static_cast<double>(c.n_eff));
    };
    const auto res = optim::minimize_bfgs(css_obj, start, arma_optim_options());
    if (std::isfinite(res.value)) css_est = unpack(res.x, order, intercept, false);
    if (method == FitMethod::Css) {
      if (!res.converged || !std::isfinite(res.value)) {
        throw NumericalError("CSS fit of ARIMA" + to_string(order) + " did not converge");
      }
      if (!is_stationary(css_est.ar)) {
        throw NumericalError("CSS fit of ARIMA" + to_string(order) + " has a non-stationary AR part");
      }
      return finish(order, intercept, css_est, w, FitMethod::Css);
    }
  }

  const optim::Objective ml_obj = [&](const std::vector<double>& v) {
    return -exact_ll(w, unpack(v, order, intercept, true), nullptr) / n;
  };
  std::vector<std::vector<double>> starts;
  {
    std::vector<double> s(k, 0.0);
    const auto ar0 = is_stationary(css_est.ar) ? css_est.ar : std::vector<double>(p, 0.0);
    const auto raw_ar = inverse_partrans(ar0);
    const auto ma0 = is_invertible(css_est.ma) ? css_est.ma : invert_ma(css_est.ma);
    std::copy(raw_ar.begin(), raw_ar.end(), s.begin());
    std::copy(ma0.begin(), ma0.end(), s.begin() + static_cast<std::ptrdiff_t>(p));
    if (intercept) s[p + q] = css_est.mu;
    starts.push_back(s);
    starts.push_back(start);
    for (double bump : {0.1, -0.1}) {
      auto perturbed = start;
      for (std::size_t i = 0; i < p + q; ++i) perturbed[i] = bump;
      starts.push_back(perturbed);
    }
  }
  optim::Result best;
  best.value = kInf;
  // The CSS-based start usually suffices; the others are retries.
  for (const auto& s : starts) {
    auto res = optim::minimize_bfgs(ml_obj, s, arma_optim_options());
    if (res.converged && res.value < best.value) best = std::move(res);
    if (std::isfinite(best.value)) break;
  }
  if (!std::isfinite(best.value)) {
    throw NumericalError("ML fit of ARIMA" + to_string(order) + " did not converge from any start");
  }
  auto model = finish(order, intercept, unpack(best.x, order, intercept, true), w, method);
  if (!is_stationary(model.ar)) {
    throw NumericalError("ML fit of ARIMA" + to_string(order) + " has a non-stationary AR part");
  }
  return model;
}

ArimaForecast forecast(const ArimaModel& m, std::span<const double> history, int h) {
  if (h < 1) throw std::invalid_argument("arima forecast horizon must be >= 1");
  const int d = m.order.d;
  if (history.size() <= static_cast<std::size_t>(d)) throw std::invalid_argument("arima forecast: history too short");

  const auto w = numeric::difference(history, d);
  const auto y = demean(w, m.intercept);
  const auto run = run_kalman(y, m.ar, m.ma, false);
  if (!run.ok) throw NumericalError("arima forecast: Kalman filter failed");

  const auto p = static_cast<Eigen::Index>(m.ar.size());
  const Eigen::Index r = run.a_filtered.size();
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(r, r);
  for (Eigen::Index i = 0; i < p; ++i) T(i, 0) = m.ar[static_cast<std::size_t>(i)];
  for (Eigen::Index i = 0; i + 1 < r; ++i) T(i, i + 1) = 1.0;

  std::vector<double> wf(static_cast<std::size_t>(h));
  Eigen::VectorXd a = run.a_filtered;
  for (auto& v : wf) {
    a = T * a;
    v = m.intercept + a(0);
  }

  // Integrate back through each differencing level, innermost first.
  std::vector<double> level = wf;
  for (int k = d - 1; k >= 0; --k) {
    const auto base = numeric::difference(history, k);
    double last = base.back();
    for (auto& v : level) {
      last += v;
      v = last;
    }
  }

  ArimaForecast out;
  out.mean = std::move(level);
  const auto psi = psi_weights(m, h);
  out.se.resize(static_cast<std::size_t>(h));
  double acc = 0.0;
  for (std::size_t j = 0; j < psi.size(); ++j) {
    acc += psi[j] * psi[j];
    out.se[j] = std::sqrt(m.sigma2 * acc);
  }
  return out;
}

std::vector<double> fitted_values(const ArimaModel& m, std::span<const double> history) {
  const auto d = static_cast<std::size_t>(m.order.d);
  std::vector<double> fitted(history.size(), std::numeric_limits<double>::quiet_NaN());
  if (history.size() <= d) return fitted;
  const auto w = numeric::difference(history, m.order.d);
  const auto run = run_kalman(demean(w, m.intercept), m.ar, m.ma, true);
  if (!run.ok) throw NumericalError("fitted_values: Kalman filter failed");
  for (std::size_t t = 0; t < run.innovations.size(); ++t) fitted[t + d] = history[t + d] - run.innovations[t];
  return fitted;
}

int ndiffs(std::span<const double> x, double alpha, int max_d) {
  std::vector<double> cur(x.begin(), x.end());
  int d = 0;
  auto is_constant = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [&](double a) { return a == v.front(); });
  };
  while (d < max_d) {
    if (cur.size() < 3 || is_constant(cur)) return d;
    if (!stattests::kpss_test(cur, std::nullopt, alpha).reject) return d;
    cur = numeric::difference(cur, 1);
    ++d;
  }
  return d;
}

AutoResult auto_arima(std::span<const double> x, const AutoOptions& opts) {
  const int d = ndiffs(x, opts.alpha, opts.max_d);
  const bool approx = opts.approximation.value_or(x.size() > 150);
  const bool allow_const = d <= 1;
  const FitMethod search_method = approx ? FitMethod::Css : FitMethod::CssMl;

  struct Candidate {
    ArimaOrder order;
    bool constant = false;
    double aic = kInf;
  };
  std::map<std::tuple<int, int, bool>, Candidate> seen;
  int evaluated = 0;

  auto eval = [&](int p, int q, bool c) -> Candidate {
    Candidate cand{{p, d, q}, c, kInf};
    if (p < 0 || q < 0 || p > opts.max_p || q > opts.max_q || (c && !allow_const)) return cand;
    const auto key = std::make_tuple(p, q, c);
    if (auto it = seen.find(key); it != seen.end()) return it->second;
    if (evaluated >= opts.max_models) return cand;
    ++evaluated;
    try {
      const auto fit = fit_arima(x, cand.order, c, search_method);
      // Candidates with roots close to the unit circle are discarded, as in the reference search.
      if (min_root_modulus(fit.ar, -1.0) >= 1.01 && min_root_modulus(fit.ma, 1.0) >= 1.01) cand.aic = fit.aic;
    } catch (const std::exception&) {
      cand.aic = kInf;
    }
    seen[key] = cand;
    return cand;
  };
  auto better = [](const Candidate& a, const Candidate& b) {
    if (aic_better(a.aic, a.order, b.aic, b.order)) return true;
    // Full tie on AIC and order: prefer no constant.
    return a.order == b.order && std::abs(a.aic - b.aic) <= 1e-9 * (1.0 + std::abs(b.aic)) && !a.constant &&
           b.constant;
  };

  Candidate best;
  for (auto [p, q] : {std::pair{2, 2}, std::pair{0, 0}, std::pair{1, 0}, std::pair{0, 1}}) {
    const auto cand = eval(p, q, allow_const);
    if (better(cand, best)) best = cand;
  }
  if (allow_const) {
    const auto cand = eval(0, 0, false);
    if (better(cand, best)) best = cand;
  }

  bool improved = true;
  while (improved && evaluated < opts.max_models) {
    improved = false;
    const int p = best.order.p, q = best.order.q;
    const std::pair<int, int> moves[] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}, {-1, -1}, {1, 1}, {-1, 1}, {1, -1}};
    for (const auto& [dp, dq] : moves) {
      const auto cand = eval(p + dp, q + dq, best.constant);
      if (better(cand, best)) {
        best = cand;
        improved = true;
        break;
      }
    }
    if (!improved && allow_const) {
      const auto cand = eval(p, q, !best.constant);
      if (better(cand, best)) {
        best = cand;
        improved = true;
      }
    }
  }

  // Refine: exact ML on the winner, falling back through the ranking on failure.
  std::vector<Candidate> ranked;
  for (const auto& [key, cand] : seen) {
    if (std::isfinite(cand.aic)) ranked.push_back(cand);
  }
  if (ranked.empty()) throw NumericalError("auto_arima: every candidate fit failed");
  // Strict key for the fallback order; the tolerance rule in `better` is not transitive.
  auto rank_key = [](const Candidate& c) {
    return std::make_tuple(c.aic, c.order.p + c.order.q, c.order.q, c.constant);
  };
  std::sort(ranked.begin(), ranked.end(),
            [&](const Candidate& a, const Candidate& b) { return rank_key(a) < rank_key(b); });
  std::stable_partition(ranked.begin(), ranked.end(), [&](const Candidate& c) {
    return c.order == best.order && c.constant == best.constant;
  });
  for (const auto& cand : ranked) {
    try {
      AutoResult out;
      out.order = cand.order;
      out.intercept = cand.constant;
      out.model = fit_arima(x, cand.order, cand.constant, FitMethod::CssMl);
      out.models_evaluated = evaluated;
      return out;
    } catch (const std::exception&) {
    }
  }
  throw NumericalError("auto_arima: every candidate failed exact ML refinement");
}

ArimaOrder auto_order(std::span<const double> x, const AutoOptions& opts) { return auto_arima(x, opts).order; }

OrderCensus order_census(std::span<const std::vector<double>> panel, std::string horizon, const AutoOptions& opts) {
  if (panel.empty()) throw std::invalid_argument("order_census: empty panel");
  OrderCensus out;
  out.horizon = std::move(horizon);
  out.n_series = panel.size();

  std::vector<std::size_t> ok_idx;
  for (std::size_t i = 0; i < panel.size(); ++i) {
    try {
      out.selected.push_back(auto_order(panel[i], opts));
      ok_idx.push_back(i);
    } catch (const std::exception&) {
      out.selected.push_back({-1, -1, -1});
    }
  }
  if (ok_idx.empty()) throw NumericalError("order_census: order selection failed on every series");

  std::map<int, std::size_t> pc, dc, qc;
  std::map<ArimaOrder, std::size_t> triples;
  for (std::size_t i : ok_idx) {
    const auto& o = out.selected[i];
    ++pc[o.p];
    ++dc[o.d];
    ++qc[o.q];
    ++triples[o];
  }
  const double total = static_cast<double>(ok_idx.size());
  auto modal = [&](const std::map<int, std::size_t>& counts, int& value, double& pct) {
    std::size_t best = 0;
    for (const auto& [v, c] : counts) {
      if (c > best) {
        best = c;
        value = v;
      }
    }
    pct = 100.0 * static_cast<double>(best) / total;
  };
  modal(pc, out.modal_p, out.modal_p_pct);
  modal(dc, out.modal_d, out.modal_d_pct);
  modal(qc, out.modal_q, out.modal_q_pct);

  std::size_t best_count = 0;
  for (const auto& [o, c] : triples) {
    const bool wins = c > best_count ||
                      (c == best_count && std::make_tuple(o.p + o.q, o.q, o.d) <
                                              std::make_tuple(out.best.p + out.best.q, out.best.q, out.best.d));
    if (wins) {
      best_count = c;
      out.best = o;
    }
  }
  out.coverage_pct = 100.0 * static_cast<double>(best_count) / total;

  double mape_sum = 0.0, rmse_sum = 0.0;
  std::size_t n_err = 0;
  for (std::size_t i = 0; i < panel.size(); ++i) {
    try {
      const auto model = fit_arima(panel[i], out.best, out.best.d == 0);
      const auto fitted = fitted_values(model, panel[i]);
      std::vector<double> actual, pred;
      for (std::size_t t = 0; t < fitted.size(); ++t) {
        if (std::isnan(fitted[t])) continue;
        actual.push_back(panel[i][t]);
        pred.push_back(fitted[t]);
      }
      const auto m = linmod::mape(actual, pred);
      mape_sum += m.value;
      rmse_sum += linmod::rmse(actual, pred);
      ++n_err;
    } catch (const std::exception&) {
    }
  }
  out.n_failed = panel.size() - std::min(ok_idx.size(), n_err);
  if (n_err > 0) {
    out.mean_mape = mape_sum / static_cast<double>(n_err);
    out.mean_rmse = rmse_sum / static_cast<double>(n_err);
  } else {
    out.mean_mape = out.mean_rmse = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

}  // namespace volrisk::arima
