#include "volrisk/vecm.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace volrisk::vecm {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// exp() of anything above this overflows a double.
constexpr double kMaxLogLevel = 709.0;

double condition_number(const MatrixXd& sym) {
  const Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

// Residuals of the columns of y after least squares on x (returned unchanged when x is empty).
MatrixXd partial_out(const MatrixXd& y, const MatrixXd& x) {
  if (x.cols() == 0) return y;
  return y - x * x.colPivHouseholderQr().solve(y);
}

nlohmann::json matrix_json(const MatrixXd& m) {
  nlohmann::json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  }
  j["data"] = data;
  return j;
}

MatrixXd matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) throw DataError("VECM JSON: matrix size mismatch");
  MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[static_cast<std::size_t>(r * cols + c)];
  }
  return m;
}

}  // namespace

std::string to_string(DeterministicTerm d) {
  return d == DeterministicTerm::None ? "none" : "restricted_constant";
}

LogVolPanel build_panel(std::span<const VolSeries> vols) {
  if (vols.size() < 2) throw std::invalid_argument("build_panel needs at least 2 vol series");
  for (const auto& v : vols) {
    if (v.frequency != vols.front().frequency) throw DataError("build_panel: mixed frequencies");
  }
  // Timestamps present in every series, with the position in each.
  std::map<EpochSeconds, std::vector<std::size_t>> rows;
  for (std::size_t i = 0; i < vols.front().size(); ++i) rows[vols.front().times[i]].push_back(i);
  for (std::size_t s = 1; s < vols.size(); ++s) {
    for (std::size_t i = 0; i < vols[s].size(); ++i) {
      auto it = rows.find(vols[s].times[i]);
      if (it != rows.end() && it->second.size() == s) it->second.push_back(i);
    }
  }
  LogVolPanel panel;
  panel.frequency = vols.front().frequency;
  for (const auto& v : vols) panel.asset_ids.push_back(v.asset_id);
  std::vector<std::vector<double>> kept;
  for (const auto& [t, idx] : rows) {
    if (idx.size() != vols.size()) continue;
    std::vector<double> row(vols.size());
    bool ok = true;
    for (std::size_t s = 0; s < vols.size(); ++s) {
      const double v = vols[s].sigma[idx[s]];
      if (!(v > 0.0)) {
        ok = false;
        break;
      }
      row[s] = std::log(v);
    }
    if (!ok) {
      ++panel.excluded_rows;
      continue;
    }
    panel.times.push_back(t);
    kept.push_back(std::move(row));
  }
  if (kept.empty()) throw DataError("build_panel: no common timestamp with all vols positive");
  panel.values.resize(static_cast<Eigen::Index>(kept.size()), static_cast<Eigen::Index>(vols.size()));
  for (std::size_t r = 0; r < kept.size(); ++r) {
    for (std::size_t c = 0; c < vols.size(); ++c) {
      panel.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = kept[r][c];
    }
  }
  return panel;
}

int min_rows(int n, int lag) { return 50 + n * lag; }

int select_lag(const MatrixXd& levels, int max_p) {
  if (max_p < 2) throw std::invalid_argument("select_lag: max_p must be >= 2 (got " + std::to_string(max_p) + ")");
  const auto n = levels.cols();
  const auto T = levels.rows() - max_p;
  if (T <= n * max_p + 1) throw std::invalid_argument("select_lag: too few rows for max_p = " + std::to_string(max_p));
  const MatrixXd y = levels.bottomRows(T);
  int best = 2;
  double best_aic = std::numeric_limits<double>::infinity();
  for (int p = 2; p <= max_p; ++p) {
    MatrixXd x(T, 1 + n * p);
    x.col(0).setOnes();
    for (int k = 1; k <= p; ++k) x.middleCols(1 + n * (k - 1), n) = levels.middleRows(max_p - k, T);
    const MatrixXd resid = y - x * x.colPivHouseholderQr().solve(y);
    const MatrixXd sigma = resid.transpose() * resid / static_cast<double>(T);
    const double logdet = sigma.ldlt().vectorD().array().log().sum();
    const double aic = logdet + 2.0 * static_cast<double>(n * n * p + n) / static_cast<double>(T);
    if (aic < best_aic) {
      best_aic = aic;
      best = p;
    }
  }
  return best;
}

int select_lag(const LogVolPanel& panel, int max_p) { return select_lag(panel.values, max_p); }

VecmModel fit_vecm(const MatrixXd& levels, const VecmOptions& opts) {
  const int n = static_cast<int>(levels.cols());
  if (n < 2) throw std::invalid_argument("fit_vecm needs at least 2 series");
  const int r = opts.rank.value_or(n - 1);
  if (r < 1 || r > n - 1) {
    throw std::invalid_argument("fit_vecm: rank must lie in [1, " + std::to_string(n - 1) + "] (got " +
                                std::to_string(r) + ")");
  }
  const int p = opts.lag ? *opts.lag : select_lag(levels, opts.max_lag.value_or(5));
  if (p < 1) throw std::invalid_argument("fit_vecm: lag must be >= 1");
  if (levels.rows() < min_rows(n, p)) {
    throw std::invalid_argument("fit_vecm: " + std::to_string(levels.rows()) + " rows, need at least " +
                                std::to_string(min_rows(n, p)));
  }
  if (!levels.allFinite()) throw std::invalid_argument("fit_vecm: non-finite log level");

  const bool constant = opts.deterministic == DeterministicTerm::RestrictedConstant;
  const int m1 = n + (constant ? 1 : 0);
  const Eigen::Index T = levels.rows() - p;
  const MatrixXd diffs = levels.bottomRows(levels.rows() - 1) - levels.topRows(levels.rows() - 1);

  // Row t of the effective sample is time p + t.
  const MatrixXd z0 = diffs.bottomRows(T);
  MatrixXd z1(T, m1);
  z1.leftCols(n) = levels.middleRows(p - 1, T);
  if (constant) z1.col(n).setOnes();
  MatrixXd z2(T, n * (p - 1));
  for (int j = 1; j < p; ++j) z2.middleCols(n * (j - 1), n) = diffs.middleRows(p - 1 - j, T);

  const MatrixXd r0 = partial_out(z0, z2);
  const MatrixXd r1 = partial_out(z1, z2);
  const double td = static_cast<double>(T);
  const MatrixXd s00 = r0.transpose() * r0 / td;
  const MatrixXd s01 = r0.transpose() * r1 / td;
  const MatrixXd s11 = r1.transpose() * r1 / td;

  VecmModel m;
  m.n = n;
  m.rank = r;
  m.lag = p;
  m.deterministic = opts.deterministic;
  m.n_obs = static_cast<std::size_t>(T);
  m.diagnostics.s00_condition = condition_number(s00);
  m.diagnostics.s11_condition = condition_number(s11);
  if (!(m.diagnostics.s00_condition < opts.max_condition) || !(m.diagnostics.s11_condition < opts.max_condition)) {
    std::ostringstream msg;
    msg << "fit_vecm: near-singular moment matrices (cond S00 = " << m.diagnostics.s00_condition
        << ", cond S11 = " << m.diagnostics.s11_condition << ")";
    throw NumericalError(msg.str());
  }

  // |lambda S11 - S10 S00^-1 S01| = 0, symmetrised through the Cholesky factor of S11.
  const Eigen::LLT<MatrixXd> chol(s11);
  const MatrixXd lower = chol.matrixL();
  const MatrixXd quad = s01.transpose() * s00.ldlt().solve(s01);
  MatrixXd sym = lower.triangularView<Eigen::Lower>().solve(quad);
  sym = lower.triangularView<Eigen::Lower>().solve(sym.transpose()).transpose();
  const Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (sym + sym.transpose()));
  const VectorXd evals = es.eigenvalues().reverse();
  const MatrixXd evecs = lower.transpose().triangularView<Eigen::Upper>().solve(es.eigenvectors().rowwise().reverse());
  m.diagnostics.eigenvalues.assign(evals.data(), evals.data() + evals.size());

  MatrixXd beta_full = evecs.leftCols(r);
  const MatrixXd lead = beta_full.topRows(r);
  const Eigen::FullPivLU<MatrixXd> lead_lu(lead);
  if (!lead_lu.isInvertible()) throw NumericalError("fit_vecm: cannot normalise beta (singular leading block)");
  beta_full = beta_full * lead_lu.inverse();

  const MatrixXd alpha = s01 * beta_full * (beta_full.transpose() * s11 * beta_full).inverse();
  m.alpha = alpha;
  m.beta = beta_full.topRows(n);
  m.rho = constant ? VectorXd(beta_full.row(n).transpose()) : VectorXd::Zero(r);

  const MatrixXd ec_part = z1 * beta_full * alpha.transpose();
  const MatrixXd target = z0 - ec_part;
  MatrixXd gamma_stack;
  MatrixXd resid = target;
  if (p > 1) {
    gamma_stack = z2.colPivHouseholderQr().solve(target);
    resid = target - z2 * gamma_stack;
  }
  for (int j = 1; j < p; ++j) m.gamma.push_back(gamma_stack.middleRows(n * (j - 1), n).transpose());
  m.residual_cov = resid.transpose() * resid / td;

  const Eigen::JacobiSVD<MatrixXd> svd(m.pi());
  const VectorXd sv = svd.singularValues();
  m.diagnostics.pi_singular_values.assign(sv.data(), sv.data() + sv.size());
  m.diagnostics.pi_numerical_rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > 1e-8 * sv(0)) ++m.diagnostics.pi_numerical_rank;
  }
  return m;
}

VecmModel fit_vecm(const LogVolPanel& panel, const VecmOptions& opts) {
  VecmOptions o = opts;
  if (!o.max_lag) o.max_lag = panel.frequency == Frequency::Minute ? 3 : 5;
  return fit_vecm(panel.values, o);
}

std::vector<MatrixXd> var_representation(const VecmModel& m) {
  const MatrixXd id = MatrixXd::Identity(m.n, m.n);
  std::vector<MatrixXd> a(static_cast<std::size_t>(m.lag), MatrixXd::Zero(m.n, m.n));
  a[0] = id + m.pi();
  for (int j = 1; j < m.lag; ++j) {
    const auto& g = m.gamma[static_cast<std::size_t>(j - 1)];
    a[static_cast<std::size_t>(j - 1)] += g;
    a[static_cast<std::size_t>(j)] -= g;
  }
  return a;
}

VolForecast forecast_logvol(const VecmModel& m, const MatrixXd& history, int h, bool bias_correct) {
  if (h < 1) throw std::invalid_argument("forecast_logvol: horizon must be >= 1");
  if (history.cols() != m.n) throw std::invalid_argument("forecast_logvol: history has the wrong number of series");
  if (history.rows() < m.lag) {
    throw std::invalid_argument("forecast_logvol: history needs at least " + std::to_string(m.lag) + " rows");
  }
  const auto a = var_representation(m);
  const VectorXd drift = m.drift();

  // Most recent row last; the window slides as forecasts are appended.
  MatrixXd path(m.lag + h, m.n);
  path.topRows(m.lag) = history.bottomRows(m.lag);
  for (int s = 0; s < h; ++s) {
    const int t = m.lag + s;
    VectorXd next = drift;
    for (int k = 1; k <= m.lag; ++k) next += a[static_cast<std::size_t>(k - 1)] * path.row(t - k).transpose();
    path.row(t) = next.transpose();
  }

  VolForecast out;
  out.horizon = h;
  out.log_levels = path.bottomRows(h);
  MatrixXd adj = out.log_levels;
  if (bias_correct) {
    // Forecast-error variance from the moving-average weights of the levels VAR.
    std::vector<MatrixXd> psi{MatrixXd::Identity(m.n, m.n)};
    MatrixXd mse = MatrixXd::Zero(m.n, m.n);
    for (int s = 0; s < h; ++s) {
      mse += psi.back() * m.residual_cov * psi.back().transpose();
      adj.row(s) += 0.5 * mse.diagonal().transpose();
      MatrixXd nxt = MatrixXd::Zero(m.n, m.n);
      const int idx = static_cast<int>(psi.size());
      for (int k = 1; k <= std::min(idx, m.lag); ++k) {
        nxt += a[static_cast<std::size_t>(k - 1)] * psi[static_cast<std::size_t>(idx - k)];
      }
      psi.push_back(std::move(nxt));
    }
  }
  out.unstable = !adj.allFinite() || adj.maxCoeff() > kMaxLogLevel;
  out.vols = adj.array().min(kMaxLogLevel).exp().matrix();
  if (!out.vols.allFinite()) out.unstable = true;
  return out;
}

std::vector<double> error_correction_term(const MatrixXd& levels, const VectorXd& b, double constant) {
  if (b.size() != levels.cols()) throw std::invalid_argument("error_correction_term: dimension mismatch");
  const VectorXd ec = levels * b;
  std::vector<double> out(static_cast<std::size_t>(ec.size()));
  for (Eigen::Index i = 0; i < ec.size(); ++i) out[static_cast<std::size_t>(i)] = ec(i) + constant;
  return out;
}

std::string to_json(const VecmModel& m) {
  nlohmann::json j;
  j["n"] = m.n;
  j["rank"] = m.rank;
  j["lag"] = m.lag;
  j["deterministic"] = to_string(m.deterministic);
  j["normalization"] = "beta leading rank x rank block = identity; matrices row-major";
  j["n_obs"] = m.n_obs;
  j["alpha"] = matrix_json(m.alpha);
  j["beta"] = matrix_json(m.beta);
  j["rho"] = std::vector<double>(m.rho.data(), m.rho.data() + m.rho.size());
  j["gamma"] = nlohmann::json::array();
  for (const auto& g : m.gamma) j["gamma"].push_back(matrix_json(g));
  j["residual_cov"] = matrix_json(m.residual_cov);
  j["diagnostics"] = {{"eigenvalues", m.diagnostics.eigenvalues},
                      {"s00_condition", m.diagnostics.s00_condition},
                      {"s11_condition", m.diagnostics.s11_condition},
                      {"pi_singular_values", m.diagnostics.pi_singular_values},
                      {"pi_numerical_rank", m.diagnostics.pi_numerical_rank}};
  return j.dump(2);
}

VecmModel vecm_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    VecmModel m;
    m.n = j.at("n").get<int>();
    m.rank = j.at("rank").get<int>();
    m.lag = j.at("lag").get<int>();
    const auto det = j.at("deterministic").get<std::string>();
    if (det == "none") {
      m.deterministic = DeterministicTerm::None;
    } else if (det == "restricted_constant") {
      m.deterministic = DeterministicTerm::RestrictedConstant;
    } else {
      throw DataError("VECM JSON: unknown deterministic term '" + det + "'");
    }
    m.n_obs = j.at("n_obs").get<std::size_t>();
    m.alpha = matrix_from_json(j.at("alpha"));
    m.beta = matrix_from_json(j.at("beta"));
    const auto rho = j.at("rho").get<std::vector<double>>();
    m.rho = Eigen::Map<const VectorXd>(rho.data(), static_cast<Eigen::Index>(rho.size()));
    for (const auto& g : j.at("gamma")) m.gamma.push_back(matrix_from_json(g));
    m.residual_cov = matrix_from_json(j.at("residual_cov"));
    const auto& d = j.at("diagnostics");
    m.diagnostics.eigenvalues = d.at("eigenvalues").get<std::vector<double>>();
    m.diagnostics.s00_condition = d.at("s00_condition").get<double>();
    m.diagnostics.s11_condition = d.at("s11_condition").get<double>();
    m.diagnostics.pi_singular_values = d.at("pi_singular_values").get<std::vector<double>>();
    m.diagnostics.pi_numerical_rank = d.at("pi_numerical_rank").get<int>();
    if (static_cast<int>(m.gamma.size()) != m.lag - 1) throw DataError("VECM JSON: gamma count does not match lag");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("VECM JSON: ") + e.what());
  }
}

}  // namespace volrisk::vecm
