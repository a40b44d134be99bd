#pragma once

#include "volrisk/types.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace volrisk::vecm {

/// Natural logs of aligned vols; rows are time, columns assets.
struct LogVolPanel {
  std::vector<std::string> asset_ids;
  Frequency frequency = Frequency::Day;
  std::vector<EpochSeconds> times;
  Eigen::MatrixXd values;
  std::size_t excluded_rows = 0;  // common timestamps dropped for a nonpositive vol

  [[nodiscard]] int rows() const { return static_cast<int>(values.rows()); }
  [[nodiscard]] int dimension() const { return static_cast<int>(values.cols()); }
};

LogVolPanel build_panel(std::span<const VolSeries> vols);

enum class DeterministicTerm { None, RestrictedConstant };

std::string to_string(DeterministicTerm d);

struct VecmDiagnostics {
  std::vector<double> eigenvalues;       // all solutions of the eigenproblem, descending
  double s00_condition = 0.0;
  double s11_condition = 0.0;
  std::vector<double> pi_singular_values;  // descending
  int pi_numerical_rank = 0;               // singular values above 1e-8 x leading
};

/// dh_t = alpha (beta' h_{t-1} + rho) + sum_j gamma_j dh_{t-j} + e_t, where rho is
/// the restricted constant (zero without a deterministic term). beta's leading
/// rank x rank block is the identity.
struct VecmModel {
  int n = 0;
  int rank = 0;
  int lag = 2;  // levels-VAR order; lag - 1 short-run matrices
  DeterministicTerm deterministic = DeterministicTerm::RestrictedConstant;
  Eigen::MatrixXd alpha;  // n x rank
  Eigen::MatrixXd beta;   // n x rank
  Eigen::VectorXd rho;    // rank
  std::vector<Eigen::MatrixXd> gamma;
  Eigen::MatrixXd residual_cov;
  std::size_t n_obs = 0;
  VecmDiagnostics diagnostics;

  [[nodiscard]] Eigen::MatrixXd pi() const { return alpha * beta.transpose(); }
  /// Intercept of the difference equation, alpha * rho.
  [[nodiscard]] Eigen::VectorXd drift() const { return alpha * rho; }
};

struct VecmOptions {
  std::optional<int> lag;   // chosen by select_lag when absent
  std::optional<int> rank;  // n - 1 when absent
  DeterministicTerm deterministic = DeterministicTerm::RestrictedConstant;
  std::optional<int> max_lag;  // for automatic selection; 5 for daily, 3 for minute data
  double max_condition = 1e13;
};

/// Minimum panel rows for estimation: 50 + n * lag.
int min_rows(int n, int lag);

/// Johansen reduced-rank regression with the rank imposed.
VecmModel fit_vecm(const LogVolPanel& panel, const VecmOptions& opts = {});
VecmModel fit_vecm(const Eigen::MatrixXd& levels, const VecmOptions& opts = {});

/// Levels-VAR order in [2, max_p] minimising AIC on a common sample.
int select_lag(const Eigen::MatrixXd& levels, int max_p);
int select_lag(const LogVolPanel& panel, int max_p);

struct VolForecast {
  int horizon = 0;
  Eigen::MatrixXd log_levels;  // horizon x n
  Eigen::MatrixXd vols;        // exp(log_levels), optionally bias corrected
  bool unstable = false;       // non-finite or overflowing path
};

/// Deterministic recursion from the last `lag` rows of `history` (log levels).
VolForecast forecast_logvol(const VecmModel& m, const Eigen::MatrixXd& history, int h,
                            bool bias_correct = false);

/// h_t' b + constant for every row of the panel.
std::vector<double> error_correction_term(const Eigen::MatrixXd& levels, const Eigen::VectorXd& b,
                                          double constant = 0.0);

/// Levels-VAR coefficient matrices A_1..A_lag implied by the model.
std::vector<Eigen::MatrixXd> var_representation(const VecmModel& m);

std::string to_json(const VecmModel& m);
VecmModel vecm_from_json(const std::string& text);

}  // namespace volrisk::vecm
