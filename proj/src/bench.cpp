#include "volrisk/bench.hpp"

#include "volrisk/ingest.hpp"
#include "volrisk/numeric.hpp"
#include "volrisk/portfolio.hpp"
#include "volrisk/vecm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <tuple>

namespace volrisk::bench {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr EpochSeconds kSyntheticStart = 1577836800;  // 2020-01-01T00:00:00Z

// Independent stream per (portfolio, size, horizon) so results do not depend on loop order.
std::mt19937_64 substream(std::uint64_t seed, int id, int n, int h) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(id), static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(h)};
  return std::mt19937_64(seq);
}

// Column-wise rolling sample std; rows before the first full window are NaN.
MatrixXd rolling_vol_matrix(const MatrixXd& returns, int k) {
  MatrixXd out = MatrixXd::Constant(returns.rows(), returns.cols(), std::numeric_limits<double>::quiet_NaN());
  for (Eigen::Index c = 0; c < returns.cols(); ++c) {
    for (Eigen::Index end = k; end <= returns.rows(); ++end) {
      const auto window = returns.col(c).segment(end - k, k);
      const double m = window.mean();
      out(end - 1, c) = std::sqrt((window.array() - m).square().sum() / (k - 1));
    }
  }
  return out;
}

MatrixXd select_columns(const MatrixXd& m, Eigen::Index first_row, Eigen::Index rows, const std::vector<int>& cols) {
  MatrixXd out(rows, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = m.col(cols[j]).segment(first_row, rows);
  return out;
}

double round_to(double v, double unit) { return std::round(v / unit) * unit; }

struct Context {
  const ReturnPanel& panel;
  const BenchConfig& cfg;
  std::map<int, MatrixXd> vols_by_window;
};

BenchRecord evaluate_portfolio(Context& ctx, int id, int n_assets, int h) {
  const auto& cfg = ctx.cfg;
  const auto& returns = ctx.panel.returns;
  const int k = cfg.vol_window.value_or(h);
  auto [it, inserted] = ctx.vols_by_window.try_emplace(k);
  if (inserted) it->second = rolling_vol_matrix(returns, k);
  const MatrixXd& vols = it->second;

  auto rng = substream(cfg.seed, id, n_assets, h);
  BenchRecord rec;
  rec.portfolio_id = id;
  rec.n_assets = n_assets;
  rec.horizon = h;

  // Partial Fisher-Yates: assets without replacement.
  std::vector<int> pool(static_cast<std::size_t>(returns.cols()));
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < n_assets; ++i) {
    std::uniform_int_distribution<int> pick(i, static_cast<int>(pool.size()) - 1);
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
  }
  rec.assets.assign(pool.begin(), pool.begin() + n_assets);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < n_assets; ++i) {
    double w = 0.0;
    while (w <= 0.0) w = unit(rng);
    rec.weights.push_back(w);
  }
  portfolio::PortfolioSpec spec;
  for (int a : rec.assets) spec.asset_ids.push_back(ctx.panel.asset_ids[static_cast<std::size_t>(a)]);
  spec.weights = rec.weights;
  if (cfg.normalize_weights) spec = spec.normalized();
  const VectorXd w = spec.weight_vector();

  const int max_h = *std::max_element(cfg.horizons.begin(), cfg.horizons.end());
  const int W = cfg.estimation_window;
  const auto T = static_cast<std::size_t>(returns.rows());
  const std::size_t earliest = static_cast<std::size_t>(W + k - 1);
  if (cfg.mode == EvaluationMode::Fixed) {
    rec.origin = T - static_cast<std::size_t>(max_h);
  } else {
    std::uniform_int_distribution<std::size_t> when(earliest, T - static_cast<std::size_t>(h));
    rec.origin = when(rng);
  }
  const auto origin = static_cast<Eigen::Index>(rec.origin);

  const MatrixXd est_returns = select_columns(returns, origin - W, W, rec.assets);
  const auto corr = portfolio::sample_correlation(est_returns);
  rec.forecast_classical = portfolio::classical_vol(est_returns, spec, W);
  rec.trailing_average = portfolio::trailing_average_vol(select_columns(vols, origin - h, h, rec.assets), w, corr.values);

  const VectorXd realized_path = select_columns(returns, origin, h, rec.assets) * w;
  std::vector<double> rp(realized_path.data(), realized_path.data() + realized_path.size());
  rec.realized = numeric::sample_std(rp);

  // Log-vol window; rows with a nonpositive vol are excluded.
  const MatrixXd est_vols = select_columns(vols, origin - W, W, rec.assets);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index r = 0; r < est_vols.rows(); ++r) {
    if ((est_vols.row(r).array() > 0.0).all()) keep.push_back(r);
  }
  MatrixXd log_vols(static_cast<Eigen::Index>(keep.size()), n_assets);
  for (std::size_t r = 0; r < keep.size(); ++r) log_vols.row(static_cast<Eigen::Index>(r)) = est_vols.row(keep[r]).array().log();

  const double fallback = rec.trailing_average > 0.0 ? rec.trailing_average : rec.forecast_classical;
  try {
    vecm::VecmOptions opts;
    opts.rank = cfg.rank ? std::min(*cfg.rank, n_assets - 1) : n_assets - 1;
    opts.lag = cfg.vecm_lag;
    opts.max_lag = ctx.panel.frequency == Frequency::Minute ? 3 : 5;
    const auto model = vecm::fit_vecm(log_vols, opts);
    rec.vecm_lag = model.lag;
    const auto fc = vecm::forecast_logvol(model, log_vols, h);
    if (rec.trailing_average > 0.0) {
      const auto res = portfolio::vecm_portfolio_forecast(fc, w, corr, rec.trailing_average, cfg.guardrail_multiplier);
      rec.forecast_vecm_raw = res.raw_vol;
      rec.forecast_vecm = res.aggregate_vol;
      rec.guardrail_hit = res.guardrail_triggered;
      rec.unstable = res.unstable;
      rec.note = res.diagnostics;
    } else {
      const auto res = portfolio::vecm_portfolio_forecast(fc, w, corr, 1.0, std::numeric_limits<double>::infinity());
      rec.forecast_vecm_raw = rec.forecast_vecm = res.raw_vol;
      rec.unstable = res.unstable;
      rec.note = "zero trailing average; guardrail not applicable";
      if (rec.unstable) rec.forecast_vecm = fallback;
    }
  } catch (const std::exception& e) {
    rec.unstable = true;
    rec.guardrail_hit = true;
    rec.forecast_vecm_raw = std::numeric_limits<double>::quiet_NaN();
    rec.forecast_vecm = fallback;
    rec.note = std::string("VECM fit failed: ") + e.what();
  }

  if (rec.realized > 0.0) {
    rec.mape_vecm = 100.0 * std::abs(rec.forecast_vecm - rec.realized) / rec.realized;
    rec.mape_classical = 100.0 * std::abs(rec.forecast_classical - rec.realized) / rec.realized;
  } else {
    rec.valid = false;
    rec.mape_vecm = rec.mape_classical = std::numeric_limits<double>::quiet_NaN();
  }
  return rec;
}

}  // namespace

ReturnPanel make_panel(std::span<const ReturnSeries> series) {
  const auto aligned = ingest::align(series);
  ReturnPanel p;
  p.frequency = aligned.front().frequency;
  p.times = aligned.front().times;
  p.returns.resize(static_cast<Eigen::Index>(p.times.size()), static_cast<Eigen::Index>(aligned.size()));
  for (std::size_t c = 0; c < aligned.size(); ++c) {
    p.asset_ids.push_back(aligned[c].asset_id);
    for (std::size_t r = 0; r < p.times.size(); ++r) {
      p.returns(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = aligned[c].returns[r];
    }
  }
  return p;
}

void BenchConfig::validate() const {
  if (sizes.empty() || horizons.empty()) throw std::invalid_argument("bench: sizes and horizons must be non-empty");
  for (int n : sizes) {
    if (n < 2) throw std::invalid_argument("bench: portfolio size must be >= 2");
  }
  for (int h : horizons) {
    if (h < 2) throw std::invalid_argument("bench: horizons must be >= 2 (a realized std needs two returns)");
  }
  if (n_portfolios < 1) throw std::invalid_argument("bench: n_portfolios must be >= 1");
  const int max_h = *std::max_element(horizons.begin(), horizons.end());
  if (estimation_window <= max_h) throw std::invalid_argument("bench: estimation window must exceed the largest horizon");
  if (vol_window && *vol_window < 2) throw std::invalid_argument("bench: vol window must be >= 2");
  if (!(guardrail_multiplier > 0.0)) throw std::invalid_argument("bench: guardrail multiplier must be positive");
  if (rank && *rank < 1) throw std::invalid_argument("bench: rank must be >= 1");
}

BenchResult run_benchmark(const ReturnPanel& panel, const BenchConfig& cfg) {
  cfg.validate();
  const int max_n = *std::max_element(cfg.sizes.begin(), cfg.sizes.end());
  if (panel.returns.cols() < max_n) {
    throw DataError("bench: panel has " + std::to_string(panel.returns.cols()) + " assets, portfolios need " +
                    std::to_string(max_n));
  }
  const int max_h = *std::max_element(cfg.horizons.begin(), cfg.horizons.end());
  int max_k = cfg.vol_window.value_or(max_h);
  for (int h : cfg.horizons) max_k = std::max(max_k, cfg.vol_window.value_or(h));
  const Eigen::Index needed = cfg.estimation_window + max_k - 1 + max_h;
  if (panel.returns.rows() < needed) {
    throw DataError("bench: panel has " + std::to_string(panel.returns.rows()) + " rows, need at least " +
                    std::to_string(needed));
  }

  Context ctx{panel, cfg, {}};
  BenchResult out;
  for (int h : cfg.horizons) {
    for (int n : cfg.sizes) {
      for (int id = 0; id < cfg.n_portfolios; ++id) out.records.push_back(evaluate_portfolio(ctx, id, n, h));
    }
  }
  out.table = summarize(out.records);
  return out;
}

std::vector<BenchRow> summarize(std::span<const BenchRecord> records) {
  std::vector<BenchRow> rows;
  std::vector<double> v_sum, c_sum;
  auto find_row = [&](int h, int n) -> std::size_t {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].horizon == h && rows[i].n_assets == n) return i;
    }
    rows.push_back(BenchRow{h, n});
    v_sum.push_back(0.0);
    c_sum.push_back(0.0);
    return rows.size() - 1;
  };
  for (const auto& r : records) {
    const std::size_t i = find_row(r.horizon, r.n_assets);
    if (r.guardrail_hit) ++rows[i].guardrail_hits;
    if (!r.valid) continue;
    ++rows[i].n_portfolios;
    v_sum[i] += r.mape_vecm;
    c_sum[i] += r.mape_classical;
    if (round_to(r.mape_vecm, 1e-6) < round_to(r.mape_classical, 1e-6)) ++rows[i].wins;
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].n_portfolios == 0) continue;
    const double n = static_cast<double>(rows[i].n_portfolios);
    rows[i].v_hundredths = std::llround(100.0 * v_sum[i] / n);
    rows[i].c_hundredths = std::llround(100.0 * c_sum[i] / n);
  }
  return rows;
}

std::vector<CensusRow> guardrail_census(std::span<const BenchRecord> records) {
  std::vector<CensusRow> out;
  for (const auto& r : records) {
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const CensusRow& c) { return c.horizon == r.horizon && c.n_assets == r.n_assets; });
    if (it == out.end()) {
      out.push_back({r.horizon, r.n_assets, 0});
      it = out.end() - 1;
    }
    if (r.guardrail_hit) ++it->hits;
  }
  return out;
}

BoxStats box_stats(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("box_stats: empty group");
  std::vector<double> s(values.begin(), values.end());
  std::sort(s.begin(), s.end());
  BoxStats b;
  b.n = s.size();
  b.q1 = numeric::quantile_sorted(s, 0.25);
  b.median = numeric::quantile_sorted(s, 0.5);
  b.q3 = numeric::quantile_sorted(s, 0.75);
  const double iqr = b.q3 - b.q1;
  const double lo = b.q1 - 1.5 * iqr, hi = b.q3 + 1.5 * iqr;
  b.whisker_low = b.q1;
  b.whisker_high = b.q3;
  for (double v : s) {
    if (v < lo || v > hi) {
      b.outliers.push_back(v);
      continue;
    }
    b.whisker_low = std::min(b.whisker_low, v);
    b.whisker_high = std::max(b.whisker_high, v);
  }
  return b;
}

std::vector<BoxGroup> ape_boxplot_data(std::span<const BenchRecord> records) {
  struct Key {
    int h, n;
    bool operator<(const Key& o) const { return std::tie(h, n) < std::tie(o.h, o.n); }
  };
  std::vector<Key> order;
  std::map<Key, std::pair<std::vector<double>, std::vector<double>>> groups;
  for (const auto& r : records) {
    const Key key{r.horizon, r.n_assets};
    if (!groups.contains(key)) order.push_back(key);
    auto& g = groups[key];
    if (!r.valid) continue;
    g.first.push_back(r.mape_vecm);
    g.second.push_back(r.mape_classical);
  }
  std::vector<BoxGroup> out;
  for (const auto& key : order) {
    const auto& g = groups[key];
    if (g.first.empty()) continue;
    out.push_back({"VECM", key.n, key.h, box_stats(g.first)});
    out.push_back({"Classical", key.n, key.h, box_stats(g.second)});
  }
  return out;
}

void SyntheticSpec::validate() const {
  if (n < 2) throw std::invalid_argument("synthetic: n must be >= 2");
  const int r = rank.value_or(n - 1);
  if (r < 0 || r > n - 1) throw std::invalid_argument("synthetic: rank must lie in [0, n-1]");
  if (length < 2) throw std::invalid_argument("synthetic: length must be >= 2");
  if (burn_in < 0) throw std::invalid_argument("synthetic: burn_in must be >= 0");
  if (!(loading > 0.0 && loading < 2.0)) throw std::invalid_argument("synthetic: loading must lie in (0, 2)");
  if (!(logvol_noise >= 0.0) || !(base_vol > 0.0) || !(spread >= 0.0)) {
    throw std::invalid_argument("synthetic: noise, base vol and spread must be nonnegative (base vol positive)");
  }
  if (!(correlation >= 0.0 && correlation < 1.0)) throw std::invalid_argument("synthetic: correlation must lie in [0, 1)");
  if (quiet) {
    if (quiet->start + quiet->length > static_cast<std::size_t>(length)) {
      throw std::invalid_argument("synthetic: quiet regime extends past the panel");
    }
    if (quiet->n_assets < 1 || quiet->n_assets > n || !(quiet->scale > 0.0)) {
      throw std::invalid_argument("synthetic: invalid quiet regime");
    }
  }
}

SyntheticPanel generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  const int n = spec.n;
  const int r = spec.rank.value_or(n - 1);
  const int total = spec.burn_in + spec.length;
  std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  SyntheticPanel out;
  out.mu.resize(r);
  out.beta = MatrixXd::Zero(n, r);
  for (int i = 0; i < r; ++i) {
    out.mu(i) = spec.spread * unit(rng);
    out.beta(i, i) = 1.0;
    out.beta(n - 1, i) = -1.0;
  }
  const double base = std::log(spec.base_vol);
  MatrixXd h(total, n);
  for (int i = 0; i < n; ++i) h(0, i) = base + (i < r ? out.mu(i) : (i == n - 1 ? 0.0 : spec.spread * unit(rng)));
  for (int t = 1; t < total; ++t) {
    const double anchor = h(t - 1, n - 1);
    for (int i = 0; i < n; ++i) {
      const double prev = h(t - 1, i);
      const double pull = i < r ? -spec.loading * (prev - anchor - out.mu(i)) : 0.0;
      h(t, i) = prev + pull + spec.logvol_noise * gauss(rng);
    }
  }
  out.log_vols = h.bottomRows(spec.length);
  out.true_vols = out.log_vols.array().exp().matrix();
  if (spec.quiet) {
    out.true_vols.block(static_cast<Eigen::Index>(spec.quiet->start), 0, static_cast<Eigen::Index>(spec.quiet->length),
                        spec.quiet->n_assets) *= spec.quiet->scale;
  }

  auto& p = out.panel;
  p.frequency = spec.frequency;
  for (int i = 0; i < n; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "SYN%03d", i + 1);
    p.asset_ids.emplace_back(id);
  }
  const EpochSeconds step = spec.frequency == Frequency::Day ? 86400 : 60;
  p.returns.resize(spec.length, n);
  const double common = std::sqrt(spec.correlation), own = std::sqrt(1.0 - spec.correlation);
  for (int t = 0; t < spec.length; ++t) {
    p.times.push_back(kSyntheticStart + step * (t + 1));
    const double f = gauss(rng);
    for (int i = 0; i < n; ++i) p.returns(t, i) = out.true_vols(t, i) * (common * f + own * gauss(rng));
  }
  return out;
}

ReturnSeries synthetic_index(const ReturnPanel& panel, const std::string& id) {
  ReturnSeries s;
  s.asset_id = id;
  s.frequency = panel.frequency;
  s.times = panel.times;
  const VectorXd avg = panel.returns.rowwise().mean();
  s.returns.assign(avg.data(), avg.data() + avg.size());
  return s;
}

std::vector<PriceSeries> to_prices(const ReturnPanel& panel) {
  std::vector<PriceSeries> out;
  const EpochSeconds step = panel.times.size() > 1 ? panel.times[1] - panel.times[0] : 86400;
  for (Eigen::Index c = 0; c < panel.returns.cols(); ++c) {
    PriceSeries s;
    s.asset_id = panel.asset_ids[static_cast<std::size_t>(c)];
    s.frequency = panel.frequency;
    s.times.push_back(panel.times.front() - step);
    s.prices.push_back(100.0);
    double level = std::log(100.0);
    for (Eigen::Index t = 0; t < panel.returns.rows(); ++t) {
      level += panel.returns(t, c);
      s.times.push_back(panel.times[static_cast<std::size_t>(t)]);
      s.prices.push_back(std::exp(level));
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace volrisk::bench
