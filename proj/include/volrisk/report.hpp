#pragma once

#include "volrisk/arima.hpp"
#include "volrisk/bench.hpp"
#include "volrisk/linmod.hpp"
#include "volrisk/stattests.hpp"
#include "volrisk/types.hpp"
#include "volrisk/volcore.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

// CSV/JSON renderings of every table and series the CLI emits. Missing values are "NA".
namespace volrisk::report {

/// Fixed-point text; "NA" for non-finite values.
std::string fixed(double v, int decimals);

/// Tables 1-2: `model,statistic,<horizon labels>`, one row per statistic and model.
/// `rows` holds one comparison per (model, horizon); horizons keep first-seen order.
std::string naive_table_csv(std::span<const linmod::ModelComparison> rows);

/// Table 3: `horizon,stationary_pct,cointegrated_pct,n_tested,n_dropped`.
std::string tests_table_csv(std::span<const stattests::BatchSummary> rows);

/// Table 4.
std::string arima_table_csv(std::span<const arima::OrderCensus> rows);

/// Table 5: `horizon,N,V,C,delta,win_pct`.
std::string bench_table_csv(std::span<const bench::BenchRow> rows, Frequency freq);

/// Table 6: `horizon,N=<size>,...` with hit counts.
std::string guardrail_table_csv(std::span<const bench::CensusRow> rows, Frequency freq);

/// One line per portfolio, for auditing guardrail hits and errors.
std::string bench_records_csv(std::span<const bench::BenchRecord> records, Frequency freq);

std::string boxplot_json(std::span<const bench::BoxGroup> groups, Frequency freq);

/// `timestamp,ratio` with ISO-8601 UTC timestamps.
std::string ratio_series_csv(const RatioSeries& s);
std::string ratio_metadata_json(const RatioSeries& s, const std::string& generated_at);

std::string distribution_json(std::span<const std::pair<std::string, vol::DistDiagnostics>> by_horizon);

/// Writes the file, creating parent directories. Throws DataError when it cannot.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace volrisk::report
