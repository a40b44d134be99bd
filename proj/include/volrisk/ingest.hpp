#pragma once

#include "volrisk/types.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace volrisk::ingest {

enum class TimestampFormat { Iso8601, EpochSeconds };

/// Column mapping for a price CSV. Loaded from a key=value file with keys
/// `timestamp_col`, `price_col`, `timestamp_format` (iso8601|epoch) and optionally
/// `frequency` (minute|day). Without `frequency` it is inferred from the timestamps.
struct CsvSchema {
  std::string timestamp_col = "timestamp";
  std::string price_col = "price";
  TimestampFormat timestamp_format = TimestampFormat::Iso8601;
  std::optional<Frequency> frequency;
};

/// Parses `key=value` lines. Blank lines and lines starting with '#' are skipped;
/// whitespace around keys and values is trimmed. Throws DataError on a line with no '='.
std::map<std::string, std::string> parse_key_value(std::istream& in);
std::map<std::string, std::string> load_key_value(const std::filesystem::path& path);

CsvSchema schema_from_config(const std::map<std::string, std::string>& cfg);

/// Parses an ISO-8601 date or date-time ("2024-01-02", "2024-01-02T09:30:00Z",
/// "2024-01-02 09:30:00+01:00", fractional seconds ignored) or epoch seconds,
/// normalised to UTC epoch seconds. Throws DataError when unparseable.
EpochSeconds parse_timestamp(std::string_view text, TimestampFormat format);
std::string format_iso8601(EpochSeconds t);

struct RejectedRow {
  std::size_t line = 0;  // 1-based, header is line 1
  std::string reason;
};

struct LoadResult {
  PriceSeries series;
  std::vector<RejectedRow> rejected;
};

/// Reads a headered CSV. Rows with an unparseable timestamp or a non-positive /
/// non-numeric price are rejected with a diagnostic and never abort the load.
/// Duplicate timestamps are an error (DataError naming the timestamp).
LoadResult parse_csv(std::istream& in, const CsvSchema& schema, std::string asset_id);
LoadResult load_csv(const std::filesystem::path& path, const CsvSchema& schema);

struct ReturnOptions {
  /// For minute data, drop the return between two observations further apart
  /// than `session_gap_seconds` (overnight / weekend gaps).
  bool drop_cross_session = true;
  std::int64_t session_gap_seconds = 4 * 3600;
};

/// r_t = ln(p_t / p_{t-1}), timestamped at t.
ReturnSeries to_log_returns(const PriceSeries& prices, const ReturnOptions& opts = {});

/// Restricts every series to the intersection of their timestamps, keeping input order.
std::vector<ReturnSeries> align(std::span<const ReturnSeries> series);

}  // namespace volrisk::ingest
