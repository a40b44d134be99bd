#include "volrisk/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace volrisk::ingest {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == ',' && !quoted) {
      fields.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.emplace_back(trim(cur));
  return fields;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

bool parse_fixed_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > s.size()) return false;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  return parse_number(s.substr(pos, len), out);
}

[[noreturn]] void bad_timestamp(std::string_view text) {
  throw DataError("unparseable timestamp '" + std::string(text) + "'");
}

EpochSeconds parse_iso8601(std::string_view text) {
  const std::string_view s = trim(text);
  int y = 0, mo = 0, d = 0;
  if (!parse_fixed_int(s, 0, 4, y) || s.size() < 10 || s[4] != '-' || !parse_fixed_int(s, 5, 2, mo) ||
      s[7] != '-' || !parse_fixed_int(s, 8, 2, d)) {
    bad_timestamp(text);
  }
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) bad_timestamp(text);
  EpochSeconds secs = static_cast<EpochSeconds>(sys_days{ymd}.time_since_epoch().count()) * 86400;

  std::size_t pos = 10;
  if (pos == s.size()) return secs;
  if (s[pos] != 'T' && s[pos] != ' ') bad_timestamp(text);
  ++pos;
  int hh = 0, mm = 0, ss = 0;
  if (!parse_fixed_int(s, pos, 2, hh) || pos + 2 >= s.size() || s[pos + 2] != ':' ||
      !parse_fixed_int(s, pos + 3, 2, mm)) {
    bad_timestamp(text);
  }
  pos += 5;
  if (pos < s.size() && s[pos] == ':') {
    if (!parse_fixed_int(s, pos + 1, 2, ss)) bad_timestamp(text);
    pos += 3;
    if (pos < s.size() && (s[pos] == '.' || s[pos] == ',')) {
      ++pos;
      while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
    }
  }
  if (hh > 23 || mm > 59 || ss > 60) bad_timestamp(text);
  secs += hh * 3600 + mm * 60 + ss;

  if (pos == s.size()) return secs;
  if (s[pos] == 'Z' && pos + 1 == s.size()) return secs;
  if (s[pos] == '+' || s[pos] == '-') {
    const int sign = s[pos] == '+' ? 1 : -1;
    int oh = 0, om = 0;
    if (!parse_fixed_int(s, pos + 1, 2, oh)) bad_timestamp(text);
    std::size_t mpos = pos + 3;
    if (mpos < s.size() && s[mpos] == ':') ++mpos;
    if (mpos < s.size() && (!parse_fixed_int(s, mpos, 2, om) || mpos + 2 != s.size())) bad_timestamp(text);
    if (mpos == s.size() && mpos != pos + 3) bad_timestamp(text);
    return secs - sign * (oh * 3600 + om * 60);
  }
  bad_timestamp(text);
}

Frequency infer_frequency(const std::vector<EpochSeconds>& times) {
  if (times.size() < 2) return Frequency::Day;
  std::vector<EpochSeconds> gaps(times.size() - 1);
  for (std::size_t i = 1; i < times.size(); ++i) gaps[i - 1] = times[i] - times[i - 1];
  std::nth_element(gaps.begin(), gaps.begin() + static_cast<std::ptrdiff_t>(gaps.size() / 2), gaps.end());
  return gaps[gaps.size() / 2] >= 12 * 3600 ? Frequency::Day : Frequency::Minute;
}

}  // namespace

std::map<std::string, std::string> parse_key_value(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) {
      throw DataError("config line " + std::to_string(lineno) + " is not key=value: '" + std::string(t) + "'");
    }
    out[std::string(trim(t.substr(0, eq)))] = std::string(trim(t.substr(eq + 1)));
  }
  return out;
}

std::map<std::string, std::string> load_key_value(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file " + path.string());
  return parse_key_value(in);
}

CsvSchema schema_from_config(const std::map<std::string, std::string>& cfg) {
  CsvSchema schema;
  if (auto it = cfg.find("timestamp_col"); it != cfg.end()) schema.timestamp_col = it->second;
  if (auto it = cfg.find("price_col"); it != cfg.end()) schema.price_col = it->second;
  if (auto it = cfg.find("timestamp_format"); it != cfg.end()) {
    if (it->second == "iso8601" || it->second == "iso") {
      schema.timestamp_format = TimestampFormat::Iso8601;
    } else if (it->second == "epoch" || it->second == "epoch_seconds") {
      schema.timestamp_format = TimestampFormat::EpochSeconds;
    } else {
      throw DataError("unknown timestamp_format '" + it->second + "' (expected iso8601|epoch)");
    }
  }
  if (auto it = cfg.find("frequency"); it != cfg.end()) schema.frequency = parse_frequency(it->second);
  return schema;
}

EpochSeconds parse_timestamp(std::string_view text, TimestampFormat format) {
  if (format == TimestampFormat::Iso8601) return parse_iso8601(text);
  EpochSeconds v = 0;
  if (parse_number(text, v)) return v;
  double dv = 0.0;
  if (parse_number(text, dv) && std::isfinite(dv)) return static_cast<EpochSeconds>(std::floor(dv));
  bad_timestamp(text);
}

std::string format_iso8601(EpochSeconds t) {
  using namespace std::chrono;
  const auto days_since = static_cast<int>(t >= 0 ? t / 86400 : (t - 86399) / 86400);
  const year_month_day ymd{sys_days{days{days_since}}};
  const EpochSeconds rem = t - static_cast<EpochSeconds>(days_since) * 86400;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(rem / 3600), static_cast<int>(rem / 60 % 60), static_cast<int>(rem % 60));
  return buf;
}

LoadResult parse_csv(std::istream& in, const CsvSchema& schema, std::string asset_id) {
  LoadResult out;
  out.series.asset_id = std::move(asset_id);

  std::string line;
  if (!std::getline(in, line)) throw DataError("CSV for '" + out.series.asset_id + "' has no header row");
  const auto header = split_csv_line(line);
  auto column = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError("CSV header lacks column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t ts_col = column(schema.timestamp_col);
  const std::size_t px_col = column(schema.price_col);

  std::vector<std::pair<EpochSeconds, double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() <= std::max(ts_col, px_col)) {
      out.rejected.push_back({lineno, "too few fields"});
      continue;
    }
    EpochSeconds t = 0;
    try {
      t = parse_timestamp(fields[ts_col], schema.timestamp_format);
    } catch (const DataError& e) {
      out.rejected.push_back({lineno, e.what()});
      continue;
    }
    double price = 0.0;
    if (!parse_number(fields[px_col], price) || !std::isfinite(price)) {
      out.rejected.push_back({lineno, "non-numeric price '" + fields[px_col] + "'"});
      continue;
    }
    if (price <= 0.0) {
      out.rejected.push_back({lineno, "non-positive price " + fields[px_col]});
      continue;
    }
    rows.emplace_back(t, price);
  }

  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].first == rows[i - 1].first) {
      throw DataError("duplicate timestamp " + format_iso8601(rows[i].first) + " in '" +
                      out.series.asset_id + "'");
    }
  }
  out.series.times.reserve(rows.size());
  out.series.prices.reserve(rows.size());
  for (const auto& [t, p] : rows) {
    out.series.times.push_back(t);
    out.series.prices.push_back(p);
  }
  out.series.frequency = schema.frequency.value_or(infer_frequency(out.series.times));
  return out;
}

LoadResult load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open CSV file " + path.string());
  return parse_csv(in, schema, path.stem().string());
}

ReturnSeries to_log_returns(const PriceSeries& prices, const ReturnOptions& opts) {
  if (prices.size() < 2) {
    throw std::invalid_argument("log returns need at least 2 prices (got " + std::to_string(prices.size()) + ")");
  }
  ReturnSeries out;
  out.asset_id = prices.asset_id;
  out.frequency = prices.frequency;
  out.times.reserve(prices.size() - 1);
  out.returns.reserve(prices.size() - 1);
  const bool gap_check = opts.drop_cross_session && prices.frequency == Frequency::Minute;
  for (std::size_t i = 1; i < prices.size(); ++i) {
    if (gap_check && prices.times[i] - prices.times[i - 1] > opts.session_gap_seconds) continue;
    out.times.push_back(prices.times[i]);
    out.returns.push_back(std::log(prices.prices[i] / prices.prices[i - 1]));
  }
  return out;
}

std::vector<ReturnSeries> align(std::span<const ReturnSeries> series) {
  if (series.size() < 2) throw std::invalid_argument("align needs at least 2 series");
  for (const auto& s : series) {
    if (s.frequency != series.front().frequency) {
      throw DataError("cannot align mixed frequencies ('" + series.front().asset_id + "' is " +
                      to_string(series.front().frequency) + ", '" + s.asset_id + "' is " +
                      to_string(s.frequency) + ")");
    }
  }
  std::vector<EpochSeconds> common = series.front().times;
  for (std::size_t k = 1; k < series.size(); ++k) {
    std::vector<EpochSeconds> next;
    std::set_intersection(common.begin(), common.end(), series[k].times.begin(), series[k].times.end(),
                          std::back_inserter(next));
    common = std::move(next);
  }
  if (common.empty()) throw DataError("aligned panel has no common timestamps");

  std::vector<ReturnSeries> out;
  out.reserve(series.size());
  for (const auto& s : series) {
    ReturnSeries a;
    a.asset_id = s.asset_id;
    a.frequency = s.frequency;
    a.times = common;
    a.returns.reserve(common.size());
    std::size_t j = 0;
    for (EpochSeconds t : common) {
      while (s.times[j] < t) ++j;
      a.returns.push_back(s.returns[j]);
    }
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace volrisk::ingest
