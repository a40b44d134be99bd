#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace volrisk {

/// Sampling frequency of a series. Uniform within a series.
enum class Frequency { Minute, Day };

std::string to_string(Frequency f);
Frequency parse_frequency(std::string_view text);

/// Unit label used in table rows ("minutes" / "days").
std::string horizon_label(int periods, Frequency f);

/// Timestamps everywhere are UTC epoch seconds, strictly increasing.
using EpochSeconds = std::int64_t;

struct PriceSeries {
  std::string asset_id;
  Frequency frequency = Frequency::Day;
  std::vector<EpochSeconds> times;
  std::vector<double> prices;

  [[nodiscard]] std::size_t size() const noexcept { return prices.size(); }
};

struct ReturnSeries {
  std::string asset_id;
  Frequency frequency = Frequency::Day;
  std::vector<EpochSeconds> times;
  std::vector<double> returns;  // log-returns

  [[nodiscard]] std::size_t size() const noexcept { return returns.size(); }
};

/// Rolling realized volatility with a fixed window, per-period units.
struct VolSeries {
  std::string asset_id;
  Frequency frequency = Frequency::Day;
  int window = 0;
  std::vector<EpochSeconds> times;
  std::vector<double> sigma;

  [[nodiscard]] std::size_t size() const noexcept { return sigma.size(); }
};

enum class RatioKind { Hvr, Dvr };

struct RatioSeries {
  std::string asset_id;
  std::string benchmark_id;
  RatioKind kind = RatioKind::Hvr;
  Frequency frequency = Frequency::Day;
  int window = 0;
  std::vector<EpochSeconds> times;
  std::vector<double> ratios;
  std::size_t excluded = 0;  // points dropped because the benchmark vol was zero

  [[nodiscard]] std::size_t size() const noexcept { return ratios.size(); }
};

/// Malformed or missing input data / configuration.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An estimator failed to converge or produced an inadmissible result.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace volrisk
