#include "volrisk/types.hpp"

namespace volrisk {

std::string to_string(Frequency f) { return f == Frequency::Minute ? "minute" : "day"; }

Frequency parse_frequency(std::string_view text) {
  if (text == "minute" || text == "min" || text == "intraday") return Frequency::Minute;
  if (text == "day" || text == "daily") return Frequency::Day;
  throw DataError("unknown frequency '" + std::string(text) + "' (expected minute|day)");
}

std::string horizon_label(int periods, Frequency f) {
  return std::to_string(periods) + (f == Frequency::Minute ? " minutes" : " days");
}

}  // namespace volrisk
