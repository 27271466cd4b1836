#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace nilm {

// Civil <-> epoch conversions, UTC only. Days algorithm after Howard Hinnant.
std::int64_t days_from_civil(int y, int m, int d);
void civil_from_days(std::int64_t z, int& y, int& m, int& d);

// "YYYY-MM-DDTHH:MM:SSZ"
std::string format_iso8601(std::int64_t epoch_s);
std::int64_t parse_iso8601(std::string_view s);  // throws DataError

std::int64_t epoch_from_civil(int y, int mo, int d, int h, int mi, int s);

// Minute of day in [0, 1440), fractional; negative epochs handled.
double minute_of_day(std::int64_t epoch_s);

}  // namespace nilm
