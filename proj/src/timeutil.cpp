#include "nilm/timeutil.hpp"

#include <cstdio>

#include "nilm/errors.hpp"

namespace nilm {

std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y = static_cast<int>(yy + (m <= 2));
}

std::int64_t epoch_from_civil(int y, int mo, int d, int h, int mi, int s) {
  return days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + s;
}

namespace {
std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}
}  // namespace

std::string format_iso8601(std::int64_t epoch_s) {
  const std::int64_t days = floor_div(epoch_s, 86400);
  const std::int64_t sod = epoch_s - days * 86400;
  int y, m, d;
  civil_from_days(days, y, m, d);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", y, m, d,
                static_cast<int>(sod / 3600), static_cast<int>((sod / 60) % 60),
                static_cast<int>(sod % 60));
  return buf;
}

std::int64_t parse_iso8601(std::string_view s) {
  int y, mo, d, h, mi, sec;
  char tz = 0;
  std::string tmp(s);
  const int n = std::sscanf(tmp.c_str(), "%d-%d-%dT%d:%d:%d%c", &y, &mo, &d,
                            &h, &mi, &sec, &tz);
  if (n < 6 || (n == 7 && tz != 'Z'))
    throw DataError("invalid ISO-8601 timestamp: " + tmp);
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 ||
      mi > 59 || sec < 0 || sec > 59)
    throw DataError("out-of-range ISO-8601 timestamp: " + tmp);
  // reject dates like Feb 29 in a common year: the civil conversion is a
  // bijection only on real dates, so a round trip exposes impossible ones
  int ry, rm, rd;
  civil_from_days(days_from_civil(y, mo, d), ry, rm, rd);
  if (ry != y || rm != mo || rd != d)
    throw DataError("impossible calendar date: " + tmp);
  return epoch_from_civil(y, mo, d, h, mi, sec);
}

double minute_of_day(std::int64_t epoch_s) {
  const std::int64_t days = floor_div(epoch_s, 86400);
  return static_cast<double>(epoch_s - days * 86400) / 60.0;
}

}  // namespace nilm
