#include "camtrap/time.hpp"

#include <cstdio>

#include "camtrap/error.hpp"

namespace camtrap {

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

namespace {

bool valid_ymd(int y, int m, int d) {
  static const int mdays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (y < 1000 || y > 9999 || m < 1 || m > 12 || d < 1) return false;
  int dm = mdays[m - 1];
  if (m == 2 && ((y % 4 == 0 && y % 100 != 0) || y % 400 == 0)) dm = 29;
  return d <= dm;
}

}  // namespace

UnixSeconds parse_utc(const std::string& text) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  char sep = 0, tail = 0;
  int n = std::sscanf(text.c_str(), "%4d-%2d-%2d%c%2d:%2d:%2d%c", &y, &mo, &d,
                      &sep, &h, &mi, &s, &tail);
  if (n != 8 || (sep != 'T' && sep != ' ') || tail != 'Z' || !valid_ymd(y, mo, d) ||
      h < 0 || h > 23 || mi < 0 || mi > 59 || s < 0 || s > 60) {
    throw ValidationError("unparseable timestamp: '" + text +
                          "' (expected YYYY-MM-DDTHH:MM:SSZ)");
  }
  return days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + s;
}

UnixSeconds parse_date(const std::string& text) {
  int y = 0, mo = 0, d = 0;
  char tail = 0;
  int n = std::sscanf(text.c_str(), "%4d-%2d-%2d%c", &y, &mo, &d, &tail);
  if (n != 3 || !valid_ymd(y, mo, d)) {
    throw ValidationError("unparseable date: '" + text + "' (expected YYYY-MM-DD)");
  }
  return days_from_civil(y, mo, d) * 86400;
}

std::string format_utc(UnixSeconds t) {
  std::int64_t day = t / 86400;
  std::int64_t sod = t % 86400;
  if (sod < 0) {
    sod += 86400;
    --day;
  }
  int y, m, d;
  civil_from_days(day, y, m, d);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", y, m, d,
                static_cast<int>(sod / 3600), static_cast<int>(sod / 60 % 60),
                static_cast<int>(sod % 60));
  return buf;
}

std::string format_date(UnixSeconds t) {
  std::int64_t day = t / 86400;
  if (t % 86400 < 0) --day;
  int y, m, d;
  civil_from_days(day, y, m, d);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
  return buf;
}

int month_of(UnixSeconds t) {
  std::int64_t day = t / 86400;
  if (t % 86400 < 0) --day;
  int y, m, d;
  civil_from_days(day, y, m, d);
  return m;
}

int seconds_of_day(UnixSeconds t) {
  std::int64_t sod = t % 86400;
  if (sod < 0) sod += 86400;
  return static_cast<int>(sod);
}

}  // namespace camtrap
