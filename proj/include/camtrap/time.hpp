#pragma once

#include <cstdint>
#include <string>

namespace camtrap {

/// Seconds since the Unix epoch, UTC. Cameras emit 1 s resolution, so this
/// is the native timestamp type throughout.
using UnixSeconds = std::int64_t;

inline constexpr double kSecondsPerDay = 86400.0;

/// Parses "YYYY-MM-DDTHH:MM:SSZ" (the trailing 'Z' and the 'T' are required;
/// a single space instead of 'T' is accepted). Throws ValidationError on
/// malformed input.
UnixSeconds parse_utc(const std::string& text);

/// Parses "YYYY-MM-DD" as midnight UTC.
UnixSeconds parse_date(const std::string& text);

std::string format_utc(UnixSeconds t);
std::string format_date(UnixSeconds t);

/// Calendar month (1..12) of a UTC timestamp.
int month_of(UnixSeconds t);

/// Seconds since UTC midnight, in [0, 86400).
int seconds_of_day(UnixSeconds t);

/// Days from civil date to epoch day and back (proleptic Gregorian).
std::int64_t days_from_civil(int y, int m, int d);
void civil_from_days(std::int64_t z, int& y, int& m, int& d);

}  // namespace camtrap
