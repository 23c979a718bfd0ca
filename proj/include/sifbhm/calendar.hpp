#pragma once

#include <cstdint>

namespace sifbhm {

/// Broken-down UTC time. `millisecond` carries the sub-second remainder.
struct UtcDateTime
{
    int year = 1970;
    int month = 1;
    int day = 1;
    int hour = 0;
    int minute = 0;
    int second = 0;
    int millisecond = 0;

    bool operator==(const UtcDateTime&) const = default;
};

/// Integer day key (days since 1970-01-01) of the UTC calendar date containing `epoch_s`.
std::int64_t utc_day_number(double epoch_s);

/// Epoch seconds of 00:00:00 UTC on 1 January of `year`.
double year_start_epoch(int year);

int utc_year(double epoch_s);

/// Fractional day-of-year in [0, 366): 0.0 is midnight starting 1 January.
double fractional_day_of_year(double epoch_s);

UtcDateTime to_utc(double epoch_s);

double from_utc(const UtcDateTime& dt);

} // namespace sifbhm
