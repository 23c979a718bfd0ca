#include "sifbhm/calendar.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace sifbhm {

namespace {

constexpr double kSecondsPerDay = 86400.0;

std::chrono::year_month_day civil_from_day_number(std::int64_t days)
{
    return std::chrono::year_month_day{std::chrono::sys_days{std::chrono::days{days}}};
}

void require_finite(double epoch_s)
{
    if (!std::isfinite(epoch_s)) {
        throw std::invalid_argument("epoch time must be finite");
    }
}

} // namespace

std::int64_t utc_day_number(double epoch_s)
{
    require_finite(epoch_s);
    return static_cast<std::int64_t>(std::floor(epoch_s / kSecondsPerDay));
}

double year_start_epoch(int year)
{
    using namespace std::chrono;
    const sys_days jan1 = std::chrono::year{year} / January / 1;
    return static_cast<double>(jan1.time_since_epoch().count()) * kSecondsPerDay;
}

int utc_year(double epoch_s)
{
    return static_cast<int>(civil_from_day_number(utc_day_number(epoch_s)).year());
}

double fractional_day_of_year(double epoch_s)
{
    return (epoch_s - year_start_epoch(utc_year(epoch_s))) / kSecondsPerDay;
}

UtcDateTime to_utc(double epoch_s)
{
    const std::int64_t day = utc_day_number(epoch_s);
    const auto ymd = civil_from_day_number(day);

    const double seconds_of_day = epoch_s - static_cast<double>(day) * kSecondsPerDay;
    auto total_ms = static_cast<std::int64_t>(std::floor(seconds_of_day * 1000.0 + 1e-6));
    if (total_ms >= 86'400'000) {
        total_ms = 86'399'999;
    }

    UtcDateTime out;
    out.year = static_cast<int>(ymd.year());
    out.month = static_cast<int>(static_cast<unsigned>(ymd.month()));
    out.day = static_cast<int>(static_cast<unsigned>(ymd.day()));
    out.hour = static_cast<int>(total_ms / 3'600'000);
    out.minute = static_cast<int>((total_ms / 60'000) % 60);
    out.second = static_cast<int>((total_ms / 1000) % 60);
    out.millisecond = static_cast<int>(total_ms % 1000);
    return out;
}

double from_utc(const UtcDateTime& dt)
{
    using namespace std::chrono;
    const year_month_day ymd{std::chrono::year{dt.year}, std::chrono::month{static_cast<unsigned>(dt.month)},
                             std::chrono::day{static_cast<unsigned>(dt.day)}};
    if (!ymd.ok()) {
        throw std::invalid_argument("invalid calendar date");
    }
    const double day = static_cast<double>(sys_days{ymd}.time_since_epoch().count());
    return day * kSecondsPerDay + dt.hour * 3600.0 + dt.minute * 60.0 + dt.second + dt.millisecond / 1000.0;
}

} // namespace sifbhm
