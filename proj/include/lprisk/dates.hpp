#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace lprisk {

// UTC calendar day, counted from 1970-01-01.
using Day = std::int32_t;

struct CivilDate {
    int year;
    unsigned month;  // 1..12
    unsigned day;    // 1..31
};

Day days_from_civil(const CivilDate& cd);
CivilDate civil_from_days(Day d);

// "YYYY-MM-DD"
std::optional<Day> parse_date(std::string_view text);
std::string format_date(Day d);

// Seconds since the epoch, UTC.
struct Timestamp {
    std::int64_t seconds = 0;

    Day day() const {
        std::int64_t d = seconds / 86400;
        if (seconds < 0 && seconds % 86400 != 0) --d;
        return static_cast<Day>(d);
    }

    auto operator<=>(const Timestamp&) const = default;
};

// Strict "YYYY-MM-DDTHH:MM:SSZ" only; anything else is rejected so malformed
// rows surface as diagnostics instead of silently shifting days.
std::optional<Timestamp> parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp ts);

}  // namespace lprisk
