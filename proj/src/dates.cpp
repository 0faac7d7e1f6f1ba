#include "lprisk/dates.hpp"

#include <cctype>
#include <cstdio>

namespace lprisk {

namespace {

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

int to_int(std::string_view s) {
    int v = 0;
    for (char c : s) v = v * 10 + (c - '0');
    return v;
}

bool valid_civil(const CivilDate& cd) {
    if (cd.month < 1 || cd.month > 12 || cd.day < 1) return false;
    static const unsigned lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    unsigned max_day = lengths[cd.month - 1];
    const bool leap = (cd.year % 4 == 0 && cd.year % 100 != 0) || cd.year % 400 == 0;
    if (cd.month == 2 && leap) max_day = 29;
    return cd.day <= max_day;
}

}  // namespace

// Low-level civil <-> serial conversions (days_from_civil / civil_from_days,
// the well-known era-based formulation).
Day days_from_civil(const CivilDate& cd) {
    const int y = cd.year - (cd.month <= 2 ? 1 : 0);
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (cd.month + (cd.month > 2 ? -3 : 9)) + 2) / 5 + cd.day - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<int>(doe) - 719468;
}

CivilDate civil_from_days(Day d) {
    const int z = d + 719468;
    const int era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int y = static_cast<int>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned day = doy - (153 * mp + 2) / 5 + 1;
    const unsigned month = mp + (mp < 10 ? 3 : -9);
    return CivilDate{y + (month <= 2 ? 1 : 0), month, day};
}

std::optional<Day> parse_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    const auto ys = text.substr(0, 4);
    const auto ms = text.substr(5, 2);
    const auto ds = text.substr(8, 2);
    if (!all_digits(ys) || !all_digits(ms) || !all_digits(ds)) return std::nullopt;
    const CivilDate cd{to_int(ys), static_cast<unsigned>(to_int(ms)),
                       static_cast<unsigned>(to_int(ds))};
    if (!valid_civil(cd)) return std::nullopt;
    return days_from_civil(cd);
}

std::string format_date(Day d) {
    const CivilDate cd = civil_from_days(d);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", cd.year, cd.month, cd.day);
    return buf;
}

std::optional<Timestamp> parse_timestamp(std::string_view text) {
    if (text.size() != 20 || text[10] != 'T' || text[19] != 'Z') return std::nullopt;
    const auto date = parse_date(text.substr(0, 10));
    if (!date) return std::nullopt;
    if (text[13] != ':' || text[16] != ':') return std::nullopt;
    const auto hs = text.substr(11, 2);
    const auto ms = text.substr(14, 2);
    const auto ss = text.substr(17, 2);
    if (!all_digits(hs) || !all_digits(ms) || !all_digits(ss)) return std::nullopt;
    const int h = to_int(hs), m = to_int(ms), s = to_int(ss);
    if (h > 23 || m > 59 || s > 59) return std::nullopt;
    return Timestamp{static_cast<std::int64_t>(*date) * 86400 + h * 3600 + m * 60 + s};
}

std::string format_timestamp(Timestamp ts) {
    const Day d = ts.day();
    std::int64_t rem = ts.seconds - static_cast<std::int64_t>(d) * 86400;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%sT%02d:%02d:%02dZ", format_date(d).c_str(),
                  static_cast<int>(rem / 3600), static_cast<int>((rem / 60) % 60),
                  static_cast<int>(rem % 60));
    return buf;
}

}  // namespace lprisk
