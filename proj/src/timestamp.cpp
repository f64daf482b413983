#include "mbo/timestamp.hpp"

#include <array>
#include <cstdio>

namespace mbo {
namespace {

// Howard Hinnant's civil-date algorithms; proleptic Gregorian calendar.
constexpr std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = static_cast<unsigned>((153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1);
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

constexpr std::array<int, 3> civil_from_days(std::int64_t z) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return {static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

bool parse_fixed_uint(std::string_view s, std::size_t pos, std::size_t len, std::int64_t& out) {
    out = 0;
    if (pos + len > s.size()) return false;
    for (std::size_t i = pos; i < pos + len; ++i) {
        char c = s[i];
        if (c < '0' || c > '9') return false;
        out = out * 10 + (c - '0');
    }
    return true;
}

}  // namespace

Timestamp Timestamp::from_civil(int year, int month, int day, int hour, int minute, int second,
                                std::int64_t nanos) {
    std::int64_t days = days_from_civil(year, month, day);
    std::int64_t secs = days * 86'400LL + hour * 3600LL + minute * 60LL + second;
    return from_ns(secs * 1'000'000'000LL + nanos);
}

bool Timestamp::parse(std::string_view text, Timestamp& out) {
    // Fixed layout: "YYYY-MM-DD HH:MM:SS.fffffffff" = 29 chars.
    if (text.size() != 29) return false;
    if (text[4] != '-' || text[7] != '-' || text[10] != ' ' || text[13] != ':' ||
        text[16] != ':' || text[19] != '.')
        return false;
    std::int64_t y, mo, d, h, mi, s, frac;
    if (!parse_fixed_uint(text, 0, 4, y) || !parse_fixed_uint(text, 5, 2, mo) ||
        !parse_fixed_uint(text, 8, 2, d) || !parse_fixed_uint(text, 11, 2, h) ||
        !parse_fixed_uint(text, 14, 2, mi) || !parse_fixed_uint(text, 17, 2, s) ||
        !parse_fixed_uint(text, 20, 9, frac))
        return false;
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || s > 60) return false;
    out = from_civil(static_cast<int>(y), static_cast<int>(mo), static_cast<int>(d),
                     static_cast<int>(h), static_cast<int>(mi), static_cast<int>(s), frac);
    return true;
}

std::string Timestamp::to_string() const {
    std::int64_t day = day_index();
    std::int64_t rem = ns_ - day * kNsPerDay;
    auto [y, m, d] = civil_from_days(day);
    std::int64_t secs = rem / 1'000'000'000LL;
    std::int64_t nanos = rem % 1'000'000'000LL;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d %02lld:%02lld:%02lld.%09lld", y, m, d,
                  static_cast<long long>(secs / 3600), static_cast<long long>(secs / 60 % 60),
                  static_cast<long long>(secs % 60), static_cast<long long>(nanos));
    return buf;
}

std::string Timestamp::date_string() const { return day_index_to_date(day_index()); }

std::string Timestamp::day_index_to_date(std::int32_t day_index) {
    auto [y, m, d] = civil_from_days(day_index);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", y, m, d);
    return buf;
}

}  // namespace mbo
