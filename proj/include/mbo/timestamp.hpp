#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace mbo {

// Wall-clock instant with nanosecond resolution, stored as ns since the
// Unix epoch. Feed timestamps are civil (no timezone), formatted as
// "YYYY-MM-DD HH:MM:SS.fffffffff" with exactly nine fractional digits.
class Timestamp {
public:
    constexpr Timestamp() = default;
    static constexpr Timestamp from_ns(std::int64_t ns) {
        Timestamp t;
        t.ns_ = ns;
        return t;
    }
    static Timestamp from_civil(int year, int month, int day, int hour, int minute, int second,
                                std::int64_t nanos);

    static bool parse(std::string_view text, Timestamp& out);
    std::string to_string() const;

    constexpr std::int64_t ns() const { return ns_; }
    // Calendar day as days since epoch; the trading-date key.
    constexpr std::int32_t day_index() const {
        std::int64_t d = ns_ / kNsPerDay;
        if (ns_ < 0 && ns_ % kNsPerDay != 0) --d;
        return static_cast<std::int32_t>(d);
    }
    std::int64_t ns_since_midnight() const { return ns_ - static_cast<std::int64_t>(day_index()) * kNsPerDay; }
    std::string date_string() const;  // "YYYY-MM-DD"

    static std::string day_index_to_date(std::int32_t day_index);

    friend constexpr auto operator<=>(Timestamp a, Timestamp b) = default;
    friend constexpr Timestamp operator+(Timestamp t, std::int64_t ns) {
        return from_ns(t.ns_ + ns);
    }

    static constexpr std::int64_t kNsPerDay = 86'400LL * 1'000'000'000LL;

private:
    std::int64_t ns_ = 0;
};

}  // namespace mbo
