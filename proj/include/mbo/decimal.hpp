#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace mbo {

// Fixed-point decimal with 4 fractional digits, stored as a scaled int64.
// Prices and sizes in the feed are written with at most 4 decimal places,
// so every representable value round-trips through text exactly. All level
// keys and equality checks run on the raw integer.
class Decimal {
public:
    static constexpr std::int64_t kScale = 10'000;

    constexpr Decimal() = default;
    static constexpr Decimal from_raw(std::int64_t raw) {
        Decimal d;
        d.raw_ = raw;
        return d;
    }
    static constexpr Decimal from_int(std::int64_t units) { return from_raw(units * kScale); }
    static Decimal from_double(double v);  // rounds to nearest representable

    // Parses "123", "68.54", "-0.25". Digits past the 4th fractional place
    // must be zero. Returns false on any other input.
    static bool parse(std::string_view text, Decimal& out);

    constexpr std::int64_t raw() const { return raw_; }
    double to_double() const { return static_cast<double>(raw_) * 1e-4; }

    // min_frac_digits=0 prints "68.54"/"70"; min_frac_digits=1 prints
    // "8334.0" style sizes, matching the feed's canonical form.
    std::string to_string(int min_frac_digits = 0) const;

    constexpr bool is_multiple_of(Decimal tick) const {
        return tick.raw_ != 0 && raw_ % tick.raw_ == 0;
    }
    constexpr std::int64_t div_ticks(Decimal tick) const { return raw_ / tick.raw_; }

    friend constexpr Decimal operator+(Decimal a, Decimal b) { return from_raw(a.raw_ + b.raw_); }
    friend constexpr Decimal operator-(Decimal a, Decimal b) { return from_raw(a.raw_ - b.raw_); }
    friend constexpr auto operator<=>(Decimal a, Decimal b) = default;

private:
    std::int64_t raw_ = 0;
};

}  // namespace mbo
