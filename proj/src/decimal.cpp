#include "mbo/decimal.hpp"

#include <cmath>
#include <cstdlib>

namespace mbo {

Decimal Decimal::from_double(double v) {
    return from_raw(static_cast<std::int64_t>(std::llround(v * static_cast<double>(kScale))));
}

bool Decimal::parse(std::string_view text, Decimal& out) {
    if (text.empty()) return false;
    bool negative = false;
    std::size_t i = 0;
    if (text[0] == '-' || text[0] == '+') {
        negative = text[0] == '-';
        i = 1;
    }
    if (i >= text.size()) return false;

    std::int64_t units = 0;
    bool any_int_digit = false;
    for (; i < text.size() && text[i] != '.'; ++i) {
        char c = text[i];
        if (c < '0' || c > '9') return false;
        units = units * 10 + (c - '0');
        any_int_digit = true;
        if (units > (INT64_MAX / kScale)) return false;  // overflow guard
    }
    if (!any_int_digit) return false;

    std::int64_t frac = 0;
    if (i < text.size()) {  // at '.'
        ++i;
        if (i >= text.size()) return false;  // "123." is malformed
        int frac_digits = 0;
        for (; i < text.size(); ++i) {
            char c = text[i];
            if (c < '0' || c > '9') return false;
            if (frac_digits < 4) {
                frac = frac * 10 + (c - '0');
                ++frac_digits;
            } else if (c != '0') {
                return false;  // precision beyond 1e-4 would be silently lost
            }
        }
        while (frac_digits < 4) {
            frac *= 10;
            ++frac_digits;
        }
    }

    std::int64_t raw = units * kScale + frac;
    out = from_raw(negative ? -raw : raw);
    return true;
}

std::string Decimal::to_string(int min_frac_digits) const {
    std::int64_t raw = raw_;
    std::string sign;
    if (raw < 0) {
        sign = "-";
        raw = -raw;
    }
    std::int64_t units = raw / kScale;
    std::int64_t frac = raw % kScale;

    char frac_buf[5];
    frac_buf[0] = static_cast<char>('0' + frac / 1000);
    frac_buf[1] = static_cast<char>('0' + frac / 100 % 10);
    frac_buf[2] = static_cast<char>('0' + frac / 10 % 10);
    frac_buf[3] = static_cast<char>('0' + frac % 10);
    frac_buf[4] = '\0';

    int digits = 4;
    while (digits > min_frac_digits && frac_buf[digits - 1] == '0') --digits;

    std::string s = sign + std::to_string(units);
    if (digits > 0) {
        s += '.';
        s.append(frac_buf, static_cast<std::size_t>(digits));
    }
    return s;
}

}  // namespace mbo
