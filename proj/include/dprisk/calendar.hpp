#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace dprisk {

/// Gregorian calendar date carrying a day serial (days since 1970-01-01)
/// so interval arithmetic is plain integer arithmetic.
struct Date {
    std::int32_t serial = 0;
    std::int16_t year = 0;
    std::int8_t month = 0;
    std::int8_t day = 0;

    static Date from_ymd(int year, int month, int day);
    static Date from_serial(std::int32_t serial);
    /// Parses "YYYY-MM-DD". Throws SchemaError on malformed or invalid dates.
    static Date parse(std::string_view iso);

    std::string to_string() const;

    friend bool operator==(const Date& a, const Date& b) { return a.serial == b.serial; }
    friend auto operator<=>(const Date& a, const Date& b) { return a.serial <=> b.serial; }
};

/// Inclusive day count, both endpoints counted.
inline int inclusive_days(const Date& start, const Date& end) {
    return static_cast<int>(end.serial - start.serial) + 1;
}

/// Calendar month, as used for pension payment periods.
struct YearMonth {
    std::int16_t year = 0;
    std::int8_t month = 0;

    static YearMonth of(int year, int month);
    /// Parses "YYYY-MM". Throws SchemaError on malformed input.
    static YearMonth parse(std::string_view text);

    /// Months since year 0, for ordering and span arithmetic.
    int index() const { return static_cast<int>(year) * 12 + (month - 1); }

    std::string to_string() const;

    friend bool operator==(const YearMonth& a, const YearMonth& b) {
        return a.year == b.year && a.month == b.month;
    }
    friend auto operator<=>(const YearMonth& a, const YearMonth& b) {
        return a.index() <=> b.index();
    }
};

bool is_valid_ymd(int year, int month, int day);
int days_in_month(int year, int month);

} // namespace dprisk
