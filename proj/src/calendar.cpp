#include "dprisk/calendar.hpp"

#include "dprisk/errors.hpp"

#include <array>
#include <charconv>
#include <cstdio>

namespace dprisk {

namespace {

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

// Civil-calendar day algorithms (era-based, valid far beyond our data range).
std::int32_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2) / 5 +
                         static_cast<unsigned>(d) - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int32_t>(doe) - 719468;
}

void civil_from_days(std::int32_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int32_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int yr = static_cast<int>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = yr + (m <= 2);
}

int parse_uint(std::string_view text, const char* what) {
    int value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw SchemaError(std::string("invalid ") + what + " '" + std::string(text) + "'");
    }
    return value;
}

} // namespace

int days_in_month(int year, int month) {
    static constexpr std::array<int, 12> lengths = {31, 28, 31, 30, 31, 30,
                                                    31, 31, 30, 31, 30, 31};
    if (month < 1 || month > 12) {
        return 0;
    }
    if (month == 2 && is_leap(year)) {
        return 29;
    }
    return lengths[static_cast<std::size_t>(month - 1)];
}

bool is_valid_ymd(int year, int month, int day) {
    return year >= 1800 && year <= 2400 && month >= 1 && month <= 12 && day >= 1 &&
           day <= days_in_month(year, month);
}

Date Date::from_ymd(int year, int month, int day) {
    if (!is_valid_ymd(year, month, day)) {
        char buffer[48];
        std::snprintf(buffer, sizeof(buffer), "%04d-%02d-%02d", year, month, day);
        throw SchemaError(std::string("invalid calendar date '") + buffer + "'");
    }
    Date date;
    date.serial = days_from_civil(year, month, day);
    date.year = static_cast<std::int16_t>(year);
    date.month = static_cast<std::int8_t>(month);
    date.day = static_cast<std::int8_t>(day);
    return date;
}

Date Date::from_serial(std::int32_t serial) {
    int y = 0;
    int m = 0;
    int d = 0;
    civil_from_days(serial, y, m, d);
    Date date;
    date.serial = serial;
    date.year = static_cast<std::int16_t>(y);
    date.month = static_cast<std::int8_t>(m);
    date.day = static_cast<std::int8_t>(d);
    return date;
}

Date Date::parse(std::string_view iso) {
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') {
        throw SchemaError("invalid date '" + std::string(iso) + "' (expected YYYY-MM-DD)");
    }
    const int y = parse_uint(iso.substr(0, 4), "date year");
    const int m = parse_uint(iso.substr(5, 2), "date month");
    const int d = parse_uint(iso.substr(8, 2), "date day");
    return from_ymd(y, m, d);
}

std::string Date::to_string() const {
    char buffer[16];
    std::snprintf(buffer, sizeof(buffer), "%04d-%02d-%02d", static_cast<int>(year),
                  static_cast<int>(month), static_cast<int>(day));
    return buffer;
}

YearMonth YearMonth::of(int year, int month) {
    if (year < 1800 || year > 2400 || month < 1 || month > 12) {
        throw SchemaError("invalid year-month " + std::to_string(year) + "-" +
                          std::to_string(month));
    }
    YearMonth ym;
    ym.year = static_cast<std::int16_t>(year);
    ym.month = static_cast<std::int8_t>(month);
    return ym;
}

YearMonth YearMonth::parse(std::string_view text) {
    if (text.size() != 7 || text[4] != '-') {
        throw SchemaError("invalid year-month '" + std::string(text) + "' (expected YYYY-MM)");
    }
    const int y = parse_uint(text.substr(0, 4), "year");
    const int m = parse_uint(text.substr(5, 2), "month");
    return of(y, m);
}

std::string YearMonth::to_string() const {
    char buffer[12];
    std::snprintf(buffer, sizeof(buffer), "%04d-%02d", static_cast<int>(year),
                  static_cast<int>(month));
    return buffer;
}

} // namespace dprisk
