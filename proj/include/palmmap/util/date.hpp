#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace palmmap {

// Proleptic Gregorian calendar date. Arithmetic goes through a serial
// day number so date differences are exact across month/year boundaries.
struct Date {
    int year = 1970;
    int month = 1;
    int day = 1;

    auto operator<=>(const Date&) const = default;
};

// Days since 1970-01-01 (Howard Hinnant's civil-days algorithm).
inline int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<int64_t>(doe) - 719468;
}

inline Date civil_from_days(int64_t z) {
    z += 719468;
    const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int64_t y = static_cast<int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return Date{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

inline int64_t to_days(const Date& d) { return days_from_civil(d.year, d.month, d.day); }

inline bool is_valid_date(int y, int m, int d) {
    if (m < 1 || m > 12 || d < 1) return false;
    static const int md[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    int dim = md[m - 1];
    if (m == 2 && (y % 4 == 0 && (y % 100 != 0 || y % 400 == 0))) dim = 29;
    return d <= dim;
}

// Strict ISO-8601 calendar date, "YYYY-MM-DD".
inline Date parse_iso_date(const std::string& s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-')
        throw std::invalid_argument("bad ISO date '" + s + "'");
    for (int i : {0, 1, 2, 3, 5, 6, 8, 9})
        if (s[i] < '0' || s[i] > '9') throw std::invalid_argument("bad ISO date '" + s + "'");
    int y = std::stoi(s.substr(0, 4));
    int m = std::stoi(s.substr(5, 2));
    int d = std::stoi(s.substr(8, 2));
    if (!is_valid_date(y, m, d))
        throw std::invalid_argument("bad ISO date '" + s + "'");
    return Date{y, m, d};
}

inline std::string format_iso_date(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year, d.month, d.day);
    return buf;
}

// Months since year 0, for monthly-grid indexing.
inline int month_index(int year, int month) { return year * 12 + (month - 1); }

}  // namespace palmmap
