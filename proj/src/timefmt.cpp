#include "pharmaharvest/timefmt.hpp"

#include "pharmaharvest/errors.hpp"

#include <cstdio>
#include <cstdlib>

namespace pharmaharvest {
namespace {

struct Civil {
    long long year;
    unsigned month;
    unsigned day;
};

// Howard Hinnant's days_from_civil / civil_from_days.
long long days_from_civil(long long y, unsigned m, unsigned d) {
    y -= m <= 2;
    const long long era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long long>(doe) - 719468;
}

Civil civil_from_days(long long z) {
    z += 719468;
    const long long era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const long long y = static_cast<long long>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp < 10 ? mp + 3 : mp - 9;
    return {y + (m <= 2), m, d};
}

struct Broken {
    Civil date;
    int hour, minute, second, millis;
};

Broken split(Timestamp t) {
    const long long ms = t.time_since_epoch().count();
    long long days = ms / 86'400'000;
    long long rem = ms % 86'400'000;
    if (rem < 0) {
        rem += 86'400'000;
        --days;
    }
    Broken b{};
    b.date = civil_from_days(days);
    b.hour = static_cast<int>(rem / 3'600'000);
    b.minute = static_cast<int>(rem / 60'000 % 60);
    b.second = static_cast<int>(rem / 1000 % 60);
    b.millis = static_cast<int>(rem % 1000);
    return b;
}

int digits(std::string_view s, std::size_t pos, std::size_t n) {
    if (pos + n > s.size()) throw ParseError("timestamp too short: " + std::string(s));
    int v = 0;
    for (std::size_t i = pos; i < pos + n; ++i) {
        if (s[i] < '0' || s[i] > '9') throw ParseError("bad digit in timestamp: " + std::string(s));
        v = v * 10 + (s[i] - '0');
    }
    return v;
}

void expect(std::string_view s, std::size_t pos, char c) {
    if (pos >= s.size() || (s[pos] != c && !(c == 'T' && (s[pos] == 't' || s[pos] == ' '))))
        throw ParseError("malformed timestamp: " + std::string(s));
}

}  // namespace

std::string format_rfc3339(Timestamp t) {
    const Broken b = split(t);
    char buf[48];
    if (b.millis != 0) {
        std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02d:%02d:%02d.%03dZ", b.date.year, b.date.month,
                      b.date.day, b.hour, b.minute, b.second, b.millis);
    } else {
        std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02d:%02d:%02dZ", b.date.year, b.date.month, b.date.day,
                      b.hour, b.minute, b.second);
    }
    return buf;
}

std::string format_compact(Timestamp t) {
    const Broken b = split(t);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04lld%02u%02uT%02d%02d%02dZ", b.date.year, b.date.month, b.date.day, b.hour,
                  b.minute, b.second);
    return buf;
}

Timestamp parse_rfc3339(std::string_view s) {
    const int year = digits(s, 0, 4);
    expect(s, 4, '-');
    const int month = digits(s, 5, 2);
    expect(s, 7, '-');
    const int day = digits(s, 8, 2);
    expect(s, 10, 'T');
    const int hour = digits(s, 11, 2);
    expect(s, 13, ':');
    const int minute = digits(s, 14, 2);
    expect(s, 16, ':');
    const int second = digits(s, 17, 2);
    if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59 || second > 60)
        throw ParseError("timestamp field out of range: " + std::string(s));

    std::size_t pos = 19;
    int millis = 0;
    if (pos < s.size() && s[pos] == '.') {
        ++pos;
        int scale = 100;
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
            millis += (s[pos] - '0') * scale;
            scale /= 10;
            ++pos;
        }
    }
    long long offset_minutes = 0;
    if (pos < s.size() && (s[pos] == 'Z' || s[pos] == 'z')) {
        ++pos;
    } else if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
        const int sign = s[pos] == '-' ? -1 : 1;
        const int oh = digits(s, pos + 1, 2);
        expect(s, pos + 3, ':');
        const int om = digits(s, pos + 4, 2);
        offset_minutes = sign * (oh * 60 + om);
        pos += 6;
    } else {
        throw ParseError("timestamp lacks UTC offset: " + std::string(s));
    }
    if (pos != s.size()) throw ParseError("trailing characters in timestamp: " + std::string(s));

    const long long days = days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day));
    const long long ms = ((days * 24 + hour) * 60 + minute - offset_minutes) * 60'000LL + second * 1000LL + millis;
    return Timestamp{std::chrono::milliseconds{ms}};
}

Timestamp utc_now() {
    return std::chrono::time_point_cast<std::chrono::milliseconds>(std::chrono::system_clock::now());
}

}  // namespace pharmaharvest
