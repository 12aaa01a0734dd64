#include "pathlens/time.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>

#include "pathlens/error.hpp"

namespace pathlens {

namespace {

// Civil-date <-> day-count conversion (proleptic Gregorian), the classic
// era-based formulation.
std::int64_t days_from_civil(std::int64_t y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const int yoe = static_cast<int>(y - era * 400);
    const int doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const int doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + doe - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const int doe = static_cast<int>(z - era * 146097);
    const int yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<std::int64_t>(yoe) + era * 400;
    const int doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const int mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y += m <= 2;
}

bool is_leap(std::int64_t y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(std::int64_t y, int m) {
    static const int tbl[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2 && is_leap(y)) return 29;
    return tbl[m - 1];
}

}  // namespace

TimeWindow resolve_window(Instant anchor, Duration length) {
    if (length.ms <= 0) fail("non_positive_length", "window length must be > 0");
    return {anchor - length, anchor};
}

std::string TimeWindow::id() const {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "w%lld_%lld", static_cast<long long>(start.ms),
                  static_cast<long long>(end.ms));
    return buf;
}

std::string format_rfc3339(Instant t) {
    std::int64_t ms = t.ms;
    std::int64_t days = ms / 86'400'000;
    std::int64_t rem = ms % 86'400'000;
    if (rem < 0) {
        rem += 86'400'000;
        --days;
    }
    std::int64_t y;
    int mo, d;
    civil_from_days(days, y, mo, d);
    const int h = static_cast<int>(rem / 3'600'000);
    const int mi = static_cast<int>(rem / 60'000 % 60);
    const int s = static_cast<int>(rem / 1000 % 60);
    const int milli = static_cast<int>(rem % 1000);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%04lld-%02d-%02dT%02d:%02d:%02d.%03dZ",
                  static_cast<long long>(y), mo, d, h, mi, s, milli);
    return buf;
}

Instant parse_rfc3339(const std::string& text) {
    const char* p = text.c_str();
    auto bad = [&]() -> Instant { fail("unparseable_timestamp", "'" + text + "'"); };

    auto read_int = [&](int digits, int& out) {
        out = 0;
        for (int i = 0; i < digits; ++i) {
            if (!std::isdigit(static_cast<unsigned char>(*p))) return false;
            out = out * 10 + (*p - '0');
            ++p;
        }
        return true;
    };

    int year, mon, day, hour, min, sec;
    if (!read_int(4, year)) return bad();
    if (*p++ != '-') return bad();
    if (!read_int(2, mon)) return bad();
    if (*p++ != '-') return bad();
    if (!read_int(2, day)) return bad();
    if (*p != 'T' && *p != 't' && *p != ' ') return bad();
    ++p;
    if (!read_int(2, hour)) return bad();
    if (*p++ != ':') return bad();
    if (!read_int(2, min)) return bad();
    if (*p++ != ':') return bad();
    if (!read_int(2, sec)) return bad();

    if (mon < 1 || mon > 12 || day < 1 || day > days_in_month(year, mon) || hour > 23 ||
        min > 59 || sec > 60)
        return bad();
    if (sec == 60) sec = 59;  // leap second: clamp

    int milli = 0;
    if (*p == '.') {
        ++p;
        int scale = 100;
        if (!std::isdigit(static_cast<unsigned char>(*p))) return bad();
        while (std::isdigit(static_cast<unsigned char>(*p))) {
            if (scale > 0) milli += (*p - '0') * scale;
            scale /= 10;
            ++p;
        }
    }

    std::int64_t offset_ms = 0;
    if (*p == 'Z' || *p == 'z') {
        ++p;
    } else if (*p == '+' || *p == '-') {
        const int sign = (*p == '-') ? -1 : 1;
        ++p;
        int oh, om;
        if (!read_int(2, oh)) return bad();
        if (*p == ':') ++p;
        if (!read_int(2, om)) return bad();
        offset_ms = sign * (oh * 3'600'000LL + om * 60'000LL);
    } else {
        return bad();
    }
    if (*p != '\0') return bad();

    const std::int64_t days = days_from_civil(year, mon, day);
    const std::int64_t local =
        days * 86'400'000LL + hour * 3'600'000LL + min * 60'000LL + sec * 1000LL + milli;
    return Instant{local - offset_ms};
}

}  // namespace pathlens
