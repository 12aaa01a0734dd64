#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace pathlens {

struct Duration {
    std::int64_t ms = 0;

    static constexpr Duration millis(std::int64_t v) { return {v}; }
    static constexpr Duration seconds(std::int64_t v) { return {v * 1000}; }
    static constexpr Duration minutes(std::int64_t v) { return {v * 60'000}; }
    static constexpr Duration hours(std::int64_t v) { return {v * 3'600'000}; }
    static constexpr Duration days(std::int64_t v) { return {v * 86'400'000}; }

    auto operator<=>(const Duration&) const = default;
};

// Milliseconds since the Unix epoch, always UTC.
struct Instant {
    std::int64_t ms = 0;

    auto operator<=>(const Instant&) const = default;
};

constexpr Instant operator+(Instant t, Duration d) { return {t.ms + d.ms}; }
constexpr Instant operator-(Instant t, Duration d) { return {t.ms - d.ms}; }
constexpr Duration operator-(Instant a, Instant b) { return {a.ms - b.ms}; }

// Half-open interval [start, end).
struct TimeWindow {
    Instant start;
    Instant end;

    bool contains(Instant t) const { return t >= start && t < end; }
    bool intersects(const TimeWindow& o) const { return start < o.end && o.start < end; }
    Duration length() const { return end - start; }
    std::string id() const;

    auto operator<=>(const TimeWindow&) const = default;
};

// Window ending exactly at `anchor`. Throws non_positive_length.
TimeWindow resolve_window(Instant anchor, Duration length);

// "2024-01-08T00:00:00.000Z". Millisecond precision.
std::string format_rfc3339(Instant t);

// Accepts RFC3339 with 'Z' or a numeric offset; fractional seconds beyond
// milliseconds are truncated. Throws unparseable_timestamp.
Instant parse_rfc3339(const std::string& text);

}  // namespace pathlens
