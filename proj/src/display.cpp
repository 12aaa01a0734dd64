#include "pathlens/display.hpp"

#include <cmath>
#include <cstdio>

namespace pathlens {

std::string format_probability(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string format_lift(double v) { return format_probability(v); }

std::string format_integer(std::int64_t v) {
    const bool neg = v < 0;
    std::string digits = std::to_string(neg ? -v : v);
    std::string out;
    int count = 0;
    for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
        if (count && count % 3 == 0) out.push_back(',');
        out.push_back(*it);
        ++count;
    }
    if (neg) out.push_back('-');
    return {out.rbegin(), out.rend()};
}

std::string format_evidence_value(const EvidenceValue& v) {
    if (const auto* s = std::get_if<std::string>(&v)) return *s;
    if (const auto* i = std::get_if<std::int64_t>(&v)) return format_integer(*i);
    const double d = std::get<double>(v);
    if (std::abs(d - std::round(d)) < 1e-12 && std::abs(d) < 1e15)
        return format_integer(static_cast<std::int64_t>(std::llround(d)));
    return format_probability(d);
}

}  // namespace pathlens
