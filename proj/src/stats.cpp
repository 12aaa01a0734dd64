#include "pathlens/stats.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "pathlens/error.hpp"
#include "pathlens/snapshot.hpp"

namespace pathlens {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

namespace {

double two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

}  // namespace

ProportionTest two_proportion_z(std::int64_t successes1, std::int64_t n1,
                                std::int64_t successes2, std::int64_t n2) {
    if (n1 < 1 || n2 < 1) fail("invalid_sample", "both sample sizes must be >= 1");
    if (successes1 > n1 || successes2 > n2 || successes1 < 0 || successes2 < 0)
        fail("invalid_sample", "successes must lie in [0, n]");

    ProportionTest t;
    t.n1 = n1;
    t.n2 = n2;
    t.p1 = static_cast<double>(successes1) / static_cast<double>(n1);
    t.p2 = static_cast<double>(successes2) / static_cast<double>(n2);

    const double pooled =
        static_cast<double>(successes1 + successes2) / static_cast<double>(n1 + n2);
    if (pooled <= 0.0 || pooled >= 1.0) {
        // No variance under the null: no evidence of a difference is
        // computable. Flag it rather than divide by zero.
        t.zero_variance = true;
        t.z = 0.0;
        t.p_value = 1.0;
        return t;
    }
    const double se = std::sqrt(pooled * (1.0 - pooled) *
                                (1.0 / static_cast<double>(n1) + 1.0 / static_cast<double>(n2)));
    t.z = (t.p1 - t.p2) / se;
    t.p_value = two_sided_p(t.z);
    return t;
}

ProportionTest one_proportion_z(std::int64_t successes, std::int64_t n, double p0) {
    if (n < 1) fail("invalid_sample", "sample size must be >= 1");
    if (successes > n || successes < 0) fail("invalid_sample", "successes must lie in [0, n]");
    ProportionTest t;
    t.n1 = n;
    t.n2 = n;
    t.p1 = static_cast<double>(successes) / static_cast<double>(n);
    t.p2 = p0;
    if (p0 <= 0.0 || p0 >= 1.0) {
        t.zero_variance = true;
        t.z = 0.0;
        t.p_value = 1.0;
        return t;
    }
    const double se = std::sqrt(p0 * (1.0 - p0) / static_cast<double>(n));
    t.z = (t.p1 - p0) / se;
    t.p_value = two_sided_p(t.z);
    return t;
}

std::string to_string(ReleaseLink link) {
    switch (link) {
        case ReleaseLink::None: return "none";
        case ReleaseLink::Anchored: return "anchored";
        case ReleaseLink::Ambiguous: return "ambiguous";
    }
    fail("invalid_release_link", "unknown enum value");
}

EdgeDelta transition_delta(const GraphSnapshot& prev, const GraphSnapshot& curr,
                           const std::pair<std::string, std::string>& edge,
                           const std::vector<Release>& releases) {
    if (prev.journey_id != curr.journey_id || prev.segment_id != curr.segment_id)
        fail("window_mismatch", "snapshots cover different journeys or segments");
    if (prev.window.end != curr.window.start)
        fail("window_mismatch", "snapshots are not consecutive windows");

    const std::int64_t c_prev = prev.edge_count(edge.first, edge.second);
    const std::int64_t c_curr = curr.edge_count(edge.first, edge.second);
    const std::int64_t n_prev = prev.out_total(edge.first);
    const std::int64_t n_curr = curr.out_total(edge.first);
    if (c_prev == 0 && c_curr == 0)
        fail("window_mismatch", "edge " + edge.first + "->" + edge.second +
                                    " is absent from both snapshots");

    EdgeDelta d;
    d.edge = edge;
    d.p_prev = n_prev > 0 ? static_cast<double>(c_prev) / static_cast<double>(n_prev) : 0.0;
    d.p_curr = n_curr > 0 ? static_cast<double>(c_curr) / static_cast<double>(n_curr) : 0.0;
    d.delta = d.p_curr - d.p_prev;

    if (n_prev > 0 && n_curr > 0) {
        d.test = two_proportion_z(c_curr, n_curr, c_prev, n_prev);
    } else {
        d.test.zero_variance = true;
        d.test.p_value = 1.0;
    }

    // Release anchoring over [prev.window.end, curr.window.end).
    const TimeWindow span{prev.window.end, curr.window.end};
    std::vector<const Release*> hits;
    for (const auto& r : releases)
        if (span.contains(r.at)) hits.push_back(&r);
    if (hits.size() == 1) {
        d.link = ReleaseLink::Anchored;
        d.release_id = hits.front()->release_id;
    } else if (hits.size() > 1) {
        d.link = ReleaseLink::Ambiguous;
    }
    return d;
}

namespace {

double jsd_impl(std::span<const double> p, std::span<const double> q) {
    double sp = 0, sq = 0;
    for (double v : p) sp += v;
    for (double v : q) sq += v;
    if (std::abs(sp - 1.0) > 1e-9 || std::abs(sq - 1.0) > 1e-9)
        fail("not_normalized", "distributions must each sum to 1");

    const double inv_log2 = 1.0 / std::log(2.0);
    double kl_p = 0, kl_q = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double m = 0.5 * (p[i] + q[i]);
        if (p[i] > 0) kl_p += p[i] * std::log(p[i] / m) * inv_log2;
        if (q[i] > 0) kl_q += q[i] * std::log(q[i] / m) * inv_log2;
    }
    const double jsd = 0.5 * kl_p + 0.5 * kl_q;
    return std::clamp(jsd, 0.0, 1.0);
}

}  // namespace

double js_divergence(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) fail("not_normalized", "distributions must share a support");
    return jsd_impl(p, q);
}

double js_divergence(const std::map<std::string, double>& p,
                     const std::map<std::string, double>& q) {
    std::set<std::string> keys;
    for (const auto& [k, _] : p) keys.insert(k);
    for (const auto& [k, _] : q) keys.insert(k);
    std::vector<double> vp, vq;
    vp.reserve(keys.size());
    vq.reserve(keys.size());
    for (const auto& k : keys) {
        const auto ip = p.find(k);
        const auto iq = q.find(k);
        vp.push_back(ip == p.end() ? 0.0 : ip->second);
        vq.push_back(iq == q.end() ? 0.0 : iq->second);
    }
    return jsd_impl(vp, vq);
}

Confidence confidence_score(double z, std::int64_t n, double effect,
                            const ConfidenceCoefficients& coeffs, std::int64_t n_min) {
    if (n < 1) fail("invalid_sample", "n must be >= 1");
    if (n_min < 1) fail("config_error", "n_min must be >= 1");
    const double arg = coeffs.a * z +
                       coeffs.b * std::log(static_cast<double>(n) / static_cast<double>(n_min)) +
                       coeffs.c * std::abs(effect);
    const double score = std::clamp(1.0 / (1.0 + std::exp(-arg)), 0.0, 1.0);
    Confidence c;
    c.score = score;
    c.label = score >= coeffs.high_min ? "High" : (score >= coeffs.medium_min ? "Medium" : "Low");
    return c;
}

}  // namespace pathlens
