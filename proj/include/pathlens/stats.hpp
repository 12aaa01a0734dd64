#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pathlens/config.hpp"

namespace pathlens {

struct GraphSnapshot;

// Standard normal CDF, computed from the C library erfc (sub-ulp accuracy;
// any implementation reproducing erfc matches these p-values to < 1e-6).
double normal_cdf(double z);

struct ProportionTest {
    double p1 = 0, p2 = 0;
    std::int64_t n1 = 0, n2 = 0;
    double z = 0;
    double p_value = 1.0;  // two-sided
    bool zero_variance = false;
    bool low_power = false;  // min(n1,n2) below n_min; set by callers that know n_min
};

// Pooled two-proportion z-test. Pooled p of 0 or 1 yields no usable variance:
// the test comes back with z = 0, p_value = 1 and zero_variance set.
ProportionTest two_proportion_z(std::int64_t successes1, std::int64_t n1,
                                std::int64_t successes2, std::int64_t n2);

// One-sample proportion z-test against a fixed null p0.
ProportionTest one_proportion_z(std::int64_t successes, std::int64_t n, double p0);

enum class ReleaseLink { None, Anchored, Ambiguous };

std::string to_string(ReleaseLink link);

struct EdgeDelta {
    std::pair<std::string, std::string> edge;
    double p_prev = 0, p_curr = 0;
    double delta = 0;  // p_curr - p_prev
    ProportionTest test;
    ReleaseLink link = ReleaseLink::None;
    std::string release_id;  // set when anchored
};

// Delta in one edge's transition probability between two consecutive
// snapshots of the same journey/segment. An edge absent from a snapshot
// counts as p = 0 with that snapshot's exposure for the source state.
// Throws window_mismatch.
EdgeDelta transition_delta(const GraphSnapshot& prev, const GraphSnapshot& curr,
                           const std::pair<std::string, std::string>& edge,
                           const std::vector<Release>& releases);

// Base-2 Jensen-Shannon divergence; symmetric, 0 iff equal, 1 for disjoint
// support. Inputs must each sum to 1 within 1e-9 (throws not_normalized).
double js_divergence(std::span<const double> p, std::span<const double> q);
// Keyed overload; missing keys are zero-probability entries.
double js_divergence(const std::map<std::string, double>& p,
                     const std::map<std::string, double>& q);

struct Confidence {
    double score = 0;
    std::string label = "Low";  // High / Medium / Low
};

// logistic(a*z + b*ln(n/n_min) + c*|effect|), labeled by the configured
// thresholds. Coefficients ship uncalibrated; see config.
Confidence confidence_score(double z, std::int64_t n, double effect,
                            const ConfidenceCoefficients& coeffs, std::int64_t n_min);

}  // namespace pathlens
