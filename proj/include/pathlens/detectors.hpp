#pragma once

#include "pathlens/config.hpp"
#include "pathlens/findings.hpp"
#include "pathlens/markov.hpp"
#include "pathlens/snapshot.hpp"

namespace pathlens {

// Detector logic changes require a version bump; golden fixtures are pinned
// per version.
std::string detector_version(DetectorKind k);

// Per-user affected fractions; distinct from the per-journey reach stored in
// snapshots. The two coincide in single-journey-per-user data.
struct PopulationIndex {
    std::int64_t total_users = 0;
    std::map<std::string, std::int64_t> users_by_state;
    std::map<std::pair<std::string, std::string>, std::int64_t> users_by_edge;

    static PopulationIndex build(const std::vector<JourneyInstance>& journeys);
    double state_reach(const std::string& state) const;
    double edge_reach(const std::string& from, const std::string& to) const;
};

// Detector inputs for one snapshot plus its journey-level data.
struct SnapshotSlice {
    GraphSnapshot snapshot;
    std::vector<JourneyInstance> journeys;
    PopulationIndex population;

    static SnapshotSlice make(GraphSnapshot snap, std::vector<JourneyInstance> journeys);
};

// Reach+lift filter -> candidate removal effects -> rank by removal effect,
// emit the top k as is_activation_driver_for. necessary_for_conversion states
// bypass the lift filter entirely.
std::vector<Finding> detect_activation_drivers(const SnapshotSlice& slice,
                                               const ChainMetrics& metrics,
                                               const PlatformConfig& cfg);

// Flags states with exit probability and reach above thresholds; maximal
// groups of flagged states connected by Q edges merge into one cluster
// finding.
std::vector<Finding> detect_dropoffs(const SnapshotSlice& slice, const ChainMetrics& metrics,
                                     const PlatformConfig& cfg);

// Statistically significant negative transition deltas between consecutive
// snapshots; regressed_after when anchored to exactly one release.
std::vector<Finding> detect_regressions(const GraphSnapshot& prev, const SnapshotSlice& curr,
                                        const std::vector<Release>& releases,
                                        const PlatformConfig& cfg);

// Reach-weighted mean of per-state base-2 JSDs, plus per-state reach
// comparisons. more_common_in / less_common_in are judged relative to the
// second slice's segment, so swapping inputs swaps the predicates.
std::vector<Finding> detect_segment_divergence(const SnapshotSlice& a, const SnapshotSlice& b,
                                               const PlatformConfig& cfg);

// Mean visit count among containing journeys above tau_loop. The predicate
// exhibits_loop is a registered vocabulary extension.
std::vector<Finding> detect_repeated_visits(const SnapshotSlice& slice,
                                            const PlatformConfig& cfg);

// Q_path = conversion * (1/duration) * (1/length) over deployment-median
// normalized factors; top paths emit is_fast_path_to, high-occurrence
// low-quality paths emit associated_with optimization targets.
std::vector<Finding> detect_path_quality(const SnapshotSlice& slice, const PlatformConfig& cfg);

}  // namespace pathlens
