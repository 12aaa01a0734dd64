#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pathlens/journeys.hpp"
#include "pathlens/segment.hpp"

namespace pathlens {

// Immutable per-window journey graph. Transition targets in edge_counts are
// transient state ids or "outcome:<name>" for absorbing transitions.
// Invariant: for every state with at least one outgoing observation, its Q
// row plus R row sums to 1 within 1e-9.
struct GraphSnapshot {
    std::string snapshot_id;  // content hash over all other fields except created_at
    TimeWindow window;
    std::string journey_id;
    std::string segment_id;  // "all" when unsegmented
    std::vector<std::string> states;         // transient, lexicographic
    std::vector<TerminalOutcome> absorbing;  // declaration order, filtered to the journey
    std::map<std::pair<std::string, std::string>, std::int64_t> edge_counts;
    std::vector<double> Q;  // row-major |S| x |S|
    std::vector<double> R;  // row-major |S| x |A|
    std::map<std::string, double> reach;
    std::int64_t n_journeys = 0;
    std::vector<PathStats> top_paths;
    Instant created_at;

    int state_index(const std::string& s) const;       // -1 when absent
    int outcome_index(TerminalOutcome t) const;        // -1 when absent
    double q(int i, int j) const { return Q[static_cast<std::size_t>(i) * states.size() + j]; }
    double r(int i, int k) const { return R[static_cast<std::size_t>(i) * absorbing.size() + k]; }
    std::int64_t out_total(const std::string& from) const;
    std::int64_t edge_count(const std::string& from, const std::string& to) const;
};

// Counts every consecutive transition, including transient->absorbing via the
// journey outcome; censored journeys contribute transient transitions only.
// Throws empty_snapshot when no journey survives the segment filter.
GraphSnapshot build_snapshot(const std::vector<JourneyInstance>& journeys,
                             const JourneyDefinition& def, const TimeWindow& window,
                             const SegmentDefinition* segment,
                             const std::map<std::string, PropertyMap>& actor_props, int top_n);

// Journeys retained after the snapshot's segment filter; detectors that need
// journey-level data (loops, conditionals) use this to stay consistent with
// the snapshot they analyze.
std::vector<JourneyInstance> filter_journeys_for_segment(
    const std::vector<JourneyInstance>& journeys, const SegmentDefinition* segment,
    const std::map<std::string, PropertyMap>& actor_props);

Json snapshot_to_json(const GraphSnapshot& snap);
GraphSnapshot snapshot_from_json(const Json& j);

// Content hash over the canonical serialization (snapshot_id itself and
// created_at excluded).
std::string compute_snapshot_id(const GraphSnapshot& snap);

}  // namespace pathlens
