#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pathlens/ingest.hpp"
#include "pathlens/journey_def.hpp"

namespace pathlens {

struct StateVisit {
    std::string state_id;
    Instant timestamp;

    bool operator==(const StateVisit&) const = default;
};

// One traversal of a journey definition by one actor. Visits are transient
// states only, time-ordered, with consecutive duplicates collapsed to the
// first timestamp. outcome is empty iff the journey was right-censored by
// the window end.
struct JourneyInstance {
    std::string canonical_actor_id;
    std::vector<StateVisit> visits;
    std::optional<TerminalOutcome> outcome;
    Instant outcome_at;  // meaningful when outcome is set
    std::string window_id;

    bool reached(const std::string& state) const;
    int visit_count(const std::string& state) const;
};

// Sessionizes per actor (gaps > session_gap split sessions), then cuts
// journeys: start at the first start-state visit, end at the first
// terminal-mapped state, at inactivity timeout, or censored at window end.
std::vector<JourneyInstance> extract_journeys(const std::vector<DerivedStateEvent>& derived,
                                              const JourneyDefinition& def,
                                              const TimeWindow& window);

// Eq-style per-journey reach: fraction of journeys visiting each state at
// least once.
std::map<std::string, double> reach_rates(const std::vector<JourneyInstance>& journeys);

struct PathStats {
    std::vector<std::string> states;
    std::optional<TerminalOutcome> outcome;
    std::int64_t occurrence = 0;
    std::int64_t sequence_total = 0;  // journeys sharing the sequence across outcomes
    // Fraction converted among all journeys sharing this transient sequence,
    // regardless of outcome group.
    double conversion_rate = 0;
    double mean_duration_ms = 0;
    int length = 0;
};

// Groups journeys by (transient sequence, outcome); ranks by occurrence,
// then conversion rate, then lexicographic sequence.
std::vector<PathStats> materialize_paths(const std::vector<JourneyInstance>& journeys, int top_n);

}  // namespace pathlens
