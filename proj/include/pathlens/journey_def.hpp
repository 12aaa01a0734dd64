#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "pathlens/types.hpp"

namespace pathlens {

enum class StateLevel { RawEvent, Semantic, Lifecycle };

std::string to_string(StateLevel level);
StateLevel state_level_from_string(const std::string& s);

struct JourneyDefinition {
    std::string journey_id;
    std::vector<std::string> start_states;              // non-empty
    std::map<std::string, TerminalOutcome> terminal_map; // state id -> outcome
    Duration inactivity_timeout;
    TerminalOutcome timeout_outcome = TerminalOutcome::DroppedOff;
    Duration session_gap;
    // Levels whose derived events participate in journeys. Lifecycle point
    // events are excluded by default so they never enter transition rows.
    std::set<StateLevel> levels = {StateLevel::RawEvent, StateLevel::Semantic};
};

// Returns def unchanged when every start state and terminal-mapped state is
// known and the structural invariants hold; idempotent. Throws unknown_state,
// overlapping_start_terminal, empty_terminal_map, non_positive_length.
JourneyDefinition validate_journey_definition(const JourneyDefinition& def,
                                              const std::set<std::string>& known_states);

Json journey_def_to_json(const JourneyDefinition& def);
JourneyDefinition journey_def_from_json(const Json& j);

}  // namespace pathlens
