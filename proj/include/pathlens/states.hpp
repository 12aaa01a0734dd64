#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pathlens/journey_def.hpp"
#include "pathlens/segment.hpp"

namespace pathlens {

// Ordered rules, first match wins. event_name_matcher is an exact name or a
// glob with '*' wildcards.
struct SemanticRule {
    std::string rule_id;
    std::string state_id;
    std::string event_name_matcher;
    std::vector<Condition> conditions;  // over event properties
};

enum class FallbackMode { RawEvent, Drop };

struct StateRuleSet {
    std::vector<SemanticRule> rules;
    FallbackMode fallback_mode = FallbackMode::RawEvent;
};

enum class LifecycleState { NewUser, Activated, Paying, Churned, Retained };

std::string to_string(LifecycleState s);
LifecycleState lifecycle_state_from_string(const std::string& s);

// A milestone fires at most once per actor, at the instant it first becomes
// true. `trigger` is a semantic state id or "first_event"; `within` bounds
// the trigger relative to the first event; `absence_for` fires at the
// boundary instant when that much silence has elapsed.
struct MilestoneRule {
    LifecycleState lifecycle_state = LifecycleState::NewUser;
    std::string trigger;  // state id or "first_event"; empty for absence rules
    std::optional<Duration> within;
    std::optional<Duration> absence_for;
};

struct LifecycleRuleSet {
    std::vector<MilestoneRule> rules;
};

void validate_rules(const StateRuleSet& rules);
void validate_rules(const LifecycleRuleSet& rules);

bool glob_match(const std::string& pattern, const std::string& text);

Json state_rules_to_json(const StateRuleSet& r);
StateRuleSet state_rules_from_json(const Json& j);
Json lifecycle_rules_to_json(const LifecycleRuleSet& r);
LifecycleRuleSet lifecycle_rules_from_json(const Json& j);

}  // namespace pathlens
