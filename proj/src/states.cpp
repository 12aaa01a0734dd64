#include "pathlens/states.hpp"

#include <set>

#include "pathlens/error.hpp"

namespace pathlens {

std::string to_string(LifecycleState s) {
    switch (s) {
        case LifecycleState::NewUser: return "new_user";
        case LifecycleState::Activated: return "activated";
        case LifecycleState::Paying: return "paying";
        case LifecycleState::Churned: return "churned";
        case LifecycleState::Retained: return "retained";
    }
    fail("invalid_lifecycle", "unknown lifecycle enum value");
}

LifecycleState lifecycle_state_from_string(const std::string& s) {
    for (LifecycleState l : {LifecycleState::NewUser, LifecycleState::Activated,
                             LifecycleState::Paying, LifecycleState::Churned,
                             LifecycleState::Retained})
        if (to_string(l) == s) return l;
    fail("invalid_lifecycle", "'" + s + "' is not a lifecycle state");
}

void validate_rules(const StateRuleSet& rules) {
    std::set<std::string> ids;
    for (const auto& r : rules.rules) {
        if (r.state_id.empty())
            fail("invalid_rule", "rule '" + r.rule_id + "' has an empty state id");
        if (!ids.insert(r.rule_id).second)
            fail("invalid_rule", "duplicate rule id '" + r.rule_id + "'");
    }
}

void validate_rules(const LifecycleRuleSet& rules) {
    std::set<LifecycleState> seen;
    for (const auto& r : rules.rules) {
        if (!seen.insert(r.lifecycle_state).second)
            fail("invalid_rule",
                 "lifecycle state '" + to_string(r.lifecycle_state) + "' defined twice");
        if (r.within && r.within->ms <= 0) fail("invalid_rule", "'within' must be positive");
        if (r.absence_for && r.absence_for->ms <= 0)
            fail("invalid_rule", "'absence_for' must be positive");
        if (r.trigger.empty() && !r.absence_for)
            fail("invalid_rule", "rule needs either a trigger or absence_for");
    }
}

bool glob_match(const std::string& pattern, const std::string& text) {
    // Iterative '*' glob; no character classes.
    std::size_t p = 0, t = 0, star = std::string::npos, mark = 0;
    while (t < text.size()) {
        if (p < pattern.size() && (pattern[p] == text[t])) {
            ++p;
            ++t;
        } else if (p < pattern.size() && pattern[p] == '*') {
            star = p++;
            mark = t;
        } else if (star != std::string::npos) {
            p = star + 1;
            t = ++mark;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '*') ++p;
    return p == pattern.size();
}

Json state_rules_to_json(const StateRuleSet& r) {
    Json rules = Json::array();
    for (const auto& rule : r.rules) {
        Json jc;
        jc["rule_id"] = rule.rule_id;
        jc["state_id"] = rule.state_id;
        jc["event_name"] = rule.event_name_matcher;
        Json conds = Json::array();
        for (const auto& c : rule.conditions) {
            Json cc;
            cc["property"] = c.property;
            cc["op"] = to_string(c.op);
            if (c.op == ConditionOp::OneOf) {
                Json vals = Json::array();
                for (const auto& v : c.operands) vals.push_back(to_json(v));
                cc["values"] = vals;
            } else if (c.op != ConditionOp::Exists) {
                cc["value"] = to_json(c.operand);
            }
            conds.push_back(cc);
        }
        jc["conditions"] = conds;
        rules.push_back(jc);
    }
    return Json{{"rules", rules},
                {"fallback_mode", r.fallback_mode == FallbackMode::RawEvent ? "raw_event" : "drop"}};
}

StateRuleSet state_rules_from_json(const Json& j) {
    StateRuleSet out;
    for (const auto& jr : j.at("rules")) {
        SemanticRule r;
        r.rule_id = jr.at("rule_id").get<std::string>();
        r.state_id = jr.at("state_id").get<std::string>();
        r.event_name_matcher = jr.at("event_name").get<std::string>();
        if (jr.contains("conditions")) {
            for (const auto& jc : jr.at("conditions")) {
                Condition c;
                c.property = jc.at("property").get<std::string>();
                c.op = condition_op_from_string(jc.at("op").get<std::string>());
                if (c.op == ConditionOp::OneOf) {
                    for (const auto& v : jc.at("values"))
                        c.operands.push_back(property_value_from_json(v));
                } else if (c.op != ConditionOp::Exists) {
                    c.operand = property_value_from_json(jc.at("value"));
                }
                r.conditions.push_back(std::move(c));
            }
        }
        out.rules.push_back(std::move(r));
    }
    const auto mode = j.at("fallback_mode").get<std::string>();
    if (mode == "raw_event")
        out.fallback_mode = FallbackMode::RawEvent;
    else if (mode == "drop")
        out.fallback_mode = FallbackMode::Drop;
    else
        fail("invalid_rule", "unknown fallback mode '" + mode + "'");
    return out;
}

Json lifecycle_rules_to_json(const LifecycleRuleSet& r) {
    Json rules = Json::array();
    for (const auto& rule : r.rules) {
        Json jr;
        jr["lifecycle_state"] = to_string(rule.lifecycle_state);
        jr["trigger"] = rule.trigger;
        if (rule.within) jr["within_ms"] = rule.within->ms;
        if (rule.absence_for) jr["absence_for_ms"] = rule.absence_for->ms;
        rules.push_back(jr);
    }
    return Json{{"rules", rules}};
}

LifecycleRuleSet lifecycle_rules_from_json(const Json& j) {
    LifecycleRuleSet out;
    for (const auto& jr : j.at("rules")) {
        MilestoneRule r;
        r.lifecycle_state = lifecycle_state_from_string(jr.at("lifecycle_state").get<std::string>());
        r.trigger = jr.value("trigger", std::string{});
        if (jr.contains("within_ms")) r.within = Duration{jr.at("within_ms").get<std::int64_t>()};
        if (jr.contains("absence_for_ms"))
            r.absence_for = Duration{jr.at("absence_for_ms").get<std::int64_t>()};
        out.rules.push_back(std::move(r));
    }
    return out;
}

}  // namespace pathlens
