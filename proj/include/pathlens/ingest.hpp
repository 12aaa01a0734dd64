#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pathlens/config.hpp"
#include "pathlens/states.hpp"
#include "pathlens/types.hpp"

namespace pathlens {

struct NormalizedEvent : RawEvent {
    std::string canonical_actor_id;
    Duration ingestion_lag;
};

struct DerivedStateEvent {
    std::string canonical_actor_id;
    std::string state_id;
    StateLevel level = StateLevel::Semantic;
    Instant timestamp;
    std::string source_event_id;
};

struct DropRecord {
    RawEvent event;
    std::string reason;
};

struct QuarantineRecord {
    Json original;
    std::string reason;
};

// --- pipeline stages -------------------------------------------------------

struct NormalizeResult {
    std::vector<RawEvent> accepted;  // sorted by (timestamp, event_id)
    std::vector<QuarantineRecord> quarantined;
};

// Timestamp sanity + late-arrival quarantine over already-typed events.
NormalizeResult normalize_events(std::vector<RawEvent> events, Duration lag_tolerance,
                                 Instant now);
// Same, starting from raw JSON lines; unparseable records are quarantined,
// never dropped.
NormalizeResult normalize_json_lines(const std::vector<Json>& lines, Duration lag_tolerance,
                                     Instant now);

RawEvent raw_event_from_json(const Json& j);
Json raw_event_to_json(const RawEvent& e);

// Keeps the first event of any same-id pair closer than the idempotency
// window (measured against the last kept occurrence). Requires input sorted
// by timestamp; never reorders survivors.
std::vector<RawEvent> deduplicate(const std::vector<RawEvent>& events, Duration idempotency_window);

struct BotFilterResult {
    std::vector<RawEvent> kept;
    std::vector<DropRecord> dropped;  // reason: ua_match | rate_heuristic
};

// UA substring match drops single events; the rate heuristic (sliding
// one-minute count above max_rate for at least `sustain`) drops every event
// of the offending actor.
BotFilterResult filter_bots(const std::vector<RawEvent>& events, const BotRules& rules);

struct IdentityResolution {
    std::map<std::string, std::string> alias_map;  // id -> canonical id (identity omitted)
    int multi_user_components = 0;                 // merged components with >1 authenticated id
};

// Connected components over aliasing events (properties anonymous_id /
// user_id). Canonical id = authenticated id with the earliest first-seen
// timestamp, ties broken lexicographically. Deterministic.
IdentityResolution resolve_identities(const std::vector<RawEvent>& events,
                                      const std::set<std::string>& alias_event_names);

std::string canonical_id_for(const IdentityResolution& res, const std::string& actor_id);

std::vector<NormalizedEvent> annotate_events(const std::vector<RawEvent>& events,
                                             const IdentityResolution& res, Instant now);

// First matching rule wins; unmatched events fall back to a raw_event-level
// state named after the event, or are dropped, per fallback_mode. Order
// preserved; every output carries its source event id.
std::vector<DerivedStateEvent> derive_semantic_states(const std::vector<NormalizedEvent>& events,
                                                      const StateRuleSet& rules);

// Stateful fold over one actor's history (sorted by timestamp); emits each
// milestone at the instant it first becomes true. Absence rules emit at the
// boundary instant when it falls before window_end.
std::vector<DerivedStateEvent> derive_lifecycle_states(
    const std::vector<DerivedStateEvent>& actor_history, const LifecycleRuleSet& rules,
    Instant window_end);

// --- full NSD pass ---------------------------------------------------------

struct NsdResult {
    std::vector<NormalizedEvent> normalized;
    std::vector<DerivedStateEvent> derived;  // semantic/raw + lifecycle, sorted
    std::vector<QuarantineRecord> quarantined;
    std::vector<DropRecord> bot_dropped;
    int multi_user_components = 0;
    std::map<std::string, PropertyMap> actor_properties;  // canonical id -> last-write-wins props
};

NsdResult run_nsd(const std::vector<Json>& raw_lines, const PlatformConfig& cfg, Instant now,
                  Instant window_end);
NsdResult run_nsd_events(std::vector<RawEvent> events, const PlatformConfig& cfg, Instant now,
                         Instant window_end);

Json derived_to_json(const DerivedStateEvent& d);
DerivedStateEvent derived_from_json(const Json& j);
Json normalized_to_json(const NormalizedEvent& e);
NormalizedEvent normalized_from_json(const Json& j);

}  // namespace pathlens
