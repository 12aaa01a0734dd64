#include "pathlens/ingest.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <unordered_map>
#include <unordered_set>

#include "pathlens/error.hpp"

namespace pathlens {

RawEvent raw_event_from_json(const Json& j) {
    RawEvent e;
    e.event_id = j.at("event_id").get<std::string>();
    if (e.event_id.empty()) fail("invalid_event", "event_id must be non-empty");
    e.actor_id = j.at("actor_id").get<std::string>();
    e.event_name = j.at("event_name").get<std::string>();
    e.timestamp = parse_rfc3339(j.at("timestamp").get<std::string>());
    if (j.contains("properties")) e.properties = property_map_from_json(j.at("properties"));
    if (j.contains("context")) e.context = property_map_from_json(j.at("context"));
    return e;
}

Json raw_event_to_json(const RawEvent& e) {
    return Json{{"event_id", e.event_id},
                {"actor_id", e.actor_id},
                {"event_name", e.event_name},
                {"timestamp", format_rfc3339(e.timestamp)},
                {"properties", to_json(e.properties)},
                {"context", to_json(e.context)}};
}

namespace {

void sort_by_time_then_id(std::vector<RawEvent>& events) {
    std::stable_sort(events.begin(), events.end(), [](const RawEvent& a, const RawEvent& b) {
        if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
        return a.event_id < b.event_id;
    });
}

}  // namespace

NormalizeResult normalize_events(std::vector<RawEvent> events, Duration lag_tolerance,
                                 Instant now) {
    NormalizeResult out;
    for (auto& e : events) {
        if (e.event_id.empty()) {
            out.quarantined.push_back({raw_event_to_json(e), "empty_event_id"});
            continue;
        }
        if (now - e.timestamp > lag_tolerance) {
            out.quarantined.push_back({raw_event_to_json(e), "late"});
            continue;
        }
        out.accepted.push_back(std::move(e));
    }
    sort_by_time_then_id(out.accepted);
    return out;
}

NormalizeResult normalize_json_lines(const std::vector<Json>& lines, Duration lag_tolerance,
                                     Instant now) {
    NormalizeResult out;
    std::vector<RawEvent> typed;
    for (const auto& j : lines) {
        try {
            typed.push_back(raw_event_from_json(j));
        } catch (const Error& e) {
            const std::string reason =
                e.code() == "unparseable_timestamp" ? "unparseable_timestamp" : "malformed";
            out.quarantined.push_back({j, reason});
        } catch (const std::exception&) {
            out.quarantined.push_back({j, "malformed"});
        }
    }
    auto res = normalize_events(std::move(typed), lag_tolerance, now);
    out.accepted = std::move(res.accepted);
    for (auto& q : res.quarantined) out.quarantined.push_back(std::move(q));
    return out;
}

std::vector<RawEvent> deduplicate(const std::vector<RawEvent>& events,
                                  Duration idempotency_window) {
    std::vector<RawEvent> out;
    out.reserve(events.size());
    std::unordered_map<std::string, Instant> last_kept;
    for (const auto& e : events) {
        const auto it = last_kept.find(e.event_id);
        if (it != last_kept.end() && e.timestamp - it->second <= idempotency_window) continue;
        last_kept[e.event_id] = e.timestamp;
        out.push_back(e);
    }
    return out;
}

BotFilterResult filter_bots(const std::vector<RawEvent>& events, const BotRules& rules) {
    auto ua_hit = [&](const RawEvent& e) -> bool {
        const auto it = e.context.find("user_agent");
        if (it == e.context.end()) return false;
        const auto* ua = std::get_if<std::string>(&it->second);
        if (!ua) return false;
        for (const auto& sub : rules.ua_substrings)
            if (!sub.empty() && ua->find(sub) != std::string::npos) return true;
        return false;
    };

    // Pass 1: find actors whose sliding one-minute event count stays above
    // max_rate for at least `sustain`.
    std::unordered_map<std::string, std::vector<Instant>> per_actor;
    for (const auto& e : events) per_actor[e.actor_id].push_back(e.timestamp);

    std::unordered_set<std::string> rate_bots;
    const auto minute = Duration::minutes(1);
    for (auto& [actor, times] : per_actor) {
        std::sort(times.begin(), times.end());
        std::optional<Instant> hot_since;
        std::size_t lo = 0;
        for (std::size_t i = 0; i < times.size(); ++i) {
            while (times[i] - times[lo] >= minute) ++lo;
            const auto count = static_cast<double>(i - lo + 1);
            if (count > rules.max_rate_per_min) {
                if (!hot_since) hot_since = times[i];
                if (times[i] - *hot_since >= rules.sustain) {
                    rate_bots.insert(actor);
                    break;
                }
            } else {
                hot_since.reset();
            }
        }
    }

    BotFilterResult out;
    for (const auto& e : events) {
        if (rate_bots.count(e.actor_id)) {
            out.dropped.push_back({e, "rate_heuristic"});
        } else if (ua_hit(e)) {
            out.dropped.push_back({e, "ua_match"});
        } else {
            out.kept.push_back(e);
        }
    }
    return out;
}

IdentityResolution resolve_identities(const std::vector<RawEvent>& events,
                                      const std::set<std::string>& alias_event_names) {
    // Union-find over ids mentioned by alias events; first-seen instants are
    // collected in stream order for the canonical-id tie-break.
    std::unordered_map<std::string, std::string> parent;
    std::unordered_map<std::string, Instant> first_seen;
    std::unordered_set<std::string> authenticated;

    auto note_seen = [&](const std::string& id, Instant t) {
        const auto [it, inserted] = first_seen.try_emplace(id, t);
        if (!inserted && t < it->second) it->second = t;
    };

    std::function<std::string(const std::string&)> find = [&](const std::string& x) {
        auto it = parent.find(x);
        if (it == parent.end() || it->second == x) return x;
        const std::string root = find(it->second);
        parent[x] = root;
        return root;
    };
    auto unite = [&](const std::string& a, const std::string& b) {
        const std::string ra = find(a), rb = find(b);
        if (ra == rb) return;
        // Deterministic union: smaller root wins.
        if (ra < rb)
            parent[rb] = ra;
        else
            parent[ra] = rb;
        parent.try_emplace(ra, ra);
        parent.try_emplace(rb, rb);
    };

    for (const auto& e : events) {
        note_seen(e.actor_id, e.timestamp);
        if (!alias_event_names.count(e.event_name)) continue;
        const auto anon = e.properties.find("anonymous_id");
        const auto user = e.properties.find("user_id");
        if (anon == e.properties.end() || user == e.properties.end()) continue;
        const auto* aid = std::get_if<std::string>(&anon->second);
        const auto* uid = std::get_if<std::string>(&user->second);
        if (!aid || !uid || aid->empty() || uid->empty()) continue;
        note_seen(*aid, e.timestamp);
        note_seen(*uid, e.timestamp);
        authenticated.insert(*uid);
        parent.try_emplace(*aid, *aid);
        parent.try_emplace(*uid, *uid);
        unite(*aid, *uid);
    }

    // Group components and pick canonical ids.
    std::map<std::string, std::vector<std::string>> components;
    for (const auto& [id, _] : parent) components[find(id)].push_back(id);

    IdentityResolution res;
    for (auto& [root, members] : components) {
        std::sort(members.begin(), members.end());
        std::string canonical;
        Instant best{};
        int auth_count = 0;
        for (const auto& m : members) {
            if (!authenticated.count(m)) continue;
            ++auth_count;
            const Instant seen =
                first_seen.count(m) ? first_seen[m] : Instant{std::numeric_limits<std::int64_t>::max()};
            if (canonical.empty() || seen < best || (seen == best && m < canonical)) {
                canonical = m;
                best = seen;
            }
        }
        if (canonical.empty()) canonical = members.front();  // no authenticated id in component
        if (auth_count > 1) ++res.multi_user_components;
        for (const auto& m : members)
            if (m != canonical) res.alias_map[m] = canonical;
    }
    return res;
}

std::string canonical_id_for(const IdentityResolution& res, const std::string& actor_id) {
    const auto it = res.alias_map.find(actor_id);
    return it == res.alias_map.end() ? actor_id : it->second;
}

std::vector<NormalizedEvent> annotate_events(const std::vector<RawEvent>& events,
                                             const IdentityResolution& res, Instant now) {
    std::vector<NormalizedEvent> out;
    out.reserve(events.size());
    for (const auto& e : events) {
        NormalizedEvent n;
        static_cast<RawEvent&>(n) = e;
        n.canonical_actor_id = canonical_id_for(res, e.actor_id);
        n.ingestion_lag = now - e.timestamp;
        out.push_back(std::move(n));
    }
    return out;
}

std::vector<DerivedStateEvent> derive_semantic_states(const std::vector<NormalizedEvent>& events,
                                                      const StateRuleSet& rules) {
    std::vector<DerivedStateEvent> out;
    out.reserve(events.size());
    for (const auto& e : events) {
        const SemanticRule* hit = nullptr;
        for (const auto& r : rules.rules) {
            if (!glob_match(r.event_name_matcher, e.event_name)) continue;
            bool ok = true;
            for (const auto& c : r.conditions)
                if (!evaluate_condition(c, e.properties)) {
                    ok = false;
                    break;
                }
            if (ok) {
                hit = &r;
                break;
            }
        }
        if (hit) {
            out.push_back({e.canonical_actor_id, hit->state_id, StateLevel::Semantic, e.timestamp,
                           e.event_id});
        } else if (rules.fallback_mode == FallbackMode::RawEvent) {
            out.push_back(
                {e.canonical_actor_id, e.event_name, StateLevel::RawEvent, e.timestamp, e.event_id});
        }
    }
    return out;
}

std::vector<DerivedStateEvent> derive_lifecycle_states(
    const std::vector<DerivedStateEvent>& actor_history, const LifecycleRuleSet& rules,
    Instant window_end) {
    std::vector<DerivedStateEvent> out;
    if (actor_history.empty()) return out;

    const auto& first = actor_history.front();
    const Instant first_ts = first.timestamp;
    const Instant last_ts = actor_history.back().timestamp;
    const std::string actor = first.canonical_actor_id;

    auto emit = [&](LifecycleState s, Instant at, const std::string& source) {
        out.push_back({actor, to_string(s), StateLevel::Lifecycle, at, source});
    };

    for (const auto& r : rules.rules) {
        if (r.absence_for) {
            const Instant boundary = last_ts + *r.absence_for;
            if (boundary < window_end) emit(r.lifecycle_state, boundary, first.source_event_id);
            continue;
        }
        if (r.trigger == "first_event") {
            emit(r.lifecycle_state, first_ts, first.source_event_id);
            continue;
        }
        for (const auto& d : actor_history) {
            if (d.state_id != r.trigger) continue;
            if (r.within && d.timestamp - first_ts > *r.within) break;  // history is sorted
            emit(r.lifecycle_state, d.timestamp, d.source_event_id);
            break;
        }
    }

    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
        return a.state_id < b.state_id;
    });
    return out;
}

NsdResult run_nsd_events(std::vector<RawEvent> events, const PlatformConfig& cfg, Instant now,
                         Instant window_end) {
    NsdResult res;

    auto norm = normalize_events(std::move(events), cfg.ingest.lag_tolerance, now);
    res.quarantined = std::move(norm.quarantined);

    auto deduped = deduplicate(norm.accepted, cfg.ingest.idempotency_window);
    auto bots = filter_bots(deduped, cfg.ingest.bot);
    res.bot_dropped = std::move(bots.dropped);

    const std::set<std::string> alias_names(cfg.ingest.alias_event_names.begin(),
                                            cfg.ingest.alias_event_names.end());
    const auto ids = resolve_identities(bots.kept, alias_names);
    res.multi_user_components = ids.multi_user_components;
    res.normalized = annotate_events(bots.kept, ids, now);

    res.derived = derive_semantic_states(res.normalized, cfg.state_rules);

    // Actor property index (last write wins by timestamp; input is sorted).
    for (const auto& e : res.normalized)
        for (const auto& [k, v] : e.properties) res.actor_properties[e.canonical_actor_id][k] = v;

    // Lifecycle milestones, folded per actor over the derived history.
    std::map<std::string, std::vector<DerivedStateEvent>> by_actor;
    for (const auto& d : res.derived) by_actor[d.canonical_actor_id].push_back(d);
    std::vector<DerivedStateEvent> lifecycle;
    for (const auto& [actor, history] : by_actor) {
        (void)actor;
        auto emitted = derive_lifecycle_states(history, cfg.lifecycle_rules, window_end);
        lifecycle.insert(lifecycle.end(), emitted.begin(), emitted.end());
    }
    res.derived.insert(res.derived.end(), lifecycle.begin(), lifecycle.end());
    std::stable_sort(res.derived.begin(), res.derived.end(), [](const auto& a, const auto& b) {
        if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
        if (a.source_event_id != b.source_event_id) return a.source_event_id < b.source_event_id;
        return a.state_id < b.state_id;
    });
    return res;
}

NsdResult run_nsd(const std::vector<Json>& raw_lines, const PlatformConfig& cfg, Instant now,
                  Instant window_end) {
    NsdResult res;
    auto norm = normalize_json_lines(raw_lines, cfg.ingest.lag_tolerance, now);
    auto rest = run_nsd_events(std::move(norm.accepted), cfg, now, window_end);
    // normalize_json_lines already applied the lag filter; merge quarantines.
    for (auto& q : norm.quarantined) rest.quarantined.push_back(std::move(q));
    return rest;
}

Json derived_to_json(const DerivedStateEvent& d) {
    return Json{{"canonical_actor_id", d.canonical_actor_id},
                {"state_id", d.state_id},
                {"level", to_string(d.level)},
                {"timestamp", format_rfc3339(d.timestamp)},
                {"source_event_id", d.source_event_id}};
}

DerivedStateEvent derived_from_json(const Json& j) {
    return DerivedStateEvent{j.at("canonical_actor_id").get<std::string>(),
                             j.at("state_id").get<std::string>(),
                             state_level_from_string(j.at("level").get<std::string>()),
                             parse_rfc3339(j.at("timestamp").get<std::string>()),
                             j.at("source_event_id").get<std::string>()};
}

Json normalized_to_json(const NormalizedEvent& e) {
    Json j = raw_event_to_json(e);
    j["canonical_actor_id"] = e.canonical_actor_id;
    j["ingestion_lag_ms"] = e.ingestion_lag.ms;
    return j;
}

NormalizedEvent normalized_from_json(const Json& j) {
    NormalizedEvent n;
    static_cast<RawEvent&>(n) = raw_event_from_json(j);
    n.canonical_actor_id = j.at("canonical_actor_id").get<std::string>();
    n.ingestion_lag = Duration{j.at("ingestion_lag_ms").get<std::int64_t>()};
    return n;
}

}  // namespace pathlens
