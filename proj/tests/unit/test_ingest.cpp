#include <doctest.h>

#include <set>

#include "pathlens/error.hpp"
#include "pathlens/ingest.hpp"

using namespace pathlens;

namespace {

RawEvent ev(const std::string& id, const std::string& actor, const std::string& name, Instant t,
            PropertyMap props = {}, PropertyMap ctx = {}) {
    return RawEvent{id, actor, name, t, std::move(props), std::move(ctx)};
}

const Instant t0 = parse_rfc3339("2024-01-02T00:00:00Z");

}  // namespace

TEST_CASE("deduplicate keeps the first of a close same-id pair") {
    std::vector<RawEvent> events{ev("X", "a", "click", t0),
                                 ev("X", "a", "click", t0 + Duration::seconds(1))};
    const auto out = deduplicate(events, Duration::minutes(5));
    CHECK(out.size() == 1);
    CHECK(out[0].timestamp == t0);
}

TEST_CASE("duplicates beyond the idempotency window both survive") {
    std::vector<RawEvent> events{ev("X", "a", "click", t0),
                                 ev("X", "a", "click", t0 + Duration::minutes(10))};
    CHECK(deduplicate(events, Duration::minutes(5)).size() == 2);
}

TEST_CASE("unique ids pass through unchanged and in order") {
    std::vector<RawEvent> events;
    for (int i = 0; i < 1000; ++i)
        events.push_back(ev("e" + std::to_string(i), "a", "click", t0 + Duration::seconds(i)));
    const auto out = deduplicate(events, Duration::minutes(5));
    REQUIRE(out.size() == 1000);
    for (int i = 0; i < 1000; ++i) CHECK(out[static_cast<std::size_t>(i)].event_id == events[static_cast<std::size_t>(i)].event_id);
}

TEST_CASE("dedup never reorders survivors") {
    std::vector<RawEvent> events;
    for (int i = 0; i < 200; ++i)
        events.push_back(
            ev("id" + std::to_string(i % 50), "a", "click", t0 + Duration::minutes(6 * i)));
    const auto out = deduplicate(events, Duration::minutes(5));
    for (std::size_t i = 1; i < out.size(); ++i)
        CHECK(out[i - 1].timestamp <= out[i].timestamp);
}

TEST_CASE("bot filtering by user agent and by sustained rate") {
    BotRules rules;
    rules.ua_substrings = {"HealthCheck"};
    rules.max_rate_per_min = 300;
    rules.sustain = Duration::minutes(2);

    SUBCASE("ua substring match drops the event") {
        std::vector<RawEvent> events{
            ev("1", "a", "ping", t0, {}, {{"user_agent", std::string("HealthCheck/1.0")}})};
        const auto res = filter_bots(events, rules);
        CHECK(res.kept.empty());
        REQUIRE(res.dropped.size() == 1);
        CHECK(res.dropped[0].reason == "ua_match");
    }

    SUBCASE("sustained 600 events per minute drops the whole actor") {
        std::vector<RawEvent> events;
        // 600/min for 5 minutes: one event every 100ms.
        for (int i = 0; i < 3000; ++i)
            events.push_back(ev("b" + std::to_string(i), "bot", "spam", t0 + Duration::millis(100 * i)));
        events.push_back(ev("ok", "human", "click", t0));
        const auto res = filter_bots(events, rules);
        CHECK(res.kept.size() == 1);
        CHECK(res.kept[0].actor_id == "human");
        CHECK(res.dropped.size() == 3000);
        for (const auto& d : res.dropped) CHECK(d.reason == "rate_heuristic");
    }

    SUBCASE("a normal actor at 2 events per minute is kept") {
        std::vector<RawEvent> events;
        for (int i = 0; i < 20; ++i)
            events.push_back(ev("n" + std::to_string(i), "a", "click", t0 + Duration::seconds(30 * i)));
        const auto res = filter_bots(events, rules);
        CHECK(res.dropped.empty());
        CHECK(res.kept.size() == 20);
    }
}

TEST_CASE("identity resolution stitches anonymous sessions to users") {
    const std::set<std::string> alias{"identify"};

    SUBCASE("anonymous id aliases to the authenticated user") {
        std::vector<RawEvent> events{
            ev("1", "anonA", "page_view", t0),
            ev("2", "anonA", "identify", t0 + Duration::seconds(5),
               {{"anonymous_id", std::string("anonA")}, {"user_id", std::string("U")}}),
            ev("3", "U", "click", t0 + Duration::seconds(9))};
        const auto res = resolve_identities(events, alias);
        CHECK(canonical_id_for(res, "anonA") == "U");
        CHECK(canonical_id_for(res, "U") == "U");
        CHECK(res.multi_user_components == 0);
    }

    SUBCASE("two users linked through one anonymous id collapse to the earliest-seen") {
        std::vector<RawEvent> events{
            ev("1", "U1", "click", t0),  // U1 first seen day 1
            ev("2", "anonA", "identify", t0 + Duration::days(1),
               {{"anonymous_id", std::string("anonA")}, {"user_id", std::string("U1")}}),
            ev("3", "anonA", "identify", t0 + Duration::days(2),
               {{"anonymous_id", std::string("anonA")}, {"user_id", std::string("U2")}})};
        const auto res = resolve_identities(events, alias);
        CHECK(canonical_id_for(res, "anonA") == "U1");
        CHECK(canonical_id_for(res, "U2") == "U1");
        CHECK(res.multi_user_components == 1);
    }

    SUBCASE("no alias events leaves the identity mapping") {
        std::vector<RawEvent> events{ev("1", "a", "click", t0), ev("2", "b", "click", t0)};
        const auto res = resolve_identities(events, alias);
        CHECK(res.alias_map.empty());
        CHECK(canonical_id_for(res, "a") == "a");
    }

    SUBCASE("resolution is deterministic across repeated runs") {
        std::vector<RawEvent> events;
        for (int i = 0; i < 30; ++i) {
            events.push_back(ev("a" + std::to_string(i), "anon" + std::to_string(i % 7),
                                "identify", t0 + Duration::seconds(i),
                                {{"anonymous_id", std::string("anon" + std::to_string(i % 7))},
                                 {"user_id", std::string("U" + std::to_string(i % 3))}}));
        }
        const auto r1 = resolve_identities(events, alias);
        const auto r2 = resolve_identities(events, alias);
        CHECK(r1.alias_map == r2.alias_map);
    }
}

TEST_CASE("normalize handles lag, ties and unparseable rows") {
    const Instant now = t0 + Duration::days(3);

    SUBCASE("an event one hour old is accepted; 48h beyond tolerance is quarantined") {
        std::vector<RawEvent> events{ev("fresh", "a", "click", now - Duration::hours(1)),
                                     ev("stale", "a", "click", now - Duration::hours(48))};
        const auto res = normalize_events(events, Duration::hours(24), now);
        REQUIRE(res.accepted.size() == 1);
        CHECK(res.accepted[0].event_id == "fresh");
        REQUIRE(res.quarantined.size() == 1);
        CHECK(res.quarantined[0].reason == "late");
    }

    SUBCASE("equal timestamps order by event id") {
        std::vector<RawEvent> events{ev("b", "a", "click", t0), ev("a", "a", "click", t0)};
        const auto res = normalize_events(events, Duration::days(30), now);
        CHECK(res.accepted[0].event_id == "a");
        CHECK(res.accepted[1].event_id == "b");
    }

    SUBCASE("unparseable timestamps are quarantined with a reason, never dropped") {
        std::vector<Json> lines{
            Json{{"event_id", "x"},
                 {"actor_id", "a"},
                 {"event_name", "click"},
                 {"timestamp", "not-a-time"}},
            raw_event_to_json(ev("ok", "a", "click", now - Duration::hours(1)))};
        const auto res = normalize_json_lines(lines, Duration::days(2), now);
        CHECK(res.accepted.size() == 1);
        REQUIRE(res.quarantined.size() == 1);
        CHECK(res.quarantined[0].reason == "unparseable_timestamp");
    }
}

TEST_CASE("semantic state derivation, first match wins") {
    StateRuleSet rules;
    rules.rules.push_back({"r1", "import_data", "button_click",
                           {{"button", ConditionOp::Equals, std::string("import"), {}}}});
    rules.rules.push_back({"r2", "any_click", "button_click", {}});
    rules.fallback_mode = FallbackMode::RawEvent;

    std::vector<NormalizedEvent> events;
    NormalizedEvent e;
    static_cast<RawEvent&>(e) = ev("1", "a", "button_click", t0,
                                   {{"button", std::string("import")}});
    e.canonical_actor_id = "a";
    events.push_back(e);
    static_cast<RawEvent&>(e) = ev("2", "a", "button_click", t0 + Duration::seconds(1),
                                   {{"button", std::string("other")}});
    events.push_back(e);
    static_cast<RawEvent&>(e) = ev("3", "a", "page_view", t0 + Duration::seconds(2));
    events.push_back(e);

    const auto out = derive_semantic_states(events, rules);
    REQUIRE(out.size() == 3);
    CHECK(out[0].state_id == "import_data");
    CHECK(out[0].level == StateLevel::Semantic);
    CHECK(out[1].state_id == "any_click");
    CHECK(out[2].state_id == "page_view");
    CHECK(out[2].level == StateLevel::RawEvent);
    for (std::size_t i = 0; i < out.size(); ++i)
        CHECK(out[i].source_event_id == events[i].event_id);
}

TEST_CASE("drop fallback removes unmatched events") {
    StateRuleSet rules;
    rules.rules.push_back({"r1", "s", "known", {}});
    rules.fallback_mode = FallbackMode::Drop;
    NormalizedEvent e;
    static_cast<RawEvent&>(e) = ev("1", "a", "unknown", t0);
    e.canonical_actor_id = "a";
    CHECK(derive_semantic_states({e}, rules).empty());
}

TEST_CASE("a 200-name corpus with 20 rules compresses into few semantic states") {
    StateRuleSet rules;
    for (int r = 0; r < 20; ++r)
        rules.rules.push_back({"r" + std::to_string(r), "topic_" + std::to_string(r),
                               "event_" + std::to_string(r) + "*", {}});
    rules.fallback_mode = FallbackMode::Drop;

    std::vector<NormalizedEvent> events;
    for (int i = 0; i < 200; ++i) {
        NormalizedEvent e;
        static_cast<RawEvent&>(e) =
            ev("e" + std::to_string(i), "a", "event_" + std::to_string(i % 20) + "_v" + std::to_string(i),
               t0 + Duration::seconds(i));
        e.canonical_actor_id = "a";
        events.push_back(e);
    }
    const auto out = derive_semantic_states(events, rules);
    std::set<std::string> ids;
    for (const auto& d : out) {
        CHECK(d.level == StateLevel::Semantic);
        ids.insert(d.state_id);
    }
    CHECK(ids.size() <= 30);
}

TEST_CASE("lifecycle milestones fold over an actor history") {
    LifecycleRuleSet rules;
    rules.rules.push_back({LifecycleState::NewUser, "first_event", std::nullopt, std::nullopt});
    rules.rules.push_back({LifecycleState::Activated, "import_data", Duration::days(7), std::nullopt});
    rules.rules.push_back({LifecycleState::Churned, "", std::nullopt, Duration::days(30)});

    std::vector<DerivedStateEvent> history{
        {"a", "sign_up", StateLevel::Semantic, t0, "e1"},
        {"a", "import_data", StateLevel::Semantic, t0 + Duration::days(2), "e2"},
        {"a", "browse", StateLevel::Semantic, t0 + Duration::days(3), "e3"}};

    SUBCASE("new_user at the first event, activated at the trigger") {
        const auto out = derive_lifecycle_states(history, rules, t0 + Duration::days(10));
        REQUIRE(out.size() == 2);
        CHECK(out[0].state_id == "new_user");
        CHECK(out[0].timestamp == t0);
        CHECK(out[1].state_id == "activated");
        CHECK(out[1].timestamp == t0 + Duration::days(2));
    }

    SUBCASE("churned fires at the absence boundary when the window extends past it") {
        const auto out = derive_lifecycle_states(history, rules, t0 + Duration::days(40));
        REQUIRE(out.size() == 3);
        CHECK(out.back().state_id == "churned");
        CHECK(out.back().timestamp == t0 + Duration::days(33));
    }

    SUBCASE("a trigger outside the within window never fires") {
        auto late = history;
        late[1].timestamp = t0 + Duration::days(9);
        late[2].timestamp = t0 + Duration::days(9) + Duration::hours(1);
        const auto out = derive_lifecycle_states(late, rules, t0 + Duration::days(10));
        REQUIRE(out.size() == 1);
        CHECK(out[0].state_id == "new_user");
    }

    SUBCASE("emissions are monotone in time") {
        const auto out = derive_lifecycle_states(history, rules, t0 + Duration::days(40));
        for (std::size_t i = 1; i < out.size(); ++i)
            CHECK(out[i - 1].timestamp <= out[i].timestamp);
    }
}

namespace {

PlatformConfig tiny_config() {
    PlatformConfig cfg;
    JourneyDefinition def;
    def.journey_id = "j";
    def.start_states = {"s"};
    def.terminal_map = {{"t", TerminalOutcome::Converted}};
    def.inactivity_timeout = Duration::days(30);
    def.session_gap = Duration::hours(2);
    cfg.journeys.push_back(def);
    cfg.state_rules.fallback_mode = FallbackMode::RawEvent;
    cfg.ingest.bot.ua_substrings = {"HealthCheck"};
    return cfg;
}

}  // namespace

TEST_CASE("running the cleaning pass on its own output changes nothing") {
    auto cfg = tiny_config();
    const Instant now = t0 + Duration::days(1);

    std::vector<RawEvent> events;
    for (int i = 0; i < 50; ++i)
        events.push_back(ev("e" + std::to_string(i % 40), "actor" + std::to_string(i % 5), "click",
                            t0 + Duration::seconds(i)));
    events.push_back(ev("al", "anon1", "identify", t0 + Duration::minutes(2),
                        {{"anonymous_id", std::string("anon1")}, {"user_id", std::string("U")}}));

    const auto first = run_nsd_events(events, cfg, now, now);
    std::vector<RawEvent> cleaned;
    for (const auto& n : first.normalized) {
        RawEvent e = n;
        e.actor_id = n.canonical_actor_id;  // resolution already applied
        cleaned.push_back(e);
    }
    const auto second = run_nsd_events(cleaned, cfg, now, now);

    REQUIRE(first.normalized.size() == second.normalized.size());
    for (std::size_t i = 0; i < first.normalized.size(); ++i) {
        CHECK(first.normalized[i].event_id == second.normalized[i].event_id);
        CHECK(first.normalized[i].canonical_actor_id == second.normalized[i].canonical_actor_id);
        CHECK(first.normalized[i].timestamp == second.normalized[i].timestamp);
    }
    REQUIRE(first.derived.size() == second.derived.size());
    for (std::size_t i = 0; i < first.derived.size(); ++i) {
        CHECK(first.derived[i].state_id == second.derived[i].state_id);
        CHECK(first.derived[i].source_event_id == second.derived[i].source_event_id);
    }
}

TEST_CASE("every derived event traces back to exactly one normalized event") {
    auto cfg = tiny_config();
    const Instant now = t0 + Duration::days(1);
    std::vector<RawEvent> events;
    for (int i = 0; i < 100; ++i)
        events.push_back(
            ev("e" + std::to_string(i), "a" + std::to_string(i % 7), "n" + std::to_string(i % 3),
               t0 + Duration::seconds(i)));
    const auto res = run_nsd_events(events, cfg, now, now);

    std::map<std::string, int> id_count;
    for (const auto& n : res.normalized) ++id_count[n.event_id];
    for (const auto& d : res.derived) {
        REQUIRE(id_count.count(d.source_event_id));
        CHECK(id_count[d.source_event_id] == 1);
    }
}

TEST_CASE("nsd output is byte-deterministic across runs") {
    auto cfg = tiny_config();
    const Instant now = t0 + Duration::days(1);
    std::vector<RawEvent> events;
    for (int i = 0; i < 60; ++i)
        events.push_back(ev("e" + std::to_string(i), "a" + std::to_string(i % 4), "click",
                            t0 + Duration::seconds(i % 13)));

    auto dump = [&]() {
        const auto res = run_nsd_events(events, cfg, now, now);
        std::string bytes;
        for (const auto& d : res.derived) bytes += derived_to_json(d).dump() + "\n";
        return bytes;
    };
    CHECK(dump() == dump());
}
