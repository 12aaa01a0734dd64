#include <doctest.h>

#include <random>

#include "pathlens/error.hpp"
#include "pathlens/markov.hpp"
#include "pathlens/snapshot.hpp"

using namespace pathlens;

namespace {

const Instant t0 = parse_rfc3339("2024-01-01T00:00:00Z");
const TimeWindow week{t0, t0 + Duration::days(7)};

JourneyDefinition funnel_def() {
    JourneyDefinition def;
    def.journey_id = "activation_funnel";
    def.start_states = {"sign_up"};
    def.terminal_map = {{"converted", TerminalOutcome::Converted},
                        {"dropped_off", TerminalOutcome::DroppedOff}};
    def.inactivity_timeout = Duration::days(30);
    def.timeout_outcome = TerminalOutcome::DroppedOff;
    def.session_gap = Duration::hours(2);
    return def;
}

DerivedStateEvent dse(const std::string& actor, const std::string& state, Instant t,
                      const std::string& src) {
    return {actor, state, StateLevel::Semantic, t, src};
}

std::vector<DerivedStateEvent> actor_walk(const std::string& actor,
                                          const std::vector<std::string>& states, Instant start,
                                          Duration step = Duration::minutes(1)) {
    std::vector<DerivedStateEvent> out;
    Instant t = start;
    int i = 0;
    for (const auto& s : states) {
        out.push_back(dse(actor, s, t, actor + "_" + std::to_string(i++)));
        t = t + step;
    }
    return out;
}

}  // namespace

TEST_CASE("journey extraction: terminal, timeout and censoring") {
    const auto def = funnel_def();

    SUBCASE("a walk ending in converted yields two transient visits") {
        auto derived = actor_walk("a", {"sign_up", "feature_used", "converted"}, t0);
        const auto js = extract_journeys(derived, def, week);
        REQUIRE(js.size() == 1);
        CHECK(js[0].outcome == TerminalOutcome::Converted);
        REQUIRE(js[0].visits.size() == 2);
        CHECK(js[0].visits[0].state_id == "sign_up");
        CHECK(js[0].visits[1].state_id == "feature_used");
    }

    SUBCASE("31 days of silence with a 30-day timeout maps to the timeout outcome") {
        auto def31 = def;
        std::vector<DerivedStateEvent> derived{dse("a", "sign_up", t0, "e0")};
        TimeWindow wide{t0, t0 + Duration::days(40)};
        const auto js = extract_journeys(derived, def31, wide);
        REQUIRE(js.size() == 1);
        CHECK(js[0].outcome == TerminalOutcome::DroppedOff);
        CHECK(js[0].outcome_at == t0 + Duration::days(30));
    }

    SUBCASE("window ending soon after the last visit leaves the journey censored") {
        std::vector<DerivedStateEvent> derived =
            actor_walk("a", {"sign_up", "feature_used"}, t0);
        TimeWindow tight{t0, t0 + Duration::hours(1)};
        const auto js = extract_journeys(derived, def, tight);
        REQUIRE(js.size() == 1);
        CHECK_FALSE(js[0].outcome.has_value());
    }

    SUBCASE("consecutive identical states collapse to the first timestamp") {
        auto derived = actor_walk("a", {"sign_up", "sign_up", "feature_used", "converted"}, t0);
        const auto js = extract_journeys(derived, def, week);
        REQUIRE(js.size() == 1);
        REQUIRE(js[0].visits.size() == 2);
        CHECK(js[0].visits[0].timestamp == t0);
    }

    SUBCASE("events before the first start state are skipped") {
        auto derived = actor_walk("a", {"feature_used", "sign_up", "converted"}, t0);
        const auto js = extract_journeys(derived, def, week);
        REQUIRE(js.size() == 1);
        CHECK(js[0].visits.size() == 1);
        CHECK(js[0].visits[0].state_id == "sign_up");
    }

    SUBCASE("an actor can produce several journeys in one session") {
        auto derived = actor_walk(
            "a", {"sign_up", "converted", "sign_up", "feature_used", "dropped_off"}, t0);
        const auto js = extract_journeys(derived, def, week);
        REQUIRE(js.size() == 2);
        CHECK(js[0].outcome == TerminalOutcome::Converted);
        CHECK(js[1].outcome == TerminalOutcome::DroppedOff);
    }

    SUBCASE("lifecycle-level events never appear as journey visits") {
        std::vector<DerivedStateEvent> derived{
            {"a", "new_user", StateLevel::Lifecycle, t0, "e0"},
            dse("a", "sign_up", t0, "e1"),
            dse("a", "converted", t0 + Duration::minutes(1), "e2")};
        const auto js = extract_journeys(derived, def, week);
        REQUIRE(js.size() == 1);
        CHECK(js[0].visits.size() == 1);
        CHECK(js[0].visits[0].state_id == "sign_up");
    }

    SUBCASE("actors with no start state yield no journeys") {
        auto derived = actor_walk("a", {"feature_used", "import_data"}, t0);
        CHECK(extract_journeys(derived, def, week).empty());
    }
}

TEST_CASE("single converted journey produces a trivial snapshot") {
    auto derived = actor_walk("a", {"sign_up", "converted"}, t0);
    const auto js = extract_journeys(derived, funnel_def(), week);
    const auto snap = build_snapshot(js, funnel_def(), week, nullptr, {}, 20);
    REQUIRE(snap.states == std::vector<std::string>{"sign_up"});
    CHECK(snap.q(0, 0) == 0.0);
    const int conv = snap.outcome_index(TerminalOutcome::Converted);
    CHECK(snap.r(0, conv) == doctest::Approx(1.0));
    CHECK(snap.n_journeys == 1);
    CHECK(snap.reach.at("sign_up") == doctest::Approx(1.0));
}

TEST_CASE("censored journeys contribute transient edges but no absorbing mass") {
    std::vector<DerivedStateEvent> derived;
    auto a = actor_walk("a", {"sign_up", "feature_used", "sign_up", "feature_used"}, t0);
    derived.insert(derived.end(), a.begin(), a.end());
    TimeWindow tight{t0, t0 + Duration::hours(1)};
    const auto js = extract_journeys(derived, funnel_def(), tight);
    REQUIRE(js.size() == 1);
    REQUIRE_FALSE(js[0].outcome.has_value());

    const auto snap = build_snapshot(js, funnel_def(), tight, nullptr, {}, 20);
    for (std::size_t i = 0; i < snap.states.size(); ++i) {
        double rsum = 0;
        for (std::size_t k = 0; k < snap.absorbing.size(); ++k)
            rsum += snap.r(static_cast<int>(i), static_cast<int>(k));
        CHECK(rsum == 0.0);
    }
    CHECK(snap.edge_count("sign_up", "feature_used") == 2);
    CHECK(snap.edge_count("feature_used", "sign_up") == 1);
}

TEST_CASE("row-stochasticity holds for every state with outgoing observations") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> len(1, 8);
    std::uniform_int_distribution<int> st(0, 3);
    std::uniform_int_distribution<int> oc(0, 2);
    const std::vector<std::string> names{"sign_up", "feature_used", "import_data",
                                         "invite_teammate"};

    std::vector<DerivedStateEvent> derived;
    for (int a = 0; a < 200; ++a) {
        std::vector<std::string> walk{"sign_up"};
        const int L = len(rng);
        for (int i = 0; i < L; ++i) walk.push_back(names[static_cast<std::size_t>(st(rng))]);
        const int o = oc(rng);
        if (o == 0)
            walk.push_back("converted");
        else if (o == 1)
            walk.push_back("dropped_off");
        auto events = actor_walk("a" + std::to_string(a), walk, t0 + Duration::seconds(a));
        derived.insert(derived.end(), events.begin(), events.end());
    }
    const auto js = extract_journeys(derived, funnel_def(), week);
    REQUIRE_FALSE(js.empty());
    const auto snap = build_snapshot(js, funnel_def(), week, nullptr, {}, 20);

    for (std::size_t i = 0; i < snap.states.size(); ++i) {
        if (snap.out_total(snap.states[i]) == 0) continue;
        double sum = 0;
        for (std::size_t j = 0; j < snap.states.size(); ++j)
            sum += snap.q(static_cast<int>(i), static_cast<int>(j));
        for (std::size_t k = 0; k < snap.absorbing.size(); ++k)
            sum += snap.r(static_cast<int>(i), static_cast<int>(k));
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }

    SUBCASE("snapshot id reproduces from stored contents") {
        CHECK(compute_snapshot_id(snap) == snap.snapshot_id);
    }

    SUBCASE("snapshot json round-trips") {
        const auto j = snapshot_to_json(snap);
        const auto back = snapshot_from_json(j);
        CHECK(snapshot_to_json(back).dump() == j.dump());
        CHECK(compute_snapshot_id(back) == snap.snapshot_id);
    }

    SUBCASE("an explicit match-everything segment equals the unsegmented snapshot byte for byte") {
        SegmentDefinition all;
        all.segment_id = "all";
        const auto seg_snap = build_snapshot(js, funnel_def(), week, &all, {}, 20);
        CHECK(snapshot_to_json(seg_snap).dump() == snapshot_to_json(snap).dump());
    }

    SUBCASE("path occurrences sum to n_journeys when top_n is large enough") {
        const auto paths = materialize_paths(js, 1000000);
        std::int64_t total = 0;
        for (const auto& p : paths) total += p.occurrence;
        CHECK(total == snap.n_journeys);
        const auto few = materialize_paths(js, 3);
        std::int64_t partial = 0;
        for (const auto& p : few) partial += p.occurrence;
        CHECK(partial <= total);
    }
}

TEST_CASE("reach rates") {
    std::vector<DerivedStateEvent> derived;
    auto a = actor_walk("a", {"sign_up", "feature_used", "converted"}, t0);
    auto b = actor_walk("b", {"sign_up", "dropped_off"}, t0);
    derived.insert(derived.end(), a.begin(), a.end());
    derived.insert(derived.end(), b.begin(), b.end());
    const auto js = extract_journeys(derived, funnel_def(), week);
    const auto reach = reach_rates(js);
    CHECK(reach.at("sign_up") == doctest::Approx(1.0));
    CHECK(reach.at("feature_used") == doctest::Approx(0.5));
    CHECK(reach.count("import_data") == 0);
}

TEST_CASE("path materialization groups, ranks and breaks ties") {
    std::vector<DerivedStateEvent> derived;
    for (int i = 0; i < 3; ++i) {
        auto w = actor_walk("c" + std::to_string(i), {"sign_up", "feature_used", "converted"},
                            t0 + Duration::seconds(i));
        derived.insert(derived.end(), w.begin(), w.end());
    }
    for (int i = 0; i < 2; ++i) {
        auto w = actor_walk("d" + std::to_string(i), {"sign_up", "feature_used", "dropped_off"},
                            t0 + Duration::seconds(10 + i));
        derived.insert(derived.end(), w.begin(), w.end());
    }
    auto w = actor_walk("e", {"sign_up", "dropped_off"}, t0 + Duration::minutes(1));
    derived.insert(derived.end(), w.begin(), w.end());

    const auto js = extract_journeys(derived, funnel_def(), week);
    const auto paths = materialize_paths(js, 10);
    REQUIRE(paths.size() == 3);

    CHECK(paths[0].states == std::vector<std::string>{"sign_up", "feature_used"});
    CHECK(paths[0].outcome == TerminalOutcome::Converted);
    CHECK(paths[0].occurrence == 3);
    CHECK(paths[0].sequence_total == 5);
    CHECK(paths[0].conversion_rate == doctest::Approx(0.6));

    CHECK(paths[1].occurrence == 2);
    CHECK(paths[1].outcome == TerminalOutcome::DroppedOff);
    CHECK(paths[1].conversion_rate == doctest::Approx(0.6));  // same sequence across outcomes

    CHECK(paths[2].occurrence == 1);

    SUBCASE("top_n = 1 keeps only the highest-occurrence path") {
        const auto top = materialize_paths(js, 1);
        REQUIRE(top.size() == 1);
        CHECK(top[0].occurrence == 3);
    }

    SUBCASE("identical sequences merge into one path entry") {
        std::map<std::pair<std::string, std::string>, int> seen;
        for (const auto& p : paths) {
            std::string key;
            for (const auto& s : p.states) key += s + ">";
            ++seen[{key, p.outcome ? to_string(*p.outcome) : ""}];
        }
        for (const auto& [k, c] : seen) CHECK(c == 1);
    }
}

TEST_CASE("zero journeys raise empty_snapshot") {
    try {
        build_snapshot({}, funnel_def(), week, nullptr, {}, 20);
        FAIL("expected empty_snapshot");
    } catch (const Error& e) {
        CHECK(e.code() == "empty_snapshot");
    }
}

TEST_CASE("segment filter scopes journeys by actor properties") {
    std::vector<DerivedStateEvent> derived;
    auto a = actor_walk("mob", {"sign_up", "converted"}, t0);
    auto b = actor_walk("desk", {"sign_up", "dropped_off"}, t0);
    derived.insert(derived.end(), a.begin(), a.end());
    derived.insert(derived.end(), b.begin(), b.end());
    const auto js = extract_journeys(derived, funnel_def(), week);

    std::map<std::string, PropertyMap> props{
        {"mob", {{"platform", std::string("mobile")}}},
        {"desk", {{"platform", std::string("desktop")}}}};
    SegmentDefinition mobile;
    mobile.segment_id = "mobile";
    mobile.conditions.push_back({"platform", ConditionOp::Equals, std::string("mobile"), {}});

    const auto snap = build_snapshot(js, funnel_def(), week, &mobile, props, 20);
    CHECK(snap.segment_id == "mobile");
    CHECK(snap.n_journeys == 1);
    const int conv = snap.outcome_index(TerminalOutcome::Converted);
    CHECK(snap.r(snap.state_index("sign_up"), conv) == doctest::Approx(1.0));
}

TEST_CASE("chain built from a snapshot matches its matrices") {
    auto derived = actor_walk("a", {"sign_up", "feature_used", "converted"}, t0);
    auto b = actor_walk("b", {"sign_up", "dropped_off"}, t0);
    derived.insert(derived.end(), b.begin(), b.end());
    const auto js = extract_journeys(derived, funnel_def(), week);
    const auto snap = build_snapshot(js, funnel_def(), week, nullptr, {}, 20);
    const auto chain = chain_from_snapshot(snap);
    REQUIRE(chain.transient == snap.states);
    const int i = snap.state_index("sign_up");
    const int j = snap.state_index("feature_used");
    CHECK(chain.Q(i, j) == doctest::Approx(0.5));
}
