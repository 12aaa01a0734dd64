#pragma once

// Shared detector-level fixtures: simulated funnel slices and hand-built
// journeys.

#include <string>
#include <vector>

#include "pathlens/config.hpp"
#include "pathlens/detectors.hpp"
#include "pathlens/pipeline.hpp"
#include "pathlens/simulator.hpp"

namespace fixtures {

using namespace pathlens;

inline const Instant kT0 = parse_rfc3339("2024-01-01T06:00:00Z");
inline const TimeWindow kWeek{parse_rfc3339("2024-01-01T00:00:00Z"),
                              parse_rfc3339("2024-01-08T00:00:00Z")};

inline PlatformConfig demo_config() { return load_config("fixtures/demo_config.json"); }

inline ChainSpec demo_chain_spec(std::uint64_t seed) {
    auto spec = load_chain_spec("fixtures/demo_funnel.json");
    spec.seed = seed;
    return spec;
}

struct FunnelFixture {
    PlatformConfig cfg;
    SnapshotSlice slice;
    ChainMetrics metrics;
};

// Simulated funnel pushed through the real NSD + extraction + snapshot path.
inline FunnelFixture simulated_funnel(std::int64_t n, std::uint64_t seed) {
    FunnelFixture fx;
    fx.cfg = demo_config();
    const auto sim = simulate_trajectories(demo_chain_spec(seed), n, kT0,
                                           Duration::millis(500));
    const auto nsd = run_nsd_events(sim.events, fx.cfg, kWeek.end, kWeek.end);
    PipelineOptions opt;
    opt.window = kWeek;
    auto wc = compute_window(fx.cfg, nsd.derived, nsd.actor_properties, opt);
    fx.slice = std::move(wc.all);
    fx.metrics = std::move(wc.metrics);
    return fx;
}

inline JourneyInstance journey_of(const std::string& actor,
                                  const std::vector<std::string>& states,
                                  std::optional<TerminalOutcome> outcome,
                                  Instant start = kT0,
                                  Duration step = Duration::minutes(1)) {
    JourneyInstance j;
    j.canonical_actor_id = actor;
    Instant t = start;
    for (const auto& s : states) {
        if (j.visits.empty() || j.visits.back().state_id != s) j.visits.push_back({s, t});
        t = t + step;
    }
    j.outcome = outcome;
    j.outcome_at = t;
    j.window_id = kWeek.id();
    return j;
}

inline JourneyDefinition generic_def(const std::string& start) {
    JourneyDefinition def;
    def.journey_id = "j";
    def.start_states = {start};
    def.terminal_map = {{"converted_state", TerminalOutcome::Converted},
                        {"dropped_state", TerminalOutcome::DroppedOff}};
    def.inactivity_timeout = Duration::days(30);
    def.timeout_outcome = TerminalOutcome::DroppedOff;
    def.session_gap = Duration::hours(2);
    return def;
}

inline SnapshotSlice slice_of(const std::vector<JourneyInstance>& journeys,
                              const JourneyDefinition& def, const std::string& segment_id = "all",
                              int top_n = 20) {
    auto snap = build_snapshot(journeys, def, kWeek, nullptr, {}, top_n);
    if (segment_id != "all") {
        snap.segment_id = segment_id;
        snap.snapshot_id = compute_snapshot_id(snap);
    }
    return SnapshotSlice::make(std::move(snap), journeys);
}

}  // namespace fixtures
