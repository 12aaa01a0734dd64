#pragma once

#include <random>

#include "pathlens/types.hpp"

namespace pathlens {

// Seeded synthetic journey generator over an explicit absorbing chain. The
// generator algorithm is pinned (std::mt19937_64 with the draws documented in
// the implementation): one seed, one byte-identical event stream per build.
struct ChainSpec {
    std::vector<std::string> transient;
    std::vector<std::string> absorbing;
    std::vector<double> Q;  // row-major |S| x |S|
    std::vector<double> R;  // row-major |S| x |A|
    std::string start_state;
    Duration step_gap = Duration::minutes(1);
    double jitter_fraction = 0.1;  // uniform +- around step_gap
    std::uint64_t seed = 1;
    PropertyMap actor_properties;  // stamped on every event

    double q(int i, int j) const { return Q[static_cast<std::size_t>(i) * transient.size() + j]; }
    double r(int i, int k) const { return R[static_cast<std::size_t>(i) * absorbing.size() + k]; }
    // Rows must sum to 1 within 1e-9; throws invalid_chain.
    void validate() const;
};

ChainSpec chain_spec_from_json(const Json& j);
Json chain_spec_to_json(const ChainSpec& spec);
ChainSpec load_chain_spec(const std::string& path);

struct SimulationSummary {
    std::int64_t n_journeys = 0;
    std::int64_t n_events = 0;
    std::map<std::string, double> reach;                   // per transient state
    std::map<std::string, double> conditional_conversion;  // P(first absorbing | reached s)
    std::map<std::string, std::int64_t> reached_count;
    std::map<std::string, std::int64_t> outcome_counts;
};

struct SimulationResult {
    std::vector<RawEvent> events;  // time-ordered
    SimulationSummary summary;
};

// n independent journeys starting at start_state; every visit (including the
// absorbing step) emits a RawEvent named after the state. actor ids are
// "u<index>", one journey per actor. `first_start` spaces journey starts by
// `actor_spacing` so the stream stays inside one analysis window.
SimulationResult simulate_trajectories(const ChainSpec& spec, std::int64_t n, Instant first_start,
                                       Duration actor_spacing = Duration::seconds(1));

Json simulation_summary_to_json(const SimulationSummary& s);

}  // namespace pathlens
