#include "pathlens/simulator.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "pathlens/error.hpp"
#include "pathlens/io.hpp"

namespace pathlens {

void ChainSpec::validate() const {
    const std::size_t S = transient.size();
    const std::size_t A = absorbing.size();
    if (S == 0 || A == 0) fail("invalid_chain", "need at least one transient and one absorbing state");
    if (Q.size() != S * S || R.size() != S * A)
        fail("invalid_chain", "matrix sizes do not match the state lists");
    for (std::size_t i = 0; i < S; ++i) {
        double sum = 0;
        for (std::size_t j = 0; j < S; ++j) sum += Q[i * S + j];
        for (std::size_t k = 0; k < A; ++k) sum += R[i * A + k];
        if (std::abs(sum - 1.0) > 1e-9)
            fail("invalid_chain", "row for '" + transient[i] + "' sums to " + std::to_string(sum));
    }
    bool found = false;
    for (const auto& s : transient) found = found || s == start_state;
    if (!found) fail("invalid_chain", "start state '" + start_state + "' is not transient");
}

ChainSpec chain_spec_from_json(const Json& j) {
    ChainSpec spec;
    spec.transient = j.at("transient").get<std::vector<std::string>>();
    spec.absorbing = j.at("absorbing").get<std::vector<std::string>>();
    spec.Q = j.at("Q").get<std::vector<double>>();
    spec.R = j.at("R").get<std::vector<double>>();
    spec.start_state = j.at("start_state").get<std::string>();
    if (j.contains("step_gap_ms")) spec.step_gap = Duration{j.at("step_gap_ms").get<std::int64_t>()};
    spec.jitter_fraction = j.value("jitter_fraction", spec.jitter_fraction);
    spec.seed = j.value("seed", spec.seed);
    if (j.contains("actor_properties"))
        spec.actor_properties = property_map_from_json(j.at("actor_properties"));
    spec.validate();
    return spec;
}

Json chain_spec_to_json(const ChainSpec& spec) {
    return Json{{"transient", spec.transient},
                {"absorbing", spec.absorbing},
                {"Q", spec.Q},
                {"R", spec.R},
                {"start_state", spec.start_state},
                {"step_gap_ms", spec.step_gap.ms},
                {"jitter_fraction", spec.jitter_fraction},
                {"seed", spec.seed},
                {"actor_properties", to_json(spec.actor_properties)}};
}

ChainSpec load_chain_spec(const std::string& path) {
    Json j;
    try {
        j = Json::parse(read_file(path));
    } catch (const std::exception& e) {
        fail("invalid_chain", "cannot parse '" + path + "': " + e.what());
    }
    return chain_spec_from_json(j);
}

SimulationResult simulate_trajectories(const ChainSpec& spec, std::int64_t n, Instant first_start,
                                       Duration actor_spacing) {
    spec.validate();
    if (n < 1) fail("invalid_chain", "n must be >= 1");

    const std::size_t S = spec.transient.size();
    const std::size_t A = spec.absorbing.size();
    int start = -1;
    for (std::size_t i = 0; i < S; ++i)
        if (spec.transient[i] == spec.start_state) start = static_cast<int>(i);

    // Draw order per journey: for each step one uniform in [0,1) for the
    // transition, then one uniform for the timestamp jitter. Fixed order is
    // what makes a seed reproduce the stream byte for byte.
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    SimulationResult res;
    res.summary.n_journeys = n;
    std::int64_t event_counter = 0;

    std::map<std::string, std::int64_t> reached;
    std::map<std::string, std::int64_t> reached_and_first_outcome;
    const std::string& first_outcome = spec.absorbing.front();

    for (std::int64_t jn = 0; jn < n; ++jn) {
        const std::string actor = "u" + std::to_string(jn);
        Instant ts = first_start + Duration{actor_spacing.ms * jn};
        std::set<std::string> visited;
        int cur = start;
        std::string outcome;

        auto emit = [&](const std::string& name) {
            RawEvent e;
            e.event_id = "e" + std::to_string(event_counter++);
            e.actor_id = actor;
            e.event_name = name;
            e.timestamp = ts;
            e.properties = spec.actor_properties;
            e.context["user_agent"] = std::string("journey-sim/1.0");
            res.events.push_back(std::move(e));
        };

        while (true) {
            visited.insert(spec.transient[static_cast<std::size_t>(cur)]);
            emit(spec.transient[static_cast<std::size_t>(cur)]);

            const double u = unit(rng);
            double acc = 0;
            int next = -1;
            bool absorbed = false;
            for (std::size_t j = 0; j < S && next < 0 && !absorbed; ++j) {
                acc += spec.q(cur, static_cast<int>(j));
                if (u < acc) next = static_cast<int>(j);
            }
            if (next < 0) {
                for (std::size_t k = 0; k < A; ++k) {
                    acc += spec.r(cur, static_cast<int>(k));
                    if (u < acc || k + 1 == A) {
                        outcome = spec.absorbing[k];
                        absorbed = true;
                        break;
                    }
                }
            }

            const double jitter = 1.0 + spec.jitter_fraction * (2.0 * unit(rng) - 1.0);
            ts = ts + Duration{static_cast<std::int64_t>(
                          std::llround(static_cast<double>(spec.step_gap.ms) * jitter))};

            if (absorbed) {
                emit(outcome);
                break;
            }
            cur = next;
        }

        ++res.summary.outcome_counts[outcome];
        for (const auto& s : visited) {
            ++reached[s];
            if (outcome == first_outcome) ++reached_and_first_outcome[s];
        }
    }

    for (const auto& [s, c] : reached) {
        res.summary.reach[s] = static_cast<double>(c) / static_cast<double>(n);
        res.summary.reached_count[s] = c;
        res.summary.conditional_conversion[s] =
            static_cast<double>(reached_and_first_outcome[s]) / static_cast<double>(c);
    }
    res.summary.n_events = static_cast<std::int64_t>(res.events.size());
    return res;
}

Json simulation_summary_to_json(const SimulationSummary& s) {
    Json reach = Json::object(), cond = Json::object(), counts = Json::object(),
         outcomes = Json::object();
    for (const auto& [k, v] : s.reach) reach[k] = v;
    for (const auto& [k, v] : s.conditional_conversion) cond[k] = v;
    for (const auto& [k, v] : s.reached_count) counts[k] = v;
    for (const auto& [k, v] : s.outcome_counts) outcomes[k] = v;
    return Json{{"schema_version", 1},
                {"n_journeys", s.n_journeys},
                {"n_events", s.n_events},
                {"reach", reach},
                {"conditional_conversion", cond},
                {"reached_count", counts},
                {"outcome_counts", outcomes}};
}

}  // namespace pathlens
