#include "pathlens/journeys.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "pathlens/error.hpp"

namespace pathlens {

bool JourneyInstance::reached(const std::string& state) const {
    for (const auto& v : visits)
        if (v.state_id == state) return true;
    return false;
}

int JourneyInstance::visit_count(const std::string& state) const {
    int n = 0;
    for (const auto& v : visits)
        if (v.state_id == state) ++n;
    return n;
}

std::vector<JourneyInstance> extract_journeys(const std::vector<DerivedStateEvent>& derived,
                                              const JourneyDefinition& def,
                                              const TimeWindow& window) {
    const std::set<std::string> starts(def.start_states.begin(), def.start_states.end());

    std::map<std::string, std::vector<const DerivedStateEvent*>> by_actor;
    for (const auto& d : derived) {
        if (!window.contains(d.timestamp)) continue;
        if (!def.levels.count(d.level)) continue;
        by_actor[d.canonical_actor_id].push_back(&d);
    }

    std::vector<JourneyInstance> journeys;
    const std::string wid = window.id();

    for (auto& [actor, evs] : by_actor) {
        std::stable_sort(evs.begin(), evs.end(), [](const auto* a, const auto* b) {
            if (a->timestamp != b->timestamp) return a->timestamp < b->timestamp;
            return a->source_event_id < b->source_event_id;
        });

        // Session boundaries: a gap greater than session_gap starts a new
        // session. Within a session, journeys restart after each terminal.
        std::size_t i = 0;
        while (i < evs.size()) {
            std::size_t session_end = i + 1;
            while (session_end < evs.size() &&
                   evs[session_end]->timestamp - evs[session_end - 1]->timestamp <= def.session_gap)
                ++session_end;

            std::size_t k = i;
            while (k < session_end) {
                // Find the journey start.
                while (k < session_end && !starts.count(evs[k]->state_id)) ++k;
                if (k >= session_end) break;

                JourneyInstance j;
                j.canonical_actor_id = actor;
                j.window_id = wid;
                Instant last_ts = evs[k]->timestamp;
                bool terminal_reached = false;

                for (; k < session_end; ++k) {
                    const auto& d = *evs[k];
                    const auto term = def.terminal_map.find(d.state_id);
                    if (term != def.terminal_map.end()) {
                        j.outcome = term->second;
                        j.outcome_at = d.timestamp;
                        terminal_reached = true;
                        ++k;
                        break;
                    }
                    if (j.visits.empty() || j.visits.back().state_id != d.state_id)
                        j.visits.push_back({d.state_id, d.timestamp});
                    last_ts = d.timestamp;
                }

                if (!terminal_reached) {
                    // Quiet time after the last visit: the distance to the
                    // next session (or the window end) decides timeout vs
                    // censoring.
                    const Instant horizon = (k < evs.size()) ? evs[k]->timestamp : window.end;
                    if (horizon - last_ts > def.inactivity_timeout) {
                        j.outcome = def.timeout_outcome;
                        j.outcome_at = last_ts + def.inactivity_timeout;
                    }
                }
                if (!j.visits.empty()) journeys.push_back(std::move(j));
            }
            i = session_end;
        }
    }
    return journeys;
}

std::map<std::string, double> reach_rates(const std::vector<JourneyInstance>& journeys) {
    std::map<std::string, std::int64_t> touched;
    for (const auto& j : journeys) {
        std::set<std::string> seen;
        for (const auto& v : j.visits) seen.insert(v.state_id);
        for (const auto& s : seen) ++touched[s];
    }
    std::map<std::string, double> out;
    const double n = static_cast<double>(journeys.size());
    for (const auto& [s, c] : touched) out[s] = static_cast<double>(c) / n;
    return out;
}

std::vector<PathStats> materialize_paths(const std::vector<JourneyInstance>& journeys, int top_n) {
    if (top_n < 1) fail("config_error", "top_n must be >= 1");

    struct Key {
        std::vector<std::string> states;
        std::string outcome;  // "" = censored
        bool operator<(const Key& o) const {
            if (states != o.states) return states < o.states;
            return outcome < o.outcome;
        }
    };
    struct Agg {
        std::int64_t occurrence = 0;
        double total_duration_ms = 0;
    };

    std::map<Key, Agg> groups;
    std::map<std::vector<std::string>, std::pair<std::int64_t, std::int64_t>> seq_tot;  // (n, converted)

    for (const auto& j : journeys) {
        Key key;
        key.states.reserve(j.visits.size());
        for (const auto& v : j.visits) key.states.push_back(v.state_id);
        key.outcome = j.outcome ? to_string(*j.outcome) : "";
        auto& agg = groups[key];
        ++agg.occurrence;
        const Instant last = j.outcome ? j.outcome_at : j.visits.back().timestamp;
        agg.total_duration_ms += static_cast<double>((last - j.visits.front().timestamp).ms);
        auto& tot = seq_tot[key.states];
        ++tot.first;
        if (j.outcome == TerminalOutcome::Converted) ++tot.second;
    }

    std::vector<PathStats> paths;
    paths.reserve(groups.size());
    for (const auto& [key, agg] : groups) {
        PathStats p;
        p.states = key.states;
        if (!key.outcome.empty()) p.outcome = outcome_from_string(key.outcome);
        p.occurrence = agg.occurrence;
        const auto& tot = seq_tot[key.states];
        p.sequence_total = tot.first;
        p.conversion_rate = tot.first ? static_cast<double>(tot.second) / tot.first : 0.0;
        p.mean_duration_ms = agg.total_duration_ms / static_cast<double>(agg.occurrence);
        p.length = static_cast<int>(key.states.size());
        paths.push_back(std::move(p));
    }

    std::sort(paths.begin(), paths.end(), [](const PathStats& a, const PathStats& b) {
        if (a.occurrence != b.occurrence) return a.occurrence > b.occurrence;
        if (a.conversion_rate != b.conversion_rate) return a.conversion_rate > b.conversion_rate;
        if (a.states != b.states) return a.states < b.states;
        return (a.outcome ? to_string(*a.outcome) : "") < (b.outcome ? to_string(*b.outcome) : "");
    });
    if (static_cast<int>(paths.size()) > top_n) paths.resize(top_n);
    return paths;
}

}  // namespace pathlens
