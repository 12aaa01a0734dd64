#include "pathlens/snapshot.hpp"

#include <algorithm>
#include <set>

#include "pathlens/error.hpp"
#include "pathlens/sha256.hpp"

namespace pathlens {

int GraphSnapshot::state_index(const std::string& s) const {
    const auto it = std::lower_bound(states.begin(), states.end(), s);
    if (it == states.end() || *it != s) return -1;
    return static_cast<int>(it - states.begin());
}

int GraphSnapshot::outcome_index(TerminalOutcome t) const {
    for (std::size_t i = 0; i < absorbing.size(); ++i)
        if (absorbing[i] == t) return static_cast<int>(i);
    return -1;
}

std::int64_t GraphSnapshot::out_total(const std::string& from) const {
    std::int64_t total = 0;
    for (auto it = edge_counts.lower_bound({from, ""}); it != edge_counts.end(); ++it) {
        if (it->first.first != from) break;
        total += it->second;
    }
    return total;
}

std::int64_t GraphSnapshot::edge_count(const std::string& from, const std::string& to) const {
    const auto it = edge_counts.find({from, to});
    return it == edge_counts.end() ? 0 : it->second;
}

std::vector<JourneyInstance> filter_journeys_for_segment(
    const std::vector<JourneyInstance>& journeys, const SegmentDefinition* segment,
    const std::map<std::string, PropertyMap>& actor_props) {
    if (!segment) return journeys;
    static const PropertyMap kEmpty;
    std::vector<JourneyInstance> out;
    for (const auto& j : journeys) {
        const auto it = actor_props.find(j.canonical_actor_id);
        const PropertyMap& props = it == actor_props.end() ? kEmpty : it->second;
        if (evaluate_segment(*segment, props)) out.push_back(j);
    }
    return out;
}

GraphSnapshot build_snapshot(const std::vector<JourneyInstance>& journeys,
                             const JourneyDefinition& def, const TimeWindow& window,
                             const SegmentDefinition* segment,
                             const std::map<std::string, PropertyMap>& actor_props, int top_n) {
    const auto scoped = filter_journeys_for_segment(journeys, segment, actor_props);
    if (scoped.empty())
        fail("empty_snapshot", "no journeys in window " + window.id() +
                                   (segment ? " for segment " + segment->segment_id : ""));

    GraphSnapshot snap;
    snap.window = window;
    snap.journey_id = def.journey_id;
    snap.segment_id = segment ? segment->segment_id : "all";
    snap.created_at = window.end;
    snap.n_journeys = static_cast<std::int64_t>(scoped.size());

    std::set<std::string> state_set;
    for (const auto& j : scoped)
        for (const auto& v : j.visits) state_set.insert(v.state_id);
    snap.states.assign(state_set.begin(), state_set.end());

    std::set<TerminalOutcome> outcome_set;
    for (const auto& [s, t] : def.terminal_map) {
        (void)s;
        outcome_set.insert(t);
    }
    outcome_set.insert(def.timeout_outcome);
    for (TerminalOutcome t : kAllOutcomes)
        if (outcome_set.count(t)) snap.absorbing.push_back(t);

    for (const auto& j : scoped) {
        for (std::size_t i = 0; i + 1 < j.visits.size(); ++i)
            ++snap.edge_counts[{j.visits[i].state_id, j.visits[i + 1].state_id}];
        if (j.outcome)
            ++snap.edge_counts[{j.visits.back().state_id, outcome_entity_id(*j.outcome)}];
    }

    const std::size_t S = snap.states.size();
    const std::size_t A = snap.absorbing.size();
    snap.Q.assign(S * S, 0.0);
    snap.R.assign(S * A, 0.0);
    for (std::size_t i = 0; i < S; ++i) {
        const auto total = snap.out_total(snap.states[i]);
        if (total == 0) continue;
        for (auto it = snap.edge_counts.lower_bound({snap.states[i], ""});
             it != snap.edge_counts.end() && it->first.first == snap.states[i]; ++it) {
            const std::string& to = it->first.second;
            const double p = static_cast<double>(it->second) / static_cast<double>(total);
            if (to.rfind("outcome:", 0) == 0) {
                const int k = snap.outcome_index(outcome_from_string(to.substr(8)));
                snap.R[i * A + static_cast<std::size_t>(k)] = p;
            } else {
                const int k = snap.state_index(to);
                snap.Q[i * S + static_cast<std::size_t>(k)] = p;
            }
        }
    }

    snap.reach = reach_rates(scoped);
    snap.top_paths = materialize_paths(scoped, top_n);
    snap.snapshot_id = compute_snapshot_id(snap);
    return snap;
}

namespace {

Json paths_to_json(const std::vector<PathStats>& paths) {
    Json arr = Json::array();
    for (const auto& p : paths) {
        arr.push_back(Json{{"states", p.states},
                           {"outcome", p.outcome ? to_string(*p.outcome) : ""},
                           {"occurrence", p.occurrence},
                           {"sequence_total", p.sequence_total},
                           {"conversion_rate", p.conversion_rate},
                           {"mean_duration_ms", p.mean_duration_ms},
                           {"length", p.length}});
    }
    return arr;
}

std::vector<PathStats> paths_from_json(const Json& arr) {
    std::vector<PathStats> out;
    for (const auto& jp : arr) {
        PathStats p;
        p.states = jp.at("states").get<std::vector<std::string>>();
        const auto oc = jp.at("outcome").get<std::string>();
        if (!oc.empty()) p.outcome = outcome_from_string(oc);
        p.occurrence = jp.at("occurrence").get<std::int64_t>();
        p.sequence_total = jp.at("sequence_total").get<std::int64_t>();
        p.conversion_rate = jp.at("conversion_rate").get<double>();
        p.mean_duration_ms = jp.at("mean_duration_ms").get<double>();
        p.length = jp.at("length").get<int>();
        out.push_back(std::move(p));
    }
    return out;
}

Json snapshot_body_json(const GraphSnapshot& s) {
    Json edges = Json::array();
    for (const auto& [edge, count] : s.edge_counts)
        edges.push_back(Json{{"from", edge.first}, {"to", edge.second}, {"count", count}});

    Json absorbing = Json::array();
    for (TerminalOutcome t : s.absorbing) absorbing.push_back(to_string(t));

    Json reach = Json::object();
    for (const auto& [k, v] : s.reach) reach[k] = v;

    return Json{{"schema_version", 1},
                {"window", Json{{"start", format_rfc3339(s.window.start)},
                                {"end", format_rfc3339(s.window.end)}}},
                {"journey_id", s.journey_id},
                {"segment_id", s.segment_id},
                {"states", s.states},
                {"absorbing", absorbing},
                {"edge_counts", edges},
                {"Q", s.Q},
                {"R", s.R},
                {"reach", reach},
                {"n_journeys", s.n_journeys},
                {"top_paths", paths_to_json(s.top_paths)}};
}

}  // namespace

std::string compute_snapshot_id(const GraphSnapshot& snap) {
    return sha256_hex(snapshot_body_json(snap).dump());
}

Json snapshot_to_json(const GraphSnapshot& snap) {
    Json j = snapshot_body_json(snap);
    Json out = Json::object();
    out["snapshot_id"] = snap.snapshot_id;
    for (auto& [k, v] : j.items()) out[k] = v;
    out["created_at"] = format_rfc3339(snap.created_at);
    return out;
}

GraphSnapshot snapshot_from_json(const Json& j) {
    GraphSnapshot s;
    s.snapshot_id = j.at("snapshot_id").get<std::string>();
    s.window.start = parse_rfc3339(j.at("window").at("start").get<std::string>());
    s.window.end = parse_rfc3339(j.at("window").at("end").get<std::string>());
    s.journey_id = j.at("journey_id").get<std::string>();
    s.segment_id = j.at("segment_id").get<std::string>();
    s.states = j.at("states").get<std::vector<std::string>>();
    for (const auto& a : j.at("absorbing"))
        s.absorbing.push_back(outcome_from_string(a.get<std::string>()));
    for (const auto& e : j.at("edge_counts"))
        s.edge_counts[{e.at("from").get<std::string>(), e.at("to").get<std::string>()}] =
            e.at("count").get<std::int64_t>();
    s.Q = j.at("Q").get<std::vector<double>>();
    s.R = j.at("R").get<std::vector<double>>();
    for (const auto& [k, v] : j.at("reach").items()) s.reach[k] = v.get<double>();
    s.n_journeys = j.at("n_journeys").get<std::int64_t>();
    s.top_paths = paths_from_json(j.at("top_paths"));
    s.created_at = parse_rfc3339(j.at("created_at").get<std::string>());
    return s;
}

}  // namespace pathlens
