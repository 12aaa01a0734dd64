#include "pathlens/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "pathlens/error.hpp"

namespace pathlens {

std::string detector_version(DetectorKind k) {
    switch (k) {
        case DetectorKind::ActivationDriver: return "1.0.0";
        case DetectorKind::DropOffCluster: return "1.0.0";
        case DetectorKind::TemporalRegression: return "1.0.0";
        case DetectorKind::SegmentDivergence: return "1.0.0";
        case DetectorKind::UnexpectedLoop: return "1.0.0";
        case DetectorKind::PathQuality: return "1.0.0";
    }
    fail("invalid_detector", "unknown detector enum value");
}

PopulationIndex PopulationIndex::build(const std::vector<JourneyInstance>& journeys) {
    PopulationIndex idx;
    std::set<std::string> users;
    std::map<std::string, std::set<std::string>> state_users;
    std::map<std::pair<std::string, std::string>, std::set<std::string>> edge_users;
    for (const auto& j : journeys) {
        users.insert(j.canonical_actor_id);
        for (const auto& v : j.visits) state_users[v.state_id].insert(j.canonical_actor_id);
        for (std::size_t i = 0; i + 1 < j.visits.size(); ++i)
            edge_users[{j.visits[i].state_id, j.visits[i + 1].state_id}].insert(
                j.canonical_actor_id);
        if (j.outcome) {
            state_users[outcome_entity_id(*j.outcome)].insert(j.canonical_actor_id);
            if (!j.visits.empty())
                edge_users[{j.visits.back().state_id, outcome_entity_id(*j.outcome)}].insert(
                    j.canonical_actor_id);
        }
    }
    idx.total_users = static_cast<std::int64_t>(users.size());
    for (const auto& [s, u] : state_users)
        idx.users_by_state[s] = static_cast<std::int64_t>(u.size());
    for (const auto& [e, u] : edge_users)
        idx.users_by_edge[e] = static_cast<std::int64_t>(u.size());
    return idx;
}

double PopulationIndex::state_reach(const std::string& state) const {
    if (total_users == 0) return 0;
    const auto it = users_by_state.find(state);
    return it == users_by_state.end()
               ? 0.0
               : static_cast<double>(it->second) / static_cast<double>(total_users);
}

double PopulationIndex::edge_reach(const std::string& from, const std::string& to) const {
    if (total_users == 0) return 0;
    const auto it = users_by_edge.find({from, to});
    return it == users_by_edge.end()
               ? 0.0
               : static_cast<double>(it->second) / static_cast<double>(total_users);
}

SnapshotSlice SnapshotSlice::make(GraphSnapshot snap, std::vector<JourneyInstance> journeys) {
    SnapshotSlice s;
    s.snapshot = std::move(snap);
    s.population = PopulationIndex::build(journeys);
    s.journeys = std::move(journeys);
    return s;
}

namespace {

Finding make_finding(DetectorKind kind, const GraphSnapshot& snap, std::string predicate,
                     std::vector<EntityRef> entities, Evidence evidence, Confidence conf,
                     double population_reach) {
    Finding f;
    f.detector = kind;
    f.detector_version = detector_version(kind);
    f.snapshot_ids = {snap.snapshot_id};
    f.entities = std::move(entities);
    f.predicate = std::move(predicate);
    f.evidence = std::move(evidence);
    f.confidence = conf;
    f.population_reach = population_reach;
    f.created_at = snap.window.end;
    f.finding_id = compute_finding_id(f);
    return f;
}

double display_lift(double raw) { return std::min(raw, kLiftDisplayCap); }

}  // namespace

std::vector<Finding> detect_activation_drivers(const SnapshotSlice& slice,
                                               const ChainMetrics& metrics,
                                               const PlatformConfig& cfg) {
    const auto& snap = slice.snapshot;
    const auto& d = cfg.detector;
    const int target_idx = metrics.chain.absorbing_index(to_string(metrics.target));
    if (target_idx < 0) return {};

    struct Ranked {
        const StateMetrics* sm;
        double reach;
        double removal;
        bool necessary;
    };
    std::vector<Ranked> ranked;

    for (const auto& sm : metrics.per_state) {
        const int idx = metrics.chain.transient_index(sm.state);
        if (idx < 0 || metrics.start_weights(idx) > 0) continue;  // start states never rank
        const auto it = snap.reach.find(sm.state);
        const double reach = it == snap.reach.end() ? 0.0 : it->second;
        const auto& c = sm.conditionals;
        const bool necessary = c.status == ConditionalStatus::NecessaryForConversion;
        if (!necessary) {
            if (c.status != ConditionalStatus::Ok) continue;
            if (reach < d.tau_reach || c.lift < d.tau_lift) continue;
            if (c.n_reached < d.tau_n) continue;
        }
        if (!sm.removal) continue;  // not a candidate (pre-filter) or start
        ranked.push_back({&sm, reach, *sm.removal, necessary});
    }

    std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
        if (a.removal != b.removal) return a.removal > b.removal;
        return a.sm->state < b.sm->state;
    });

    std::vector<Finding> out;
    int emitted = 0;
    for (const auto& r : ranked) {
        if (!r.necessary && emitted >= d.activation_top_k) continue;
        const auto& c = r.sm->conditionals;
        Evidence ev;
        ev["reach_rate"] = r.reach;
        ev["p_reached"] = c.p_reached;
        if (!r.necessary) {
            ev["p_not_reached"] = c.p_not_reached;
            ev["lift"] = display_lift(c.lift);
            ev["raw_lift"] = c.lift;
        }
        ev["removal_effect"] = r.removal;
        ev["sample_size"] = c.n_reached;
        ev["n_journeys"] = snap.n_journeys;
        ev["z"] = c.z;
        ev["p_value"] = c.p_value;
        if (std::min(c.n_reached, c.n_not_reached) < cfg.n_min) ev["low_power"] = std::int64_t{1};
        const auto conf = confidence_score(c.z, c.n_reached, r.removal, cfg.confidence, cfg.n_min);
        out.push_back(make_finding(
            DetectorKind::ActivationDriver, snap,
            r.necessary ? "necessary_for_conversion" : "is_activation_driver_for",
            {state_entity(r.sm->state), outcome_entity(metrics.target)}, std::move(ev), conf,
            slice.population.state_reach(r.sm->state)));
        if (!r.necessary) ++emitted;
    }
    return out;
}

std::vector<Finding> detect_dropoffs(const SnapshotSlice& slice, const ChainMetrics& metrics,
                                     const PlatformConfig& cfg) {
    const auto& snap = slice.snapshot;
    const auto& d = cfg.detector;
    const int drop_idx = snap.outcome_index(TerminalOutcome::DroppedOff);
    if (drop_idx < 0) return {};

    // Pooled exit rate of every other state is the comparison baseline.
    const std::string drop_id = outcome_entity_id(TerminalOutcome::DroppedOff);
    std::vector<std::pair<std::int64_t, std::int64_t>> exits(snap.states.size());  // (drops, outs)
    std::int64_t total_drops = 0, total_outs = 0;
    for (std::size_t i = 0; i < snap.states.size(); ++i) {
        exits[i] = {snap.edge_count(snap.states[i], drop_id), snap.out_total(snap.states[i])};
        total_drops += exits[i].first;
        total_outs += exits[i].second;
    }

    std::vector<int> flagged;
    for (std::size_t i = 0; i < snap.states.size(); ++i) {
        const auto& s = snap.states[i];
        const double exit_p = snap.r(static_cast<int>(i), drop_idx);
        const auto rit = snap.reach.find(s);
        const double reach = rit == snap.reach.end() ? 0.0 : rit->second;
        if (exit_p < d.tau_exit || reach < d.tau_reach) continue;
        flagged.push_back(static_cast<int>(i));
    }

    std::vector<Finding> out;
    auto state_test = [&](int i) {
        const auto [drops, outs] = exits[static_cast<std::size_t>(i)];
        const std::int64_t rest_outs = total_outs - outs;
        const std::int64_t rest_drops = total_drops - drops;
        if (outs >= 1 && rest_outs >= 1) return two_proportion_z(drops, outs, rest_drops, rest_outs);
        ProportionTest t;
        t.zero_variance = true;
        return t;
    };

    for (int i : flagged) {
        const auto& s = snap.states[static_cast<std::size_t>(i)];
        const double exit_p = snap.r(i, drop_idx);
        const auto test = state_test(i);
        Evidence ev;
        ev["exit_probability"] = exit_p;
        ev["reach_rate"] = snap.reach.at(s);
        ev["sample_size"] = exits[static_cast<std::size_t>(i)].second;
        ev["n_journeys"] = snap.n_journeys;
        ev["z"] = test.z;
        ev["p_value"] = test.p_value;
        const auto conf = confidence_score(test.z, std::max<std::int64_t>(1, exits[i].second),
                                           exit_p, cfg.confidence, cfg.n_min);
        out.push_back(make_finding(DetectorKind::DropOffCluster, snap, "is_dropoff_point_for",
                                   {state_entity(s), outcome_entity(TerminalOutcome::DroppedOff)},
                                   std::move(ev), conf, slice.population.state_reach(s)));
    }

    // Merge flagged states connected by Q edges (either direction) into
    // cluster findings.
    if (flagged.size() > 1) {
        std::map<int, int> comp;
        for (int i : flagged) comp[i] = i;
        std::function<int(int)> find = [&](int x) {
            while (comp[x] != x) x = comp[x] = comp[comp[x]];
            return x;
        };
        for (int a : flagged)
            for (int b : flagged) {
                if (a >= b) continue;
                if (snap.q(a, b) > 0 || snap.q(b, a) > 0) {
                    const int ra = find(a), rb = find(b);
                    if (ra != rb) comp[std::max(ra, rb)] = std::min(ra, rb);
                }
            }
        std::map<int, std::vector<int>> groups;
        for (int i : flagged) groups[find(i)].push_back(i);
        for (const auto& [root, members] : groups) {
            (void)root;
            if (members.size() < 2) continue;
            std::vector<EntityRef> ents;
            double exit_sum = 0;
            std::int64_t sample = 0, users = 0;
            double best_z = 0, best_p = 1.0;
            for (int i : members) {
                const auto& s = snap.states[static_cast<std::size_t>(i)];
                ents.push_back(state_entity(s));
                exit_sum += snap.r(i, drop_idx);
                sample += exits[static_cast<std::size_t>(i)].second;
                users = std::max(users, slice.population.users_by_state.count(s)
                                            ? slice.population.users_by_state.at(s)
                                            : 0);
                const auto t = state_test(i);
                if (std::abs(t.z) > std::abs(best_z)) {
                    best_z = t.z;
                    best_p = t.p_value;
                }
            }
            ents.push_back(outcome_entity(TerminalOutcome::DroppedOff));
            Evidence ev;
            ev["n_states"] = static_cast<std::int64_t>(members.size());
            ev["mean_exit_probability"] = exit_sum / static_cast<double>(members.size());
            ev["sample_size"] = sample;
            ev["n_journeys"] = snap.n_journeys;
            ev["z"] = best_z;
            ev["p_value"] = best_p;
            const auto conf = confidence_score(best_z, std::max<std::int64_t>(1, sample),
                                               exit_sum / static_cast<double>(members.size()),
                                               cfg.confidence, cfg.n_min);
            const double pop = slice.population.total_users
                                   ? static_cast<double>(users) /
                                         static_cast<double>(slice.population.total_users)
                                   : 0.0;
            out.push_back(make_finding(DetectorKind::DropOffCluster, snap, "is_dropoff_point_for",
                                       std::move(ents), std::move(ev), conf, pop));
        }
    }
    return out;
}

std::vector<Finding> detect_regressions(const GraphSnapshot& prev, const SnapshotSlice& curr,
                                        const std::vector<Release>& releases,
                                        const PlatformConfig& cfg) {
    const auto& snap = curr.snapshot;
    std::set<std::pair<std::string, std::string>> edges;
    for (const auto& [e, c] : prev.edge_counts) {
        (void)c;
        edges.insert(e);
    }
    for (const auto& [e, c] : snap.edge_counts) {
        (void)c;
        edges.insert(e);
    }

    std::vector<Finding> out;
    for (const auto& edge : edges) {
        const auto delta = transition_delta(prev, snap, edge, releases);
        if (delta.delta >= 0) continue;
        if (delta.test.zero_variance || delta.test.p_value > cfg.detector.significance_alpha)
            continue;

        Evidence ev;
        ev["p_prev"] = delta.p_prev;
        ev["p_curr"] = delta.p_curr;
        ev["delta"] = delta.delta;
        ev["z"] = delta.test.z;
        ev["p_value"] = delta.test.p_value;
        ev["n_prev"] = delta.test.n2;
        ev["n_curr"] = delta.test.n1;
        ev["sample_size"] = std::min(delta.test.n1, delta.test.n2);
        if (std::min(delta.test.n1, delta.test.n2) < cfg.n_min) ev["low_power"] = std::int64_t{1};
        if (delta.link == ReleaseLink::Anchored) ev["release_id"] = delta.release_id;
        if (delta.link == ReleaseLink::Ambiguous) ev["ambiguous_release"] = std::int64_t{1};

        std::vector<EntityRef> ents{edge_entity(edge.first, edge.second)};
        ents.push_back(state_entity(edge.first));
        if (edge.second.rfind("outcome:", 0) == 0)
            ents.push_back({EntityKind::Outcome, edge.second});
        else
            ents.push_back(state_entity(edge.second));

        const auto conf =
            confidence_score(delta.test.z, std::max<std::int64_t>(1, std::min(delta.test.n1, delta.test.n2)),
                             delta.delta, cfg.confidence, cfg.n_min);
        const std::string predicate =
            delta.link == ReleaseLink::Anchored ? "regressed_after" : "changed_after";
        out.push_back(make_finding(DetectorKind::TemporalRegression, snap, predicate,
                                   std::move(ents), std::move(ev), conf,
                                   curr.population.edge_reach(edge.first, edge.second)));
    }
    return out;
}

namespace {

// Outgoing distribution of one state over the union target set; empty when
// the state has no outgoing observations in this snapshot.
std::map<std::string, double> outgoing_distribution(const GraphSnapshot& snap,
                                                    const std::string& state) {
    std::map<std::string, double> dist;
    const std::int64_t total = snap.out_total(state);
    if (total == 0) return dist;
    for (auto it = snap.edge_counts.lower_bound({state, ""});
         it != snap.edge_counts.end() && it->first.first == state; ++it)
        dist[it->first.second] = static_cast<double>(it->second) / static_cast<double>(total);
    return dist;
}

std::int64_t reach_count(const GraphSnapshot& snap, const std::vector<JourneyInstance>& journeys,
                         const std::string& id) {
    (void)snap;
    std::int64_t n = 0;
    if (id.rfind("outcome:", 0) == 0) {
        const auto t = outcome_from_string(id.substr(8));
        for (const auto& j : journeys) n += (j.outcome == t);
    } else {
        for (const auto& j : journeys) n += j.reached(id);
    }
    return n;
}

}  // namespace

std::vector<Finding> detect_segment_divergence(const SnapshotSlice& a, const SnapshotSlice& b,
                                               const PlatformConfig& cfg) {
    const auto& sa = a.snapshot;
    const auto& sb = b.snapshot;
    if (sa.journey_id != sb.journey_id || sa.window != sb.window)
        fail("window_mismatch", "segment snapshots must share journey and window");

    std::set<std::string> states;
    for (const auto& s : sa.states) states.insert(s);
    for (const auto& s : sb.states) states.insert(s);

    // Overall divergence: reach-weighted mean of per-state JSDs.
    double weighted = 0, weight_sum = 0;
    const double na = static_cast<double>(sa.n_journeys);
    const double nb = static_cast<double>(sb.n_journeys);
    for (const auto& s : states) {
        const auto da = outgoing_distribution(sa, s);
        const auto db = outgoing_distribution(sb, s);
        const auto ra = sa.reach.count(s) ? sa.reach.at(s) : 0.0;
        const auto rb = sb.reach.count(s) ? sb.reach.at(s) : 0.0;
        const double w = (ra * na + rb * nb) / (na + nb);
        if (w <= 0) continue;
        double jsd;
        if (da.empty() && db.empty())
            continue;
        else if (da.empty() || db.empty())
            jsd = 1.0;  // state observed in only one segment
        else
            jsd = js_divergence(da, db);
        weighted += w * jsd;
        weight_sum += w;
    }
    const double overall = weight_sum > 0 ? weighted / weight_sum : 0.0;

    std::vector<Finding> out;

    // Conversion-rate comparison carries the overall finding's statistics.
    const std::string conv_id = outcome_entity_id(TerminalOutcome::Converted);
    const std::int64_t conv_a = reach_count(sa, a.journeys, conv_id);
    const std::int64_t conv_b = reach_count(sb, b.journeys, conv_id);
    const auto conv_test = two_proportion_z(conv_a, sa.n_journeys, conv_b, sb.n_journeys);

    if (overall >= cfg.detector.divergence_threshold) {
        Evidence ev;
        ev["divergence"] = overall;
        ev["conversion_a"] = conv_test.p1;
        ev["conversion_b"] = conv_test.p2;
        ev["z"] = conv_test.z;
        ev["p_value"] = conv_test.p_value;
        ev["n_a"] = sa.n_journeys;
        ev["n_b"] = sb.n_journeys;
        ev["sample_size"] = std::min(sa.n_journeys, sb.n_journeys);
        ev["segment_a"] = sa.segment_id;
        ev["segment_b"] = sb.segment_id;
        const auto conf = confidence_score(conv_test.z,
                                           std::max<std::int64_t>(1, std::min(sa.n_journeys, sb.n_journeys)),
                                           overall, cfg.confidence, cfg.n_min);
        Finding f;
        f.detector = DetectorKind::SegmentDivergence;
        f.detector_version = detector_version(DetectorKind::SegmentDivergence);
        f.snapshot_ids = {sa.snapshot_id, sb.snapshot_id};
        f.entities = {segment_entity(sa.segment_id), segment_entity(sb.segment_id)};
        f.predicate = "diverges_from";
        f.evidence = std::move(ev);
        f.confidence = conf;
        const double pop_total =
            static_cast<double>(a.population.total_users + b.population.total_users);
        f.population_reach = pop_total > 0
                                 ? static_cast<double>(std::min(a.population.total_users,
                                                                b.population.total_users)) /
                                       pop_total
                                 : 0.0;
        f.created_at = sa.window.end;
        f.finding_id = compute_finding_id(f);
        out.push_back(std::move(f));
    }

    // Per-state reach differences, judged relative to segment b.
    std::set<std::string> compare = states;
    for (TerminalOutcome t : sa.absorbing) compare.insert(outcome_entity_id(t));
    for (TerminalOutcome t : sb.absorbing) compare.insert(outcome_entity_id(t));
    for (const auto& id : compare) {
        const std::int64_t ca = reach_count(sa, a.journeys, id);
        const std::int64_t cb = reach_count(sb, b.journeys, id);
        if (ca == 0 && cb == 0) continue;
        const auto test = two_proportion_z(ca, sa.n_journeys, cb, sb.n_journeys);
        if (test.zero_variance || test.p_value > cfg.detector.significance_alpha) continue;

        const bool more_in_b = test.p2 > test.p1;
        Evidence ev;
        ev["reach_a"] = test.p1;
        ev["reach_b"] = test.p2;
        ev["z"] = test.z;
        ev["p_value"] = test.p_value;
        ev["sample_size"] = std::min(sa.n_journeys, sb.n_journeys);
        ev["segment_a"] = sa.segment_id;
        ev["segment_b"] = sb.segment_id;
        const auto conf = confidence_score(test.z,
                                           std::max<std::int64_t>(1, std::min(sa.n_journeys, sb.n_journeys)),
                                           test.p2 - test.p1, cfg.confidence, cfg.n_min);
        EntityRef subject = id.rfind("outcome:", 0) == 0 ? EntityRef{EntityKind::Outcome, id}
                                                         : state_entity(id);
        Finding f;
        f.detector = DetectorKind::SegmentDivergence;
        f.detector_version = detector_version(DetectorKind::SegmentDivergence);
        f.snapshot_ids = {sa.snapshot_id, sb.snapshot_id};
        f.entities = {subject, segment_entity(sb.segment_id)};
        f.predicate = more_in_b ? "more_common_in" : "less_common_in";
        f.evidence = std::move(ev);
        f.confidence = conf;
        const double pop_total =
            static_cast<double>(a.population.total_users + b.population.total_users);
        const std::int64_t touched = (a.population.users_by_state.count(id)
                                          ? a.population.users_by_state.at(id)
                                          : 0) +
                                     (b.population.users_by_state.count(id)
                                          ? b.population.users_by_state.at(id)
                                          : 0);
        f.population_reach = pop_total > 0 ? static_cast<double>(touched) / pop_total : 0.0;
        f.created_at = sa.window.end;
        f.finding_id = compute_finding_id(f);
        out.push_back(std::move(f));
    }
    return out;
}

std::vector<Finding> detect_repeated_visits(const SnapshotSlice& slice,
                                            const PlatformConfig& cfg) {
    const auto& snap = slice.snapshot;
    const double tau = cfg.detector.tau_loop;

    std::vector<Finding> out;
    for (const auto& state : snap.states) {
        std::int64_t containing = 0, visits = 0, looping = 0;
        std::map<std::string, std::int64_t> back_edges;
        for (const auto& j : slice.journeys) {
            const int c = j.visit_count(state);
            if (c == 0) continue;
            ++containing;
            visits += c;
            if (c >= 2) {
                ++looping;
                // Immediate successors of non-final occurrences of the state.
                int seen = 0;
                for (std::size_t i = 0; i + 1 < j.visits.size(); ++i) {
                    if (j.visits[i].state_id != state) continue;
                    ++seen;
                    if (seen < c) ++back_edges[j.visits[i + 1].state_id];
                }
            }
        }
        if (containing == 0) continue;
        const double mean = static_cast<double>(visits) / static_cast<double>(containing);
        if (!(mean > tau)) continue;

        std::string back_edge;
        std::int64_t best = -1;
        for (const auto& [s, c] : back_edges)
            if (c > best) {
                best = c;
                back_edge = s;
            }

        // Revisit share tested against the share tau_loop itself would imply.
        const double p0 = tau > 1.0 ? (tau - 1.0) / tau : 0.5;
        const auto test = one_proportion_z(visits - containing, visits, p0);

        Evidence ev;
        ev["mean_visits"] = mean;
        ev["affected_fraction"] =
            static_cast<double>(looping) / static_cast<double>(snap.n_journeys);
        ev["containing_journeys"] = containing;
        ev["sample_size"] = containing;
        ev["n_journeys"] = snap.n_journeys;
        if (!back_edge.empty()) ev["back_edge"] = back_edge;
        ev["z"] = test.z;
        ev["p_value"] = test.p_value;
        if (tau == 0.0) ev["degenerate_config"] = std::int64_t{1};

        const auto conf = confidence_score(test.z, std::max<std::int64_t>(1, containing),
                                           mean - 1.0, cfg.confidence, cfg.n_min);
        std::vector<EntityRef> ents{state_entity(state)};
        if (!back_edge.empty()) ents.push_back(state_entity(back_edge));
        out.push_back(make_finding(DetectorKind::UnexpectedLoop, snap, "exhibits_loop",
                                   std::move(ents), std::move(ev), conf,
                                   slice.population.state_reach(state)));
    }
    return out;
}

std::vector<Finding> detect_path_quality(const SnapshotSlice& slice, const PlatformConfig& cfg) {
    const auto& snap = slice.snapshot;
    const auto& d = cfg.detector;
    if (snap.top_paths.empty()) return {};

    struct Scored {
        const PathStats* path;
        double quality = 0;
        double norm_duration = 1;
        double norm_length = 1;
        bool duration_floored = false;
    };

    // Deployment medians normalize duration and length to dimensionless
    // factors before inversion.
    std::vector<double> durations, lengths;
    for (const auto& p : snap.top_paths) {
        durations.push_back(std::max(p.mean_duration_ms, 1.0));
        lengths.push_back(static_cast<double>(p.length));
    }
    auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        const std::size_t n = v.size();
        return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    };
    const double med_dur = std::max(median(durations), 1.0);
    const double med_len = std::max(median(lengths), 1.0);

    std::vector<Scored> scored;
    for (const auto& p : snap.top_paths) {
        if (p.length < 1) continue;
        Scored s;
        s.path = &p;
        s.duration_floored = p.mean_duration_ms <= 0;
        const double dur = std::max(p.mean_duration_ms, 1.0);
        s.norm_duration = dur / med_dur;
        s.norm_length = static_cast<double>(p.length) / med_len;
        s.quality = p.conversion_rate;
        if (d.path_use_duration) s.quality *= 1.0 / s.norm_duration;
        if (d.path_use_length) s.quality *= 1.0 / s.norm_length;
        scored.push_back(s);
    }
    if (scored.empty()) return {};

    double max_q = 0;
    for (const auto& s : scored) max_q = std::max(max_q, s.quality);

    std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
        if (a.quality != b.quality) return a.quality > b.quality;
        if (a.path->states != b.path->states) return a.path->states < b.path->states;
        const auto oa = a.path->outcome ? to_string(*a.path->outcome) : "";
        const auto ob = b.path->outcome ? to_string(*b.path->outcome) : "";
        return oa < ob;
    });

    const std::int64_t total_converted =
        reach_count(snap, slice.journeys, outcome_entity_id(TerminalOutcome::Converted));

    auto build = [&](const Scored& s, const std::string& predicate,
                     TerminalOutcome object) -> Finding {
        const auto& p = *s.path;
        Evidence ev;
        ev["conversion_rate"] = p.conversion_rate;
        ev["mean_duration_ms"] = std::max(p.mean_duration_ms, 1.0);
        ev["path_length"] = static_cast<std::int64_t>(p.length);
        ev["occurrence"] = p.occurrence;
        ev["quality"] = s.quality;
        ev["quality_normalized"] = max_q > 0 ? s.quality / max_q : 0.0;
        ev["norm_duration"] = s.norm_duration;
        ev["norm_length"] = s.norm_length;
        if (s.duration_floored) ev["duration_floored"] = std::int64_t{1};
        ev["sample_size"] = p.sequence_total;
        ev["n_journeys"] = snap.n_journeys;

        const std::int64_t conv_in_seq =
            static_cast<std::int64_t>(std::llround(p.conversion_rate * static_cast<double>(p.sequence_total)));
        ProportionTest test;
        if (p.sequence_total >= 1 && snap.n_journeys >= 1)
            test = two_proportion_z(conv_in_seq, p.sequence_total, total_converted, snap.n_journeys);
        ev["z"] = test.z;
        ev["p_value"] = test.p_value;

        const auto conf = confidence_score(test.z, std::max<std::int64_t>(1, p.sequence_total),
                                           ev.count("quality_normalized")
                                               ? std::get<double>(ev.at("quality_normalized"))
                                               : 0.0,
                                           cfg.confidence, cfg.n_min);
        std::int64_t users = 0;
        // Per-user fraction: users whose journeys follow this exact sequence.
        std::set<std::string> seq_users;
        for (const auto& j : slice.journeys) {
            if (j.visits.size() != p.states.size()) continue;
            bool match = true;
            for (std::size_t i = 0; i < p.states.size(); ++i)
                if (j.visits[i].state_id != p.states[i]) {
                    match = false;
                    break;
                }
            if (match) seq_users.insert(j.canonical_actor_id);
        }
        users = static_cast<std::int64_t>(seq_users.size());
        const double pop = slice.population.total_users
                               ? static_cast<double>(users) /
                                     static_cast<double>(slice.population.total_users)
                               : 0.0;
        return make_finding(DetectorKind::PathQuality, snap, predicate,
                            {path_entity(p.states), outcome_entity(object)}, std::move(ev), conf,
                            pop);
    };

    std::vector<Finding> out;
    int emitted = 0;
    for (const auto& s : scored) {
        if (emitted >= d.path_top_k) break;
        if (!s.path->outcome || *s.path->outcome != TerminalOutcome::Converted) continue;
        out.push_back(build(s, "is_fast_path_to", TerminalOutcome::Converted));
        ++emitted;
    }

    // High-occurrence, low-quality paths become optimization targets.
    for (const auto& s : scored) {
        const double share =
            static_cast<double>(s.path->occurrence) / static_cast<double>(snap.n_journeys);
        const double qn = max_q > 0 ? s.quality / max_q : 0.0;
        if (share < d.path_occurrence_share_min || qn >= 0.5) continue;
        const TerminalOutcome object =
            s.path->outcome ? *s.path->outcome : TerminalOutcome::DroppedOff;
        if (object == TerminalOutcome::Converted) continue;
        out.push_back(build(s, "associated_with", object));
    }
    return out;
}

}  // namespace pathlens
