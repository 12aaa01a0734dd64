#include "pathlens/facts.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "pathlens/display.hpp"
#include "pathlens/error.hpp"
#include "pathlens/sha256.hpp"

namespace pathlens {

namespace {

const std::set<std::string> kBasePredicates = {
    "transitions_to",       "increases_probability_of", "is_activation_driver_for",
    "is_dropoff_point_for", "diverges_from",            "regressed_after",
    "changed_after",        "associated_with",          "more_common_in",
    "less_common_in",       "necessary_for_conversion", "is_fast_path_to"};

const std::set<std::string> kCausalPredicates = {"causes", "leads_to", "drives"};

std::string entity_display(const EntityRef& e) {
    if (e.kind == EntityKind::Outcome && e.id.rfind("outcome:", 0) == 0)
        return "'" + e.id.substr(8) + "'";
    if (e.kind == EntityKind::Segment && e.id.rfind("segment:", 0) == 0)
        return "segment '" + e.id.substr(8) + "'";
    if (e.kind == EntityKind::Path && e.id.rfind("path:", 0) == 0) {
        std::string seq = e.id.substr(5);
        for (auto& c : seq)
            if (c == '>') c = ' ';
        return "path [" + seq + "]";
    }
    return "'" + e.id + "'";
}

}  // namespace

PredicateVocabulary::PredicateVocabulary() : registered_(kBasePredicates) {}

void PredicateVocabulary::register_extension(const std::string& predicate) {
    if (kCausalPredicates.count(predicate))
        fail("unknown_predicate", "causal predicate '" + predicate + "' is not allowed");
    if (predicate.empty()) fail("unknown_predicate", "empty predicate");
    registered_.insert(predicate);
}

PredicateVocabulary default_vocabulary() {
    PredicateVocabulary v;
    v.register_extension("exhibits_loop");
    return v;
}

namespace {

Json fact_body_json(const BehavioralFact& f) {
    Json evidence = Json::object();
    for (const auto& [k, v] : f.evidence_payload)
        std::visit([&](const auto& x) { evidence[k] = x; }, v);
    return Json{{"schema_version", 1},
                {"subject", f.subject.id},
                {"predicate", f.predicate},
                {"object", f.object.id},
                {"validity_window", Json{{"start", format_rfc3339(f.validity_window.start)},
                                         {"end", format_rfc3339(f.validity_window.end)}}},
                {"evidence", evidence},
                {"provenance", Json{{"snapshot_id", f.provenance.snapshot_id},
                                    {"detector", f.provenance.detector},
                                    {"detector_version", f.provenance.detector_version},
                                    {"finding_id", f.provenance.finding_id}}}};
}

}  // namespace

std::string compute_fact_id(const BehavioralFact& fact) {
    return sha256_hex(fact_body_json(fact).dump());
}

std::string render_fact_summary(const BehavioralFact& f) {
    const auto num = [&](const std::string& key) -> std::string {
        const auto* v = evidence_find(f.evidence_payload, key);
        return v ? format_evidence_value(*v) : "n/a";
    };
    const std::string subj = entity_display(f.subject);
    const std::string obj = entity_display(f.object);

    if (f.predicate == "transitions_to")
        return "State " + subj + " transitions to " + obj + " (p=" + num("probability") + ").";
    if (f.predicate == "is_activation_driver_for")
        return "State " + subj + " is an activation driver for " + obj + ": reach " +
               num("reach_rate") + ", lift " + num("lift") + "x, removal effect " +
               num("removal_effect") + ".";
    if (f.predicate == "necessary_for_conversion")
        return "State " + subj + " is necessary for conversion to " + obj +
               ": no observed journey converts without it.";
    if (f.predicate == "is_dropoff_point_for") {
        const auto* p = evidence_find(f.evidence_payload, "p_dropoff");
        const std::string prob = p ? format_evidence_value(*p) : num("exit_probability");
        return "State " + subj + " is a drop-off point for " + obj + " (p_dropoff=" + prob + ").";
    }
    if (f.predicate == "diverges_from")
        return "Behavior in " + subj + " diverges from " + obj + " (divergence " +
               num("divergence") + ").";
    if (f.predicate == "regressed_after")
        return "Transition " + subj + " regressed after release " + num("release_id") + ": " +
               num("p_prev") + " to " + num("p_curr") + ".";
    if (f.predicate == "changed_after")
        return "Transition " + subj + " changed between windows: " + num("p_prev") + " to " +
               num("p_curr") + ".";
    if (f.predicate == "more_common_in")
        return "Reaching " + subj + " is more common in " + obj + " (" + num("reach_b") + " vs " +
               num("reach_a") + ").";
    if (f.predicate == "less_common_in")
        return "Reaching " + subj + " is less common in " + obj + " (" + num("reach_b") + " vs " +
               num("reach_a") + ").";
    if (f.predicate == "exhibits_loop")
        return "State " + subj + " exhibits a loop: mean " + num("mean_visits") +
               " visits among journeys containing it.";
    if (f.predicate == "is_fast_path_to")
        return "The " + subj + " is a fast path to " + obj + " (conversion " +
               num("conversion_rate") + ", " + num("path_length") + " steps).";
    if (f.predicate == "associated_with")
        return "The " + subj + " is associated with " + obj + " (occurrence " + num("occurrence") +
               ", quality " + num("quality_normalized") + ").";
    if (f.predicate == "increases_probability_of")
        return "State " + subj + " increases probability of " + obj + " (lift " + num("lift") +
               "x).";
    return "Fact: " + subj + " " + f.predicate + " " + obj + ".";
}

Json fact_to_json(const BehavioralFact& f) {
    Json body = fact_body_json(f);
    Json out = Json::object();
    out["fact_id"] = f.fact_id;
    for (auto& [k, v] : body.items()) out[k] = v;
    out["confidence"] = Json{{"score", f.confidence.score}, {"label", f.confidence.label}};
    out["summary"] = f.summary;
    out["related_entity_ids"] = f.related_entity_ids;
    return out;
}

namespace {

EntityRef entity_from_id(const std::string& id) {
    if (id.rfind("outcome:", 0) == 0) return {EntityKind::Outcome, id};
    if (id.rfind("segment:", 0) == 0) return {EntityKind::Segment, id};
    if (id.rfind("path:", 0) == 0) return {EntityKind::Path, id};
    if (id.rfind("edge:", 0) == 0) return {EntityKind::Edge, id};
    return {EntityKind::State, id};
}

}  // namespace

BehavioralFact fact_from_json(const Json& j) {
    BehavioralFact f;
    f.fact_id = j.at("fact_id").get<std::string>();
    f.subject = entity_from_id(j.at("subject").get<std::string>());
    f.predicate = j.at("predicate").get<std::string>();
    f.object = entity_from_id(j.at("object").get<std::string>());
    f.validity_window.start = parse_rfc3339(j.at("validity_window").at("start").get<std::string>());
    f.validity_window.end = parse_rfc3339(j.at("validity_window").at("end").get<std::string>());
    for (const auto& [k, v] : j.at("evidence").items()) {
        if (v.is_number_float())
            f.evidence_payload[k] = v.get<double>();
        else if (v.is_number_integer() || v.is_number_unsigned())
            f.evidence_payload[k] = v.get<std::int64_t>();
        else
            f.evidence_payload[k] = v.get<std::string>();
    }
    const auto& p = j.at("provenance");
    f.provenance = {p.at("snapshot_id").get<std::string>(), p.at("detector").get<std::string>(),
                    p.at("detector_version").get<std::string>(),
                    p.at("finding_id").get<std::string>()};
    f.confidence = {j.at("confidence").at("score").get<double>(),
                    j.at("confidence").at("label").get<std::string>()};
    f.summary = j.at("summary").get<std::string>();
    f.related_entity_ids = j.at("related_entity_ids").get<std::vector<std::string>>();
    return f;
}

std::string FactStore::assert_fact(BehavioralFact fact) {
    if (!vocab_.contains(fact.predicate))
        fail("unknown_predicate", "'" + fact.predicate + "' is not in the registered vocabulary");
    if (fact.provenance.snapshot_id.empty() || fact.provenance.detector.empty() ||
        fact.provenance.detector_version.empty() || fact.provenance.finding_id.empty())
        fail("missing_provenance", "facts require snapshot, detector, version and finding ids");
    for (const auto& [k, v] : fact.evidence_payload) {
        if (const auto* d = std::get_if<double>(&v))
            if (!std::isfinite(*d))
                fail("invalid_finding", "evidence '" + k + "' is not finite");
    }

    if (fact.related_entity_ids.empty()) {
        fact.related_entity_ids.push_back(fact.subject.id);
        if (fact.object.id != fact.subject.id) fact.related_entity_ids.push_back(fact.object.id);
    }
    std::sort(fact.related_entity_ids.begin(), fact.related_entity_ids.end());
    fact.related_entity_ids.erase(
        std::unique(fact.related_entity_ids.begin(), fact.related_entity_ids.end()),
        fact.related_entity_ids.end());

    fact.summary = render_fact_summary(fact);
    fact.fact_id = compute_fact_id(fact);

    const auto it = by_id_.find(fact.fact_id);
    if (it != by_id_.end()) return fact.fact_id;  // idempotent re-assertion

    const std::size_t idx = log_.size();
    by_id_[fact.fact_id] = idx;
    for (const auto& id : fact.related_entity_ids) by_entity_[id].push_back(idx);
    log_.push_back(std::move(fact));
    return log_.back().fact_id;
}

const BehavioralFact* FactStore::by_id(const std::string& fact_id) const {
    const auto it = by_id_.find(fact_id);
    return it == by_id_.end() ? nullptr : &log_[it->second];
}

const BehavioralFact* FactStore::primary_for_finding(const Finding& finding) const {
    for (const auto& f : log_) {
        if (f.provenance.finding_id != finding.finding_id) continue;
        if (f.predicate != finding.predicate) continue;
        if (!finding.entities.empty() && f.subject.id != finding.entities.front().id) continue;
        return &f;
    }
    return nullptr;
}

namespace {

void sort_by_confidence(std::vector<const BehavioralFact*>& facts) {
    std::sort(facts.begin(), facts.end(), [](const BehavioralFact* a, const BehavioralFact* b) {
        if (a->confidence.score != b->confidence.score)
            return a->confidence.score > b->confidence.score;
        return a->fact_id < b->fact_id;
    });
}

}  // namespace

std::vector<const BehavioralFact*> FactStore::query(const FactQuery& q) const {
    std::vector<const BehavioralFact*> out;
    for (const auto& f : log_) {
        if (!q.entity_ids.empty()) {
            bool touch = false;
            for (const auto& id : q.entity_ids)
                if (std::binary_search(f.related_entity_ids.begin(), f.related_entity_ids.end(),
                                       id)) {
                    touch = true;
                    break;
                }
            if (!touch) continue;
        }
        if (q.window && !f.validity_window.intersects(*q.window)) continue;
        if (f.confidence.score < q.min_confidence) continue;
        if (!q.predicates.empty() &&
            std::find(q.predicates.begin(), q.predicates.end(), f.predicate) ==
                q.predicates.end())
            continue;
        out.push_back(&f);
    }
    sort_by_confidence(out);
    return out;
}

std::vector<const BehavioralFact*> FactStore::one_hop(
    const std::vector<std::string>& seed_entities, const std::optional<TimeWindow>& window,
    double min_confidence, int max_facts) const {
    if (max_facts < 1) fail("config_error", "max_facts must be >= 1");

    FactQuery q;
    q.entity_ids = seed_entities;
    q.window = window;
    q.min_confidence = min_confidence;
    auto first = query(q);

    std::set<std::string> seen_entities(seed_entities.begin(), seed_entities.end());
    std::set<std::string> introduced;
    for (const auto* f : first)
        for (const auto& id : f->related_entity_ids)
            if (!seen_entities.count(id)) introduced.insert(id);

    std::set<std::string> have;
    std::vector<const BehavioralFact*> all = first;
    for (const auto* f : first) have.insert(f->fact_id);

    if (!introduced.empty()) {
        FactQuery q2;
        q2.entity_ids.assign(introduced.begin(), introduced.end());
        q2.window = window;
        q2.min_confidence = min_confidence;
        for (const auto* f : query(q2))
            if (have.insert(f->fact_id).second) all.push_back(f);
    }

    sort_by_confidence(all);
    if (static_cast<int>(all.size()) > max_facts) all.resize(static_cast<std::size_t>(max_facts));
    return all;
}

void FactStore::save_jsonl(const std::string& path) const {
    std::ofstream out(path);
    if (!out) fail("missing_artifact", "cannot write '" + path + "'");
    for (const auto& f : log_) out << fact_to_json(f).dump() << '\n';
}

FactStore FactStore::load_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("missing_artifact", "cannot read '" + path + "'");
    FactStore store;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto fact = fact_from_json(Json::parse(line));
        const std::size_t idx = store.log_.size();
        store.by_id_[fact.fact_id] = idx;
        for (const auto& id : fact.related_entity_ids) store.by_entity_[id].push_back(idx);
        store.log_.push_back(std::move(fact));
    }
    return store;
}

namespace {

// Highest-probability outgoing transient transition of a state, if any.
std::optional<std::pair<std::string, double>> dominant_transition(const GraphSnapshot& snap,
                                                                  const std::string& state) {
    const int i = snap.state_index(state);
    if (i < 0) return std::nullopt;
    double best = 0;
    int best_j = -1;
    for (std::size_t j = 0; j < snap.states.size(); ++j) {
        const double p = snap.q(i, static_cast<int>(j));
        if (p > best) {
            best = p;
            best_j = static_cast<int>(j);
        }
    }
    if (best_j < 0) return std::nullopt;
    return std::make_pair(snap.states[static_cast<std::size_t>(best_j)], best);
}

}  // namespace

std::vector<BehavioralFact> facts_from_findings(const std::vector<Finding>& findings,
                                                const GraphSnapshot& snap,
                                                const PlatformConfig& cfg) {
    std::vector<BehavioralFact> out;

    auto base_fact = [&](const Finding& f) {
        BehavioralFact fact;
        fact.validity_window = snap.window;
        fact.provenance = {snap.snapshot_id, detector_name(f.detector), f.detector_version,
                           f.finding_id};
        fact.confidence = f.confidence;
        return fact;
    };

    for (const auto& f : findings) {
        if (f.entities.empty()) continue;

        BehavioralFact primary = base_fact(f);
        primary.subject = f.entities.front();
        primary.object = f.entities.size() > 1 ? f.entities.back() : f.entities.front();
        primary.predicate = f.predicate;
        primary.evidence_payload = f.evidence;
        for (const auto& e : f.entities) primary.related_entity_ids.push_back(e.id);
        std::sort(primary.related_entity_ids.begin(), primary.related_entity_ids.end());
        primary.related_entity_ids.erase(
            std::unique(primary.related_entity_ids.begin(), primary.related_entity_ids.end()),
            primary.related_entity_ids.end());
        out.push_back(std::move(primary));

        // Structural supporting facts for each state entity.
        const int drop_idx = snap.outcome_index(TerminalOutcome::DroppedOff);
        for (const auto& e : f.entities) {
            if (e.kind != EntityKind::State) continue;
            const int si = snap.state_index(e.id);
            if (si < 0) continue;
            const std::int64_t n_out = snap.out_total(e.id);

            if (const auto dom = dominant_transition(snap, e.id)) {
                BehavioralFact sup = base_fact(f);
                sup.subject = state_entity(e.id);
                sup.predicate = "transitions_to";
                sup.object = state_entity(dom->first);
                sup.evidence_payload["probability"] = dom->second;
                sup.evidence_payload["count"] = snap.edge_count(e.id, dom->first);
                sup.evidence_payload["sample_size"] = n_out;
                sup.confidence = confidence_score(0.0, std::max<std::int64_t>(1, n_out),
                                                  dom->second, cfg.confidence, cfg.n_min);
                out.push_back(std::move(sup));
            }

            if (drop_idx >= 0 && f.predicate != "is_dropoff_point_for") {
                const double p_drop = snap.r(si, drop_idx);
                if (p_drop >= cfg.detector.supporting_dropoff_min) {
                    BehavioralFact sup = base_fact(f);
                    sup.subject = state_entity(e.id);
                    sup.predicate = "is_dropoff_point_for";
                    sup.object = outcome_entity(TerminalOutcome::DroppedOff);
                    sup.evidence_payload["p_dropoff"] = p_drop;
                    sup.evidence_payload["sample_size"] = n_out;
                    sup.confidence = confidence_score(0.0, std::max<std::int64_t>(1, n_out),
                                                      p_drop, cfg.confidence, cfg.n_min);
                    out.push_back(std::move(sup));
                }
            }
        }
    }
    return out;
}

}  // namespace pathlens
