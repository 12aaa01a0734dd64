#include "pathlens/findings.hpp"

#include "pathlens/error.hpp"
#include "pathlens/sha256.hpp"

namespace pathlens {

std::string to_string(DetectorKind k) {
    switch (k) {
        case DetectorKind::ActivationDriver: return "ActivationDriver";
        case DetectorKind::DropOffCluster: return "DropOffCluster";
        case DetectorKind::TemporalRegression: return "TemporalRegression";
        case DetectorKind::SegmentDivergence: return "SegmentDivergence";
        case DetectorKind::UnexpectedLoop: return "UnexpectedLoop";
        case DetectorKind::PathQuality: return "PathQuality";
    }
    fail("invalid_detector", "unknown detector enum value");
}

DetectorKind detector_kind_from_string(const std::string& s) {
    for (DetectorKind k :
         {DetectorKind::ActivationDriver, DetectorKind::DropOffCluster,
          DetectorKind::TemporalRegression, DetectorKind::SegmentDivergence,
          DetectorKind::UnexpectedLoop, DetectorKind::PathQuality})
        if (to_string(k) == s) return k;
    fail("invalid_detector", "'" + s + "' is not a detector");
}

std::string detector_name(DetectorKind k) {
    switch (k) {
        case DetectorKind::ActivationDriver: return "activation_driver";
        case DetectorKind::DropOffCluster: return "drop_off_cluster";
        case DetectorKind::TemporalRegression: return "temporal_regression";
        case DetectorKind::SegmentDivergence: return "segment_divergence";
        case DetectorKind::UnexpectedLoop: return "unexpected_loop";
        case DetectorKind::PathQuality: return "path_quality";
    }
    fail("invalid_detector", "unknown detector enum value");
}

EntityRef state_entity(const std::string& state_id) { return {EntityKind::State, state_id}; }
EntityRef outcome_entity(TerminalOutcome t) { return {EntityKind::Outcome, outcome_entity_id(t)}; }
EntityRef segment_entity(const std::string& segment_id) {
    return {EntityKind::Segment, "segment:" + segment_id};
}
EntityRef edge_entity(const std::string& from, const std::string& to) {
    return {EntityKind::Edge, "edge:" + from + "->" + to};
}
EntityRef path_entity(const std::vector<std::string>& states) {
    std::string id = "path:";
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (i) id += '>';
        id += states[i];
    }
    return {EntityKind::Path, id};
}

namespace {

std::string entity_kind_name(EntityKind k) {
    switch (k) {
        case EntityKind::State: return "state";
        case EntityKind::Edge: return "edge";
        case EntityKind::Segment: return "segment";
        case EntityKind::Path: return "path";
        case EntityKind::Outcome: return "outcome";
    }
    fail("invalid_entity", "unknown entity kind");
}

EntityKind entity_kind_from_name(const std::string& s) {
    for (EntityKind k : {EntityKind::State, EntityKind::Edge, EntityKind::Segment,
                         EntityKind::Path, EntityKind::Outcome})
        if (entity_kind_name(k) == s) return k;
    fail("invalid_entity", "'" + s + "' is not an entity kind");
}

Json evidence_to_json(const Evidence& e) {
    Json out = Json::object();
    for (const auto& [k, v] : e)
        std::visit([&](const auto& x) { out[k] = x; }, v);
    return out;
}

Evidence evidence_from_json(const Json& j) {
    Evidence e;
    for (const auto& [k, v] : j.items()) {
        if (v.is_number_float())
            e[k] = v.get<double>();
        else if (v.is_number_integer() || v.is_number_unsigned())
            e[k] = v.get<std::int64_t>();
        else if (v.is_string())
            e[k] = v.get<std::string>();
        else
            fail("invalid_finding", "evidence values must be numbers or strings");
    }
    return e;
}

Json finding_body_json(const Finding& f) {
    Json entities = Json::array();
    for (const auto& e : f.entities)
        entities.push_back(Json{{"kind", entity_kind_name(e.kind)}, {"id", e.id}});
    return Json{{"schema_version", 1},
                {"detector", to_string(f.detector)},
                {"detector_version", f.detector_version},
                {"snapshot_ids", f.snapshot_ids},
                {"entities", entities},
                {"predicate", f.predicate},
                {"evidence", evidence_to_json(f.evidence)},
                {"confidence", Json{{"score", f.confidence.score}, {"label", f.confidence.label}}},
                {"population_reach", f.population_reach},
                {"created_at", format_rfc3339(f.created_at)}};
}

}  // namespace

std::string compute_finding_id(const Finding& f) { return sha256_hex(finding_body_json(f).dump()); }

Json finding_to_json(const Finding& f) {
    Json body = finding_body_json(f);
    Json out = Json::object();
    out["finding_id"] = f.finding_id;
    for (auto& [k, v] : body.items()) out[k] = v;
    return out;
}

Finding finding_from_json(const Json& j) {
    Finding f;
    f.finding_id = j.at("finding_id").get<std::string>();
    f.detector = detector_kind_from_string(j.at("detector").get<std::string>());
    f.detector_version = j.at("detector_version").get<std::string>();
    f.snapshot_ids = j.at("snapshot_ids").get<std::vector<std::string>>();
    for (const auto& je : j.at("entities"))
        f.entities.push_back({entity_kind_from_name(je.at("kind").get<std::string>()),
                              je.at("id").get<std::string>()});
    f.predicate = j.at("predicate").get<std::string>();
    f.evidence = evidence_from_json(j.at("evidence"));
    f.confidence = {j.at("confidence").at("score").get<double>(),
                    j.at("confidence").at("label").get<std::string>()};
    f.population_reach = j.at("population_reach").get<double>();
    f.created_at = parse_rfc3339(j.at("created_at").get<std::string>());
    return f;
}

const EvidenceValue* evidence_find(const Evidence& e, const std::string& key) {
    const auto it = e.find(key);
    return it == e.end() ? nullptr : &it->second;
}

double evidence_number(const Evidence& e, const std::string& key) {
    const auto* v = evidence_find(e, key);
    if (!v) fail("missing_component", "evidence key '" + key + "' is absent");
    if (const auto* d = std::get_if<double>(v)) return *d;
    if (const auto* i = std::get_if<std::int64_t>(v)) return static_cast<double>(*i);
    fail("missing_component", "evidence key '" + key + "' is not numeric");
}

}  // namespace pathlens
