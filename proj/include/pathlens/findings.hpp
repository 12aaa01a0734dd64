#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "pathlens/stats.hpp"
#include "pathlens/types.hpp"

namespace pathlens {

enum class DetectorKind {
    ActivationDriver,
    DropOffCluster,
    TemporalRegression,
    SegmentDivergence,
    UnexpectedLoop,
    PathQuality
};

std::string to_string(DetectorKind k);
DetectorKind detector_kind_from_string(const std::string& s);
// Stable short name used for actionability lookup and file output.
std::string detector_name(DetectorKind k);

enum class EntityKind { State, Edge, Segment, Path, Outcome };

struct EntityRef {
    EntityKind kind = EntityKind::State;
    std::string id;  // canonical form, e.g. "outcome:converted", "segment:mobile"

    bool operator==(const EntityRef&) const = default;
    bool operator<(const EntityRef& o) const { return id < o.id; }
};

EntityRef state_entity(const std::string& state_id);
EntityRef outcome_entity(TerminalOutcome t);
EntityRef segment_entity(const std::string& segment_id);
EntityRef edge_entity(const std::string& from, const std::string& to);
EntityRef path_entity(const std::vector<std::string>& states);

using EvidenceValue = std::variant<double, std::int64_t, std::string>;
using Evidence = std::map<std::string, EvidenceValue>;

struct Finding {
    std::string finding_id;  // content hash
    DetectorKind detector = DetectorKind::ActivationDriver;
    std::string detector_version;
    std::vector<std::string> snapshot_ids;
    std::vector<EntityRef> entities;
    std::string predicate;
    Evidence evidence;
    Confidence confidence;
    double population_reach = 0;  // per-user fraction affected
    Instant created_at;
};

std::string compute_finding_id(const Finding& f);
Json finding_to_json(const Finding& f);
Finding finding_from_json(const Json& j);

double evidence_number(const Evidence& e, const std::string& key);
const EvidenceValue* evidence_find(const Evidence& e, const std::string& key);

}  // namespace pathlens
