#pragma once

#include <optional>
#include <set>

#include "pathlens/detectors.hpp"

namespace pathlens {

struct FactProvenance {
    std::string snapshot_id;
    std::string detector;
    std::string detector_version;
    std::string finding_id;
};

// Append-only behavioral triple. Every evidence number must be reproducible
// by deterministic recomputation from the provenance snapshot.
struct BehavioralFact {
    std::string fact_id;  // content hash
    EntityRef subject;
    std::string predicate;
    EntityRef object;
    Confidence confidence;
    TimeWindow validity_window;
    Evidence evidence_payload;
    FactProvenance provenance;
    std::string summary;  // fixed per-predicate template, for lexical retrieval
    std::vector<std::string> related_entity_ids;
};

// Closed vocabulary. Causal predicates are rejected even as extensions.
class PredicateVocabulary {
public:
    PredicateVocabulary();

    void register_extension(const std::string& predicate);
    bool contains(const std::string& predicate) const { return registered_.count(predicate) > 0; }
    const std::set<std::string>& all() const { return registered_; }

private:
    std::set<std::string> registered_;
};

// Base vocabulary plus the exhibits_loop extension the loop detector needs.
PredicateVocabulary default_vocabulary();

std::string compute_fact_id(const BehavioralFact& fact);
std::string render_fact_summary(const BehavioralFact& fact);
Json fact_to_json(const BehavioralFact& fact);
BehavioralFact fact_from_json(const Json& j);

struct FactQuery {
    std::vector<std::string> entity_ids;  // empty = unconstrained
    std::optional<TimeWindow> window;
    double min_confidence = 0.0;
    std::vector<std::string> predicates;  // empty = unconstrained
};

// Single-writer, multi-reader append-only store with in-memory indexes.
class FactStore {
public:
    FactStore() : vocab_(default_vocabulary()) {}
    explicit FactStore(PredicateVocabulary vocab) : vocab_(std::move(vocab)) {}

    // Validates, fills summary and fact_id, appends. Re-asserting an
    // identical fact returns the existing id without a duplicate row.
    // Throws unknown_predicate, missing_provenance.
    std::string assert_fact(BehavioralFact fact);

    const std::vector<BehavioralFact>& facts() const { return log_; }
    const PredicateVocabulary& vocabulary() const { return vocab_; }
    const BehavioralFact* by_id(const std::string& fact_id) const;
    const BehavioralFact* primary_for_finding(const Finding& finding) const;

    // Conditions: (a) related entities intersect, (b) validity window
    // intersects, (c) confidence >= min. Stable order: confidence
    // descending, then fact_id.
    std::vector<const BehavioralFact*> query(const FactQuery& q) const;

    // Facts touching the seeds plus facts touching entities those introduce
    // (exactly one expansion), truncated to max_facts confidence-first.
    std::vector<const BehavioralFact*> one_hop(const std::vector<std::string>& seed_entities,
                                               const std::optional<TimeWindow>& window,
                                               double min_confidence, int max_facts) const;

    void save_jsonl(const std::string& path) const;
    static FactStore load_jsonl(const std::string& path);

private:
    PredicateVocabulary vocab_;
    std::vector<BehavioralFact> log_;
    std::map<std::string, std::size_t> by_id_;
    std::map<std::string, std::vector<std::size_t>> by_entity_;
};

// One primary fact per finding plus structural supporting facts: each state
// entity contributes its dominant outgoing transition (transitions_to) and,
// above the configured floor, its drop-off probability
// (is_dropoff_point_for).
std::vector<BehavioralFact> facts_from_findings(const std::vector<Finding>& findings,
                                                const GraphSnapshot& snap,
                                                const PlatformConfig& cfg);

}  // namespace pathlens
