#pragma once

#include "pathlens/facts.hpp"

namespace pathlens {

struct BundleLimits {
    int max_facts = 10;
    double min_confidence = 0.0;
};

// Minimal one-hop fact set supporting one finding, rendered as the sole
// context for narrative generation. rendered_context carries every evidence
// number of every included fact under the shared display rules.
struct FactBundle {
    std::string bundle_id;  // hash of rendered_context
    std::string finding_id;
    BehavioralFact primary;
    std::vector<BehavioralFact> supporting;
    std::string rendered_context;
    BundleLimits limits;
};

// Throws no_facts when even the primary fact is missing from the store.
FactBundle build_fact_bundle(const Finding& finding, const FactStore& store, BundleLimits limits);

// Query-path variant: the caller picks the primary fact directly.
FactBundle build_fact_bundle_from_fact(const BehavioralFact& primary, const FactStore& store,
                                       BundleLimits limits);

std::string render_bundle_context(const BehavioralFact& primary,
                                  const std::vector<BehavioralFact>& supporting);

// Display rules shared by bundle rendering and the narrative templates.
bool is_probability_evidence_key(const std::string& key);
std::string evidence_display(const std::string& key, const EvidenceValue& v);

struct GroundingCheck {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct GroundingReport {
    std::string bundle_id;
    std::vector<GroundingCheck> checks;
    bool overall = false;
    bool rounded_values = false;  // lift verified only under display-rounding tolerance
};

// Self-consistency checks before generation: probability ranges, lift vs the
// conditional probabilities (1e-6 relative on full precision, 5% when only
// rounded values are present), sample size floor, removal-effect range,
// non-empty validity window, confidence present. Failures are reported, not
// thrown; failed bundles never reach generation.
GroundingReport validate_grounding(const FactBundle& bundle, const PlatformConfig& cfg);

Json grounding_report_to_json(const GroundingReport& r);

}  // namespace pathlens
