#pragma once

#include "pathlens/pipeline.hpp"

namespace pathlens {

struct AuditMismatch {
    std::string fact_id;
    std::string detail;
};

struct AuditReport {
    std::int64_t sampled = 0;
    std::int64_t matched = 0;
    double rate = 0;  // matched / sampled
    std::vector<std::string> sampled_ids;
    std::vector<AuditMismatch> mismatches;
};

// Rebuilds the window deterministically from derived_states.jsonl and the
// config, regenerates facts through the same M3-M6 operations, and compares
// every evidence number of a seeded fact sample within 1e-9. sample_size
// larger than the store audits everything.
AuditReport audit_traceability(const PlatformConfig& cfg, const std::string& out_dir,
                               const PipelineOptions& opt, std::int64_t sample_size,
                               std::uint64_t seed);

Json audit_report_to_json(const AuditReport& r);

}  // namespace pathlens
