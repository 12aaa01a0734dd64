#pragma once

#include "pathlens/narrative.hpp"

namespace pathlens {

struct SnapshotMeta {
    std::string snapshot_id;
    std::string journey_id;
    std::string segment_id;
    TimeWindow window;
};

struct QueryLimits {
    int top_k_facts = 3;
    int max_facts = 10;
    double min_confidence = 0.0;
    double min_score = 0.0;  // strictly-greater floor on retrieval score
};

struct QueryAnswer {
    std::string text;
    FactBundle bundle;
    std::vector<std::string> fact_ids;  // retrieval hits, best first
    std::string journey_id;
    TimeWindow window;
};

// idf-weighted token overlap between the question and a fact summary
// (lowercased, punctuation stripped). Exposed for oracle tests.
double retrieval_score(const std::string& question, const std::string& summary,
                       const std::map<std::string, double>& idf);
std::map<std::string, double> summary_idf(const FactStore& store);

// Planner: resolve journey and window from the question (fallback: the most
// recent snapshot), rank fact summaries, build a one-hop bundle from the top
// hits, and render through the constrained template path. Throws
// no_relevant_facts when nothing scores above the floor.
QueryAnswer answer_query(const std::string& question, const FactStore& store,
                         const std::vector<SnapshotMeta>& journey_index,
                         const PlatformConfig& cfg, const QueryLimits& limits);

}  // namespace pathlens
