#pragma once

#include <set>
#include <tuple>

#include "pathlens/detectors.hpp"

namespace pathlens {

struct ScoreComponents {
    double significance = 0;
    double magnitude = 0;
    double reach = 0;
    double actionability = 0;
    double novelty = 1.0;
};

struct ScoredInsight {
    Finding finding;
    ScoreComponents components;
    double score = 0;
    int rank = 0;
};

// Equivalence for novelty decay: same detector, predicate, and entity set.
using FindingKey = std::tuple<std::string, std::string, std::string>;
FindingKey finding_key(const Finding& f);
// history[0] = most recent prior snapshot's findings, history[1] the one
// before it, and so on.
using FindingHistory = std::vector<std::set<FindingKey>>;

ScoreComponents score_components(const Finding& f, const PlatformConfig& cfg,
                                 const FindingHistory& history);

// Weighted sum of the five components; requires evidence keys p_value and
// sample_size (throws missing_component).
ScoredInsight score_interestingness(const Finding& f, const ScoringWeights& weights,
                                    const PlatformConfig& cfg, const FindingHistory& history);

// Scores everything, sorts by score descending with finding_id tie-break,
// assigns ranks from 1.
std::vector<ScoredInsight> assemble_feed(const std::vector<Finding>& findings,
                                         const ScoringWeights& weights, const PlatformConfig& cfg,
                                         const FindingHistory& history);

Json scored_insight_to_json(const ScoredInsight& s);

}  // namespace pathlens
