#include "pathlens/scoring.hpp"

#include <algorithm>
#include <cmath>

#include "pathlens/error.hpp"

namespace pathlens {

FindingKey finding_key(const Finding& f) {
    std::string ids;
    std::vector<std::string> sorted;
    for (const auto& e : f.entities) sorted.push_back(e.id);
    std::sort(sorted.begin(), sorted.end());
    for (const auto& id : sorted) {
        ids += id;
        ids += '|';
    }
    return {to_string(f.detector), f.predicate, ids};
}

namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

double magnitude_of(const Finding& f, const PlatformConfig& cfg) {
    switch (f.detector) {
        case DetectorKind::ActivationDriver: {
            if (f.predicate == "necessary_for_conversion") return 1.0;
            const double lift = evidence_number(f.evidence, "raw_lift");
            const double d = std::abs(lift - 1.0);
            return clamp01(d / (d + 1.0));
        }
        case DetectorKind::TemporalRegression: {
            const double p_prev = evidence_number(f.evidence, "p_prev");
            const double delta = evidence_number(f.evidence, "delta");
            if (p_prev <= 0) return 1.0;
            return clamp01(std::abs(delta) / p_prev);
        }
        case DetectorKind::SegmentDivergence: {
            if (f.predicate == "diverges_from")
                return clamp01(evidence_number(f.evidence, "divergence"));
            return clamp01(std::abs(evidence_number(f.evidence, "reach_a") -
                                    evidence_number(f.evidence, "reach_b")));
        }
        case DetectorKind::UnexpectedLoop: {
            const double mean = evidence_number(f.evidence, "mean_visits");
            const double tau = cfg.detector.tau_loop;
            return clamp01(tau > 0 ? mean / (2.0 * tau) : mean / 2.0);
        }
        case DetectorKind::DropOffCluster: {
            if (evidence_find(f.evidence, "mean_exit_probability"))
                return clamp01(evidence_number(f.evidence, "mean_exit_probability"));
            return clamp01(evidence_number(f.evidence, "exit_probability"));
        }
        case DetectorKind::PathQuality: {
            const double qn = clamp01(evidence_number(f.evidence, "quality_normalized"));
            return f.predicate == "is_fast_path_to" ? qn : 1.0 - qn;
        }
    }
    fail("invalid_detector", "unknown detector enum value");
}

}  // namespace

ScoreComponents score_components(const Finding& f, const PlatformConfig& cfg,
                                 const FindingHistory& history) {
    ScoreComponents c;
    const double p = evidence_number(f.evidence, "p_value");
    const double n = evidence_number(f.evidence, "sample_size");
    c.significance =
        clamp01((1.0 - p) * std::min(1.0, n / static_cast<double>(cfg.n_min)));
    c.magnitude = magnitude_of(f, cfg);
    c.reach = clamp01(f.population_reach);
    c.actionability = clamp01(actionability_for(cfg, detector_name(f.detector)));

    const auto key = finding_key(f);
    int k = 0;
    for (const auto& prior : history) {
        if (!prior.count(key)) break;
        ++k;
    }
    c.novelty = std::pow(0.5, k);
    return c;
}

ScoredInsight score_interestingness(const Finding& f, const ScoringWeights& weights,
                                    const PlatformConfig& cfg, const FindingHistory& history) {
    ScoredInsight s;
    s.finding = f;
    s.components = score_components(f, cfg, history);
    const auto& c = s.components;
    s.score = clamp01(weights.alpha * c.significance + weights.beta * c.magnitude +
                      weights.gamma * c.reach + weights.omega * c.actionability +
                      weights.epsilon * c.novelty);
    return s;
}

std::vector<ScoredInsight> assemble_feed(const std::vector<Finding>& findings,
                                         const ScoringWeights& weights, const PlatformConfig& cfg,
                                         const FindingHistory& history) {
    std::vector<ScoredInsight> feed;
    feed.reserve(findings.size());
    for (const auto& f : findings)
        feed.push_back(score_interestingness(f, weights, cfg, history));
    std::sort(feed.begin(), feed.end(), [](const ScoredInsight& a, const ScoredInsight& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.finding.finding_id < b.finding.finding_id;
    });
    for (std::size_t i = 0; i < feed.size(); ++i) feed[i].rank = static_cast<int>(i) + 1;
    return feed;
}

Json scored_insight_to_json(const ScoredInsight& s) {
    return Json{{"rank", s.rank},
                {"score", s.score},
                {"components", Json{{"significance", s.components.significance},
                                    {"magnitude", s.components.magnitude},
                                    {"reach", s.components.reach},
                                    {"actionability", s.components.actionability},
                                    {"novelty", s.components.novelty}}},
                {"finding", finding_to_json(s.finding)}};
}

}  // namespace pathlens
