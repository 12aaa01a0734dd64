#pragma once

#include <map>
#include <string>
#include <vector>

#include "pathlens/states.hpp"

namespace pathlens {

struct DetectorConfig {
    double tau_reach = 0.1;
    double tau_lift = 2.0;
    double tau_exit = 0.4;
    double tau_loop = 1.5;
    double tau_candidate = 1000.0;  // reach * lift * n pre-filter
    int tau_n = 100;                // minimum sample size (n_min)
    double significance_alpha = 0.05;

    int activation_top_k = 3;
    double divergence_threshold = 0.05;
    double supporting_dropoff_min = 0.2;
    int top_paths = 20;
    int path_top_k = 3;
    double path_occurrence_share_min = 0.05;  // optimization-target pre-filter
    bool path_use_duration = true;            // Q_path factors can be dropped
    bool path_use_length = true;

    void validate() const;
};

// Interestingness weights; must sum to 1 within 1e-9 at load time, never
// silently renormalized.
struct ScoringWeights {
    double alpha = 0.30;    // significance
    double beta = 0.25;     // magnitude
    double gamma = 0.20;    // reach
    double omega = 0.15;    // actionability
    double epsilon = 0.10;  // novelty

    void validate() const;
};

struct ConfidenceCoefficients {
    // Shipped defaults are uncalibrated placeholders; the scoring family is
    // config-driven on purpose.
    double a = 1.0;
    double b = 0.5;
    double c = 1.0;
    double high_min = 0.8;
    double medium_min = 0.5;

    void validate() const;
};

struct BotRules {
    std::vector<std::string> ua_substrings;
    double max_rate_per_min = 300.0;
    Duration sustain = Duration::minutes(2);
};

struct IngestConfig {
    Duration idempotency_window = Duration::minutes(5);
    Duration lag_tolerance = Duration::days(30);
    BotRules bot;
    std::vector<std::string> alias_event_names = {"identify"};
};

struct Release {
    std::string release_id;
    Instant at;
};

struct PlatformConfig {
    std::vector<JourneyDefinition> journeys;
    std::vector<SegmentDefinition> segments;
    StateRuleSet state_rules;
    LifecycleRuleSet lifecycle_rules;
    DetectorConfig detector;
    ScoringWeights weights;
    ConfidenceCoefficients confidence;
    int n_min = 100;
    IngestConfig ingest;
    std::vector<Release> releases;
    std::map<std::string, double> actionability;  // detector name -> [0,1]

    const JourneyDefinition& journey(const std::string& id) const;
    void validate() const;
};

Json config_to_json(const PlatformConfig& cfg);
PlatformConfig config_from_json(const Json& j);
PlatformConfig load_config(const std::string& path);
void save_config(const PlatformConfig& cfg, const std::string& path);

// Per-detector actionability with shipped defaults, overridable from config.
double actionability_for(const PlatformConfig& cfg, const std::string& detector_name);

}  // namespace pathlens
