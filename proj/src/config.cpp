#include "pathlens/config.hpp"

#include <cmath>
#include <fstream>

#include "pathlens/error.hpp"

namespace pathlens {

void DetectorConfig::validate() const {
    for (double v : {tau_reach, tau_lift, tau_exit, tau_loop, tau_candidate})
        if (!std::isfinite(v) || v < 0) fail("config_error", "detector thresholds must be finite and >= 0");
    if (tau_n < 1) fail("config_error", "tau_n must be >= 1");
    if (!(significance_alpha > 0 && significance_alpha < 1))
        fail("config_error", "significance_alpha must be in (0,1)");
}

void ScoringWeights::validate() const {
    for (double v : {alpha, beta, gamma, omega, epsilon})
        if (!std::isfinite(v) || v < 0) fail("config_error", "weights must be finite and >= 0");
    const double sum = alpha + beta + gamma + omega + epsilon;
    if (std::abs(sum - 1.0) > 1e-9)
        fail("config_error", "scoring weights must sum to 1, got " + std::to_string(sum));
}

void ConfidenceCoefficients::validate() const {
    if (!(high_min > medium_min))
        fail("config_error", "confidence label thresholds must satisfy high_min > medium_min");
    if (high_min < 0 || high_min > 1 || medium_min < 0 || medium_min > 1)
        fail("config_error", "confidence label thresholds must lie in [0,1]");
}

const JourneyDefinition& PlatformConfig::journey(const std::string& id) const {
    for (const auto& j : journeys)
        if (j.journey_id == id) return j;
    fail("config_error", "no journey definition named '" + id + "'");
}

void PlatformConfig::validate() const {
    detector.validate();
    weights.validate();
    confidence.validate();
    validate_rules(state_rules);
    validate_rules(lifecycle_rules);
    if (n_min < 1) fail("config_error", "n_min must be >= 1");
    if (journeys.empty()) fail("config_error", "at least one journey definition is required");
}

namespace {

const std::map<std::string, double> kDefaultActionability = {
    {"temporal_regression", 0.9}, {"activation_driver", 0.8}, {"drop_off_cluster", 0.7},
    {"segment_divergence", 0.6},  {"unexpected_loop", 0.5},   {"path_quality", 0.5}};

}  // namespace

double actionability_for(const PlatformConfig& cfg, const std::string& detector_name) {
    if (const auto it = cfg.actionability.find(detector_name); it != cfg.actionability.end())
        return it->second;
    if (const auto it = kDefaultActionability.find(detector_name);
        it != kDefaultActionability.end())
        return it->second;
    return 0.5;
}

Json config_to_json(const PlatformConfig& cfg) {
    Json j;
    j["schema_version"] = 1;

    Json journeys = Json::array();
    for (const auto& d : cfg.journeys) journeys.push_back(journey_def_to_json(d));
    j["journeys"] = journeys;

    Json segments = Json::array();
    for (const auto& s : cfg.segments) segments.push_back(segment_to_json(s));
    j["segments"] = segments;

    j["state_rules"] = state_rules_to_json(cfg.state_rules);
    j["lifecycle_rules"] = lifecycle_rules_to_json(cfg.lifecycle_rules);

    const auto& d = cfg.detector;
    j["detector"] = Json{{"tau_reach", d.tau_reach},
                         {"tau_lift", d.tau_lift},
                         {"tau_exit", d.tau_exit},
                         {"tau_loop", d.tau_loop},
                         {"tau_candidate", d.tau_candidate},
                         {"tau_n", d.tau_n},
                         {"significance_alpha", d.significance_alpha},
                         {"activation_top_k", d.activation_top_k},
                         {"divergence_threshold", d.divergence_threshold},
                         {"supporting_dropoff_min", d.supporting_dropoff_min},
                         {"top_paths", d.top_paths},
                         {"path_top_k", d.path_top_k},
                         {"path_occurrence_share_min", d.path_occurrence_share_min},
                         {"path_use_duration", d.path_use_duration},
                         {"path_use_length", d.path_use_length}};

    j["weights"] = Json{{"alpha", cfg.weights.alpha},
                        {"beta", cfg.weights.beta},
                        {"gamma", cfg.weights.gamma},
                        {"omega", cfg.weights.omega},
                        {"epsilon", cfg.weights.epsilon}};

    j["confidence"] = Json{{"a", cfg.confidence.a},
                           {"b", cfg.confidence.b},
                           {"c", cfg.confidence.c},
                           {"high_min", cfg.confidence.high_min},
                           {"medium_min", cfg.confidence.medium_min}};

    j["n_min"] = cfg.n_min;

    j["ingest"] = Json{{"idempotency_window_ms", cfg.ingest.idempotency_window.ms},
                       {"lag_tolerance_ms", cfg.ingest.lag_tolerance.ms},
                       {"bot",
                        Json{{"ua_substrings", cfg.ingest.bot.ua_substrings},
                             {"max_rate_per_min", cfg.ingest.bot.max_rate_per_min},
                             {"sustain_ms", cfg.ingest.bot.sustain.ms}}},
                       {"alias_event_names", cfg.ingest.alias_event_names}};

    Json releases = Json::array();
    for (const auto& r : cfg.releases)
        releases.push_back(Json{{"release_id", r.release_id}, {"at", format_rfc3339(r.at)}});
    j["releases"] = releases;

    Json act = Json::object();
    for (const auto& [k, v] : cfg.actionability) act[k] = v;
    j["actionability"] = act;

    return j;
}

PlatformConfig config_from_json(const Json& j) {
    PlatformConfig cfg;
    for (const auto& jd : j.at("journeys")) cfg.journeys.push_back(journey_def_from_json(jd));
    if (j.contains("segments"))
        for (const auto& js : j.at("segments")) cfg.segments.push_back(segment_from_json(js));
    if (j.contains("state_rules")) cfg.state_rules = state_rules_from_json(j.at("state_rules"));
    if (j.contains("lifecycle_rules"))
        cfg.lifecycle_rules = lifecycle_rules_from_json(j.at("lifecycle_rules"));

    if (j.contains("detector")) {
        const auto& jd = j.at("detector");
        auto& d = cfg.detector;
        d.tau_reach = jd.value("tau_reach", d.tau_reach);
        d.tau_lift = jd.value("tau_lift", d.tau_lift);
        d.tau_exit = jd.value("tau_exit", d.tau_exit);
        d.tau_loop = jd.value("tau_loop", d.tau_loop);
        d.tau_candidate = jd.value("tau_candidate", d.tau_candidate);
        d.tau_n = jd.value("tau_n", d.tau_n);
        d.significance_alpha = jd.value("significance_alpha", d.significance_alpha);
        d.activation_top_k = jd.value("activation_top_k", d.activation_top_k);
        d.divergence_threshold = jd.value("divergence_threshold", d.divergence_threshold);
        d.supporting_dropoff_min = jd.value("supporting_dropoff_min", d.supporting_dropoff_min);
        d.top_paths = jd.value("top_paths", d.top_paths);
        d.path_top_k = jd.value("path_top_k", d.path_top_k);
        d.path_occurrence_share_min =
            jd.value("path_occurrence_share_min", d.path_occurrence_share_min);
        d.path_use_duration = jd.value("path_use_duration", d.path_use_duration);
        d.path_use_length = jd.value("path_use_length", d.path_use_length);
    }

    if (j.contains("weights")) {
        const auto& jw = j.at("weights");
        cfg.weights = {jw.at("alpha").get<double>(), jw.at("beta").get<double>(),
                       jw.at("gamma").get<double>(), jw.at("omega").get<double>(),
                       jw.at("epsilon").get<double>()};
    }

    if (j.contains("confidence")) {
        const auto& jc = j.at("confidence");
        auto& c = cfg.confidence;
        c.a = jc.value("a", c.a);
        c.b = jc.value("b", c.b);
        c.c = jc.value("c", c.c);
        c.high_min = jc.value("high_min", c.high_min);
        c.medium_min = jc.value("medium_min", c.medium_min);
    }

    cfg.n_min = j.value("n_min", cfg.n_min);

    if (j.contains("ingest")) {
        const auto& ji = j.at("ingest");
        auto& in = cfg.ingest;
        if (ji.contains("idempotency_window_ms"))
            in.idempotency_window = Duration{ji.at("idempotency_window_ms").get<std::int64_t>()};
        if (ji.contains("lag_tolerance_ms"))
            in.lag_tolerance = Duration{ji.at("lag_tolerance_ms").get<std::int64_t>()};
        if (ji.contains("bot")) {
            const auto& jb = ji.at("bot");
            in.bot.ua_substrings =
                jb.value("ua_substrings", std::vector<std::string>{});
            in.bot.max_rate_per_min = jb.value("max_rate_per_min", in.bot.max_rate_per_min);
            if (jb.contains("sustain_ms"))
                in.bot.sustain = Duration{jb.at("sustain_ms").get<std::int64_t>()};
        }
        if (ji.contains("alias_event_names"))
            in.alias_event_names = ji.at("alias_event_names").get<std::vector<std::string>>();
    }

    if (j.contains("releases"))
        for (const auto& jr : j.at("releases"))
            cfg.releases.push_back(Release{jr.at("release_id").get<std::string>(),
                                           parse_rfc3339(jr.at("at").get<std::string>())});

    if (j.contains("actionability"))
        for (const auto& [k, v] : j.at("actionability").items())
            cfg.actionability[k] = v.get<double>();

    cfg.validate();
    return cfg;
}

PlatformConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("config_error", "cannot open config file '" + path + "'");
    Json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        fail("config_error", "cannot parse '" + path + "': " + e.what());
    }
    return config_from_json(j);
}

void save_config(const PlatformConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail("config_error", "cannot write config file '" + path + "'");
    out << config_to_json(cfg).dump(2) << '\n';
}

}  // namespace pathlens
