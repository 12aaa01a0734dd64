#include "pathlens/bundle.hpp"

#include <algorithm>
#include <cmath>

#include "pathlens/display.hpp"
#include "pathlens/error.hpp"
#include "pathlens/sha256.hpp"

namespace pathlens {

namespace {

const std::set<std::string> kTwoDecimalKeys = {
    "lift", "raw_lift", "mean_visits", "norm_duration", "norm_length", "z", "quality"};

}  // namespace

bool is_probability_evidence_key(const std::string& key) {
    static const std::set<std::string> exact = {
        "reach_rate",   "exit_probability",   "probability", "divergence",
        "conversion_rate", "quality_normalized", "reach_a",  "reach_b",
        "conversion_a", "conversion_b",       "p_dropoff",   "affected_fraction",
        "mean_exit_probability"};
    return exact.count(key) > 0 || key.rfind("p_", 0) == 0;
}

std::string evidence_display(const std::string& key, const EvidenceValue& v) {
    if (const auto* s = std::get_if<std::string>(&v)) return *s;
    if (const auto* i = std::get_if<std::int64_t>(&v)) return format_integer(*i);
    const double d = std::get<double>(v);
    if (is_probability_evidence_key(key) || kTwoDecimalKeys.count(key))
        return format_probability(d);
    return format_evidence_value(v);
}

namespace {



std::string display_key(const std::string& key, const EntityRef& object) {
    std::string outcome = object.id;
    if (outcome.rfind("outcome:", 0) == 0) outcome = outcome.substr(8);
    if (key == "p_reached") return "P(" + outcome + " | reached)";
    if (key == "p_not_reached") return "P(" + outcome + " | not reached)";
    return key;
}



// Preferred keys lead the listing; the rest follow alphabetically.
std::vector<std::string> evidence_key_order(const Evidence& e) {
    static const std::vector<std::string> preferred = {
        "reach_rate", "p_reached", "p_not_reached", "lift", "removal_effect",
        "exit_probability", "p_prev", "p_curr", "delta", "divergence",
        "mean_visits", "conversion_rate", "sample_size"};
    std::vector<std::string> out;
    for (const auto& k : preferred)
        if (e.count(k)) out.push_back(k);
    for (const auto& [k, v] : e) {
        (void)v;
        if (std::find(out.begin(), out.end(), k) == out.end()) out.push_back(k);
    }
    return out;
}

std::string finding_label(const std::string& detector) {
    if (detector == "activation_driver") return "activation_driver";
    return detector;
}

std::string quoted_entity(const EntityRef& e) {
    if (e.kind == EntityKind::Outcome) return e.id;  // already outcome:<name>
    if (e.kind == EntityKind::Segment || e.kind == EntityKind::Path || e.kind == EntityKind::Edge)
        return e.id;
    return "\"" + e.id + "\"";
}

std::string subject_line_label(const EntityRef& e) {
    switch (e.kind) {
        case EntityKind::State: return "State";
        case EntityKind::Edge: return "Edge";
        case EntityKind::Segment: return "Segment";
        case EntityKind::Path: return "Path";
        case EntityKind::Outcome: return "Outcome";
    }
    return "Entity";
}

std::string supporting_line(const BehavioralFact& f) {
    std::string line = "  - " + quoted_entity(f.subject) + " " + f.predicate + " " +
                       quoted_entity(f.object);
    // The headline probability leads; everything else follows alphabetically.
    std::vector<std::string> keys;
    for (const auto& lead : {"probability", "p_dropoff", "exit_probability"})
        if (f.evidence_payload.count(lead)) keys.push_back(lead);
    for (const auto& [k, v] : f.evidence_payload) {
        (void)v;
        if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
    }
    std::string params;
    for (const auto& key : keys) {
        const auto& v = f.evidence_payload.at(key);
        if (std::holds_alternative<std::string>(v)) continue;
        if (!params.empty()) params += ", ";
        std::string name = key;
        if (key == "probability") name = "p";
        params += name + "=" + evidence_display(key, v);
    }
    if (!params.empty()) line += " (" + params + ")";
    return line;
}

}  // namespace

std::string render_bundle_context(const BehavioralFact& primary,
                                  const std::vector<BehavioralFact>& supporting) {
    std::string out;
    out += "Finding: " + finding_label(primary.provenance.detector) + "\n";
    out += subject_line_label(primary.subject) + ": " + quoted_entity(primary.subject) + "\n";
    out += "Predicate: " + primary.predicate + "\n";
    out += "Object: " + quoted_entity(primary.object) + "\n";
    out += "Evidence:\n";
    for (const auto& key : evidence_key_order(primary.evidence_payload)) {
        out += "  - " + display_key(key, primary.object) + ": " +
               evidence_display(key, primary.evidence_payload.at(key)) + "\n";
    }
    out += "  - confidence: " + primary.confidence.label + "\n";
    if (!supporting.empty()) {
        out += "Supporting facts:\n";
        for (const auto& f : supporting) out += supporting_line(f) + "\n";
    }
    return out;
}

namespace {

FactBundle assemble_bundle(const BehavioralFact& primary, const FactStore& store,
                           BundleLimits limits, const std::string& finding_id) {
    FactBundle b;
    b.finding_id = finding_id;
    b.primary = primary;
    b.limits = limits;

    // max_facts bounds the whole bundle, primary included.
    const auto hop = store.one_hop(primary.related_entity_ids, primary.validity_window,
                                   limits.min_confidence, limits.max_facts);
    for (const auto* f : hop) {
        if (f->fact_id == primary.fact_id) continue;
        if (static_cast<int>(b.supporting.size()) + 1 >= limits.max_facts) break;
        b.supporting.push_back(*f);
    }
    b.rendered_context = render_bundle_context(b.primary, b.supporting);
    b.bundle_id = sha256_hex(b.rendered_context);
    return b;
}

}  // namespace

FactBundle build_fact_bundle(const Finding& finding, const FactStore& store, BundleLimits limits) {
    if (limits.max_facts < 1) fail("config_error", "max_facts must be >= 1");
    const auto* primary = store.primary_for_finding(finding);
    if (!primary)
        fail("no_facts", "no stored fact for finding " + finding.finding_id);
    return assemble_bundle(*primary, store, limits, finding.finding_id);
}

FactBundle build_fact_bundle_from_fact(const BehavioralFact& primary, const FactStore& store,
                                       BundleLimits limits) {
    if (limits.max_facts < 1) fail("config_error", "max_facts must be >= 1");
    return assemble_bundle(primary, store, limits, primary.provenance.finding_id);
}

GroundingReport validate_grounding(const FactBundle& bundle, const PlatformConfig& cfg) {
    GroundingReport report;
    report.bundle_id = bundle.bundle_id;

    auto add = [&](const std::string& name, bool pass, const std::string& detail) {
        report.checks.push_back({name, pass, detail});
    };

    std::vector<const BehavioralFact*> all{&bundle.primary};
    for (const auto& f : bundle.supporting) all.push_back(&f);

    // 1: every probability-like value lies in [0,1].
    {
        bool ok = true;
        std::string detail;
        for (const auto* f : all) {
            for (const auto& [k, v] : f->evidence_payload) {
                if (!is_probability_evidence_key(k)) continue;
                const auto* d = std::get_if<double>(&v);
                if (!d) continue;
                if (*d < 0.0 || *d > 1.0) {
                    ok = false;
                    detail = k + "=" + std::to_string(*d) + " outside [0,1]";
                }
            }
        }
        add("probabilities_in_range", ok, detail);
    }

    // 2: lift consistent with the two conditionals.
    {
        bool ok = true;
        std::string detail;
        const auto& ev = bundle.primary.evidence_payload;
        const auto* lift = evidence_find(ev, "raw_lift");
        const auto* lift_display = evidence_find(ev, "lift");
        const auto* pr = evidence_find(ev, "p_reached");
        const auto* pn = evidence_find(ev, "p_not_reached");
        if (pr && pn && (lift || lift_display)) {
            const double p_reached = std::get<double>(*pr);
            const double p_not = std::get<double>(*pn);
            const double stated =
                lift ? std::get<double>(*lift) : std::get<double>(*lift_display);
            if (p_not > 0 && stated > 0) {
                const double implied = p_reached / p_not;
                const double rel = std::abs(stated - implied) / stated;
                if (lift) {
                    ok = rel <= 1e-6;
                    if (!ok) detail = "full-precision lift off by rel " + std::to_string(rel);
                } else {
                    // Only a display-rounded lift is present.
                    ok = rel <= 0.05;
                    report.rounded_values = true;
                    if (!ok) detail = "rounded lift off by rel " + std::to_string(rel);
                }
            }
        }
        add("lift_consistency", ok, detail);
    }

    // 3: sample size meets the configured floor.
    {
        bool ok = true;
        std::string detail;
        const auto* n = evidence_find(bundle.primary.evidence_payload, "sample_size");
        if (n) {
            const double v = std::holds_alternative<std::int64_t>(*n)
                                 ? static_cast<double>(std::get<std::int64_t>(*n))
                                 : std::get<double>(*n);
            ok = v >= static_cast<double>(cfg.n_min);
            if (!ok) detail = "sample_size " + std::to_string(v) + " below n_min";
        }
        add("sample_size_floor", ok, detail);
    }

    // 4: removal effect within [-1, 1].
    {
        bool ok = true;
        std::string detail;
        const auto* rm = evidence_find(bundle.primary.evidence_payload, "removal_effect");
        if (rm) {
            const double v = std::get<double>(*rm);
            ok = v >= -1.0 && v <= 1.0;
            if (!ok) detail = "removal_effect " + std::to_string(v);
        }
        add("removal_effect_range", ok, detail);
    }

    // 5: non-empty validity window.
    {
        const bool ok = bundle.primary.validity_window.start < bundle.primary.validity_window.end;
        add("validity_window_nonempty", ok, ok ? "" : "window start >= end");
    }

    // 6: confidence present.
    {
        const bool ok = !bundle.primary.confidence.label.empty();
        add("confidence_present", ok, ok ? "" : "missing confidence label");
    }

    report.overall = std::all_of(report.checks.begin(), report.checks.end(),
                                 [](const GroundingCheck& c) { return c.pass; });
    return report;
}

Json grounding_report_to_json(const GroundingReport& r) {
    Json checks = Json::array();
    for (const auto& c : r.checks)
        checks.push_back(Json{{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    return Json{{"bundle_id", r.bundle_id},
                {"overall", r.overall},
                {"rounded_values", r.rounded_values},
                {"checks", checks}};
}

}  // namespace pathlens
