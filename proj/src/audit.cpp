#include "pathlens/audit.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

#include "pathlens/error.hpp"
#include "pathlens/io.hpp"

namespace pathlens {

namespace {

std::string path_join(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

bool numbers_equal(const EvidenceValue& a, const EvidenceValue& b) {
    const auto as_double = [](const EvidenceValue& v) -> std::optional<double> {
        if (const auto* d = std::get_if<double>(&v)) return *d;
        if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
        return std::nullopt;
    };
    const auto da = as_double(a);
    const auto db = as_double(b);
    if (da && db) return std::abs(*da - *db) <= 1e-9;
    return std::get<std::string>(a) == std::get<std::string>(b);
}

}  // namespace

AuditReport audit_traceability(const PlatformConfig& cfg, const std::string& out_dir,
                               const PipelineOptions& opt, std::int64_t sample_size,
                               std::uint64_t seed) {
    const std::string facts_path = path_join(out_dir, "facts.jsonl");
    if (!file_exists(facts_path)) fail("missing_artifact", facts_path + " not found");
    if (!file_exists(path_join(out_dir, "derived_states.jsonl")))
        fail("missing_artifact", "derived_states.jsonl not found in " + out_dir);

    std::vector<BehavioralFact> stored;
    for (const auto& j : read_jsonl(facts_path)) stored.push_back(fact_from_json(j));

    // Deterministic recomputation through the real pipeline operations.
    const auto nsd = load_nsd_artifacts(out_dir);
    const auto wc = compute_window(cfg, nsd.derived, nsd.actor_properties, opt);

    std::optional<GraphSnapshot> baseline;
    FindingHistory history;
    if (!opt.baseline_dir.empty()) {
        const std::string snap_path = path_join(opt.baseline_dir, "snapshot_all.json");
        if (file_exists(snap_path)) baseline = load_snapshot(snap_path);
        history = load_history(opt.baseline_dir);
    }
    DetectorRunInputs inputs;
    inputs.current = &wc.all;
    inputs.metrics = &wc.metrics;
    inputs.baseline = baseline ? &*baseline : nullptr;
    for (const auto& slice : wc.segments) inputs.segment_slices.push_back(&slice);
    inputs.releases = cfg.releases;
    const auto run =
        run_detector_dag(inputs, DetectorRegistry::standard(), cfg, history, opt.threads);

    FactStore regen;
    for (auto& fact : facts_from_findings(run.findings, wc.all.snapshot, cfg))
        regen.assert_fact(std::move(fact));

    // Seeded sample without replacement.
    std::vector<std::size_t> order(stored.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t take =
        std::min<std::size_t>(order.size(), static_cast<std::size_t>(std::max<std::int64_t>(0, sample_size)));
    order.resize(take);
    std::sort(order.begin(), order.end());

    AuditReport report;
    report.sampled = static_cast<std::int64_t>(take);
    for (const std::size_t idx : order) {
        const auto& fact = stored[idx];
        report.sampled_ids.push_back(fact.fact_id);

        const auto* fresh = regen.by_id(fact.fact_id);
        if (!fresh) {
            report.mismatches.push_back(
                {fact.fact_id, "no recomputed fact carries this content hash"});
            continue;
        }
        bool ok = true;
        std::string detail;
        for (const auto& [k, v] : fact.evidence_payload) {
            const auto* rv = evidence_find(fresh->evidence_payload, k);
            if (!rv) {
                ok = false;
                detail = "recomputed evidence lacks key '" + k + "'";
                break;
            }
            if (!numbers_equal(v, *rv)) {
                ok = false;
                detail = "evidence '" + k + "' differs from recomputation";
                break;
            }
        }
        if (ok && fact.evidence_payload.size() != fresh->evidence_payload.size()) {
            ok = false;
            detail = "evidence key sets differ";
        }
        if (ok && std::abs(fact.confidence.score - fresh->confidence.score) > 1e-9) {
            ok = false;
            detail = "confidence score differs";
        }
        if (ok)
            ++report.matched;
        else
            report.mismatches.push_back({fact.fact_id, detail});
    }
    report.rate = report.sampled == 0
                      ? 1.0
                      : static_cast<double>(report.matched) / static_cast<double>(report.sampled);
    return report;
}

Json audit_report_to_json(const AuditReport& r) {
    Json mismatches = Json::array();
    for (const auto& m : r.mismatches)
        mismatches.push_back(Json{{"fact_id", m.fact_id}, {"detail", m.detail}});
    return Json{{"schema_version", 1},
                {"sampled", r.sampled},
                {"matched", r.matched},
                {"rate", r.rate},
                {"sampled_fact_ids", r.sampled_ids},
                {"mismatches", mismatches}};
}

}  // namespace pathlens
