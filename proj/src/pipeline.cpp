#include "pathlens/pipeline.hpp"

#include <algorithm>
#include <filesystem>

#include "pathlens/error.hpp"
#include "pathlens/io.hpp"

namespace pathlens {

namespace {

std::string path_join(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

std::string segment_file_name(const std::string& segment_id) {
    std::string safe = segment_id;
    for (auto& c : safe)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') c = '_';
    return "snapshot_" + safe + ".json";
}

}  // namespace

TerminalOutcome target_outcome(const JourneyDefinition& def) {
    std::set<TerminalOutcome> present;
    for (const auto& [s, t] : def.terminal_map) {
        (void)s;
        present.insert(t);
    }
    if (present.count(TerminalOutcome::Converted)) return TerminalOutcome::Converted;
    for (TerminalOutcome t : kAllOutcomes)
        if (present.count(t)) return t;
    return TerminalOutcome::Converted;
}

WindowComputation compute_window(const PlatformConfig& cfg,
                                 const std::vector<DerivedStateEvent>& derived,
                                 const std::map<std::string, PropertyMap>& actor_props,
                                 const PipelineOptions& opt) {
    WindowComputation wc;
    wc.def = opt.journey_id.empty() ? cfg.journeys.front() : cfg.journey(opt.journey_id);

    std::set<std::string> known;
    for (const auto& r : cfg.state_rules.rules) known.insert(r.state_id);
    for (const auto& d : derived) known.insert(d.state_id);
    wc.def = validate_journey_definition(wc.def, known);

    auto journeys = extract_journeys(derived, wc.def, opt.window);
    if (journeys.empty())
        fail("empty_snapshot", "no journeys extracted for window " + opt.window.id());

    auto all_snapshot = build_snapshot(journeys, wc.def, opt.window, nullptr, actor_props,
                                       cfg.detector.top_paths);
    wc.metrics = compute_chain_metrics(all_snapshot, journeys, wc.def, target_outcome(wc.def),
                                       cfg.detector.tau_candidate);
    wc.all = SnapshotSlice::make(std::move(all_snapshot), journeys);

    for (const auto& seg : cfg.segments) {
        auto scoped = filter_journeys_for_segment(journeys, &seg, actor_props);
        if (scoped.empty()) {
            wc.warnings.push_back("segment '" + seg.segment_id + "' has no journeys; skipped");
            continue;
        }
        auto snap =
            build_snapshot(journeys, wc.def, opt.window, &seg, actor_props, cfg.detector.top_paths);
        wc.segments.push_back(SnapshotSlice::make(std::move(snap), std::move(scoped)));
    }
    return wc;
}

void write_nsd_artifacts(const NsdResult& nsd, const std::string& out_dir) {
    std::string normalized;
    for (const auto& e : nsd.normalized) {
        normalized += normalized_to_json(e).dump();
        normalized += '\n';
    }
    atomic_write_file(path_join(out_dir, "normalized_events.jsonl"), normalized);

    std::string derived;
    for (const auto& d : nsd.derived) {
        derived += derived_to_json(d).dump();
        derived += '\n';
    }
    atomic_write_file(path_join(out_dir, "derived_states.jsonl"), derived);

    std::string quarantine;
    for (const auto& q : nsd.quarantined) {
        Json j = Json::object();
        j["reason"] = q.reason;
        j["event"] = q.original;
        quarantine += j.dump();
        quarantine += '\n';
    }
    for (const auto& d : nsd.bot_dropped) {
        Json j = Json::object();
        j["reason"] = d.reason;
        j["event"] = raw_event_to_json(d.event);
        quarantine += j.dump();
        quarantine += '\n';
    }
    atomic_write_file(path_join(out_dir, "quarantine.jsonl"), quarantine);

    Json props = Json::object();
    props["schema_version"] = 1;
    Json actors = Json::object();
    for (const auto& [actor, pm] : nsd.actor_properties) actors[actor] = to_json(pm);
    props["actors"] = actors;
    atomic_write_file(path_join(out_dir, "actor_props.json"), props.dump(2) + "\n");
}

NsdArtifacts load_nsd_artifacts(const std::string& out_dir) {
    NsdArtifacts out;
    for (const auto& j : read_jsonl(path_join(out_dir, "derived_states.jsonl")))
        out.derived.push_back(derived_from_json(j));
    const auto props = Json::parse(read_file(path_join(out_dir, "actor_props.json")));
    for (const auto& [actor, pm] : props.at("actors").items())
        out.actor_properties[actor] = property_map_from_json(pm);
    return out;
}

void write_snapshot_artifacts(const WindowComputation& wc, const std::string& out_dir) {
    atomic_write_file(path_join(out_dir, "snapshot_all.json"),
                      snapshot_to_json(wc.all.snapshot).dump(2) + "\n");
    for (const auto& slice : wc.segments)
        atomic_write_file(path_join(out_dir, segment_file_name(slice.snapshot.segment_id)),
                          snapshot_to_json(slice.snapshot).dump(2) + "\n");

    Json metrics = Json::object();
    metrics["schema_version"] = 1;
    metrics[wc.all.snapshot.snapshot_id] = metrics_to_json(wc.metrics);
    atomic_write_file(path_join(out_dir, "metrics.json"), metrics.dump(2) + "\n");

    Json index = Json::object();
    index["schema_version"] = 1;
    Json snaps = Json::array();
    auto meta = [](const GraphSnapshot& s) {
        return Json{{"snapshot_id", s.snapshot_id},
                    {"journey_id", s.journey_id},
                    {"segment_id", s.segment_id},
                    {"window", Json{{"start", format_rfc3339(s.window.start)},
                                    {"end", format_rfc3339(s.window.end)}}}};
    };
    snaps.push_back(meta(wc.all.snapshot));
    for (const auto& slice : wc.segments) snaps.push_back(meta(slice.snapshot));
    index["snapshots"] = snaps;
    atomic_write_file(path_join(out_dir, "journey_index.json"), index.dump(2) + "\n");
}

GraphSnapshot load_snapshot(const std::string& path) {
    return snapshot_from_json(Json::parse(read_file(path)));
}

std::vector<Finding> load_findings(const std::string& path) {
    std::vector<Finding> out;
    for (const auto& j : read_jsonl(path)) out.push_back(finding_from_json(j));
    return out;
}

std::vector<SnapshotMeta> load_journey_index(const std::string& out_dir) {
    const auto j = Json::parse(read_file(path_join(out_dir, "journey_index.json")));
    std::vector<SnapshotMeta> out;
    for (const auto& s : j.at("snapshots")) {
        SnapshotMeta m;
        m.snapshot_id = s.at("snapshot_id").get<std::string>();
        m.journey_id = s.at("journey_id").get<std::string>();
        m.segment_id = s.at("segment_id").get<std::string>();
        m.window.start = parse_rfc3339(s.at("window").at("start").get<std::string>());
        m.window.end = parse_rfc3339(s.at("window").at("end").get<std::string>());
        out.push_back(std::move(m));
    }
    return out;
}

FindingHistory load_history(const std::string& baseline_dir) {
    FindingHistory history;
    const std::string path = path_join(baseline_dir, "findings.jsonl");
    if (!file_exists(path)) return history;
    std::set<FindingKey> keys;
    for (const auto& f : load_findings(path)) keys.insert(finding_key(f));
    history.push_back(std::move(keys));
    return history;
}

Json build_feed_document(const std::vector<ScoredInsight>& feed, const FactStore& store,
                         const PlatformConfig& cfg, const TimeWindow& window,
                         const std::string& journey_id, const BundleLimits& limits) {
    Json items = Json::array();
    for (const auto& insight : feed) {
        Json item = Json::object();
        item["rank"] = insight.rank;
        item["score"] = insight.score;
        item["components"] = Json{{"significance", insight.components.significance},
                                  {"magnitude", insight.components.magnitude},
                                  {"reach", insight.components.reach},
                                  {"actionability", insight.components.actionability},
                                  {"novelty", insight.components.novelty}};
        item["insight_type"] = to_string(insight.finding.detector);
        item["predicate"] = insight.finding.predicate;

        std::string content;
        std::string bundle_id;
        bool grounded = false;
        try {
            const auto bundle = build_fact_bundle(insight.finding, store, limits);
            const auto grounding = validate_grounding(bundle, cfg);
            bundle_id = bundle.bundle_id;
            if (grounding.overall) {
                grounded = true;
                content = render_narrative(bundle, grounding).text;
            }
        } catch (const Error&) {
            // findings without stored facts publish no narrative
        }
        item["content"] = content;
        item["confidence"] = Json{{"score", insight.finding.confidence.score},
                                  {"label", insight.finding.confidence.label}};
        Json evidence = Json::object();
        for (const auto& [k, v] : insight.finding.evidence)
            std::visit([&](const auto& x) { evidence[k] = x; }, v);
        item["evidence"] = evidence;
        item["timestamp"] = format_rfc3339(insight.finding.created_at);
        item["finding_id"] = insight.finding.finding_id;
        Json ents = Json::array();
        for (const auto& e : insight.finding.entities) ents.push_back(e.id);
        item["entities"] = ents;
        item["bundle_id"] = bundle_id;
        item["generator"] = grounded ? "template" : "";
        item["grounded"] = grounded;
        items.push_back(std::move(item));
    }
    return Json{{"schema_version", 1},
                {"journey_id", journey_id},
                {"window", Json{{"start", format_rfc3339(window.start)},
                                {"end", format_rfc3339(window.end)}}},
                {"generated_at", format_rfc3339(window.end)},
                {"items", items}};
}

PipelineResult run_pipeline_events(const PlatformConfig& cfg, std::vector<RawEvent> events,
                                   const std::string& out_dir, const PipelineOptions& opt) {
    PipelineResult res;
    res.n_events_in = static_cast<std::int64_t>(events.size());
    const Instant now = opt.now.value_or(opt.window.end);

    // Stage: NSD.
    auto nsd = run_nsd_events(std::move(events), cfg, now, opt.window.end);
    write_nsd_artifacts(nsd, out_dir);
    res.artifacts["normalized_events"] = path_join(out_dir, "normalized_events.jsonl");
    res.artifacts["derived_states"] = path_join(out_dir, "derived_states.jsonl");
    res.artifacts["quarantine"] = path_join(out_dir, "quarantine.jsonl");
    res.artifacts["actor_props"] = path_join(out_dir, "actor_props.json");
    res.n_derived = static_cast<std::int64_t>(nsd.derived.size());

    // Stage: journeys, snapshots, metrics.
    auto wc = compute_window(cfg, nsd.derived, nsd.actor_properties, opt);
    write_snapshot_artifacts(wc, out_dir);
    res.artifacts["snapshot"] = path_join(out_dir, "snapshot_all.json");
    res.artifacts["metrics"] = path_join(out_dir, "metrics.json");
    res.artifacts["journey_index"] = path_join(out_dir, "journey_index.json");
    res.snapshot_id = wc.all.snapshot.snapshot_id;
    res.n_journeys = wc.all.snapshot.n_journeys;
    for (auto& w : wc.warnings) res.warnings.push_back(std::move(w));

    // Stage: detectors.
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
    res.detector_errors = run.errors;
    for (const auto& w : run.warnings) res.warnings.push_back(w);

    std::string findings_text;
    for (const auto& f : run.findings) {
        findings_text += finding_to_json(f).dump();
        findings_text += '\n';
    }
    atomic_write_file(path_join(out_dir, "findings.jsonl"), findings_text);
    res.artifacts["findings"] = path_join(out_dir, "findings.jsonl");
    res.n_findings = static_cast<std::int64_t>(run.findings.size());

    // Stage: facts.
    FactStore store;
    for (auto& fact : facts_from_findings(run.findings, wc.all.snapshot, cfg))
        store.assert_fact(std::move(fact));
    store.save_jsonl(path_join(out_dir, "facts.jsonl"));
    res.artifacts["facts"] = path_join(out_dir, "facts.jsonl");
    res.n_facts = static_cast<std::int64_t>(store.facts().size());

    // Stage: ranked feed with template narratives.
    const auto feed_doc = build_feed_document(run.feed, store, cfg, opt.window, wc.def.journey_id,
                                              opt.bundle);
    atomic_write_file(path_join(out_dir, "feed.json"), feed_doc.dump(2) + "\n");
    res.artifacts["feed"] = path_join(out_dir, "feed.json");
    res.n_feed = static_cast<std::int64_t>(run.feed.size());

    Json report = res.to_json();
    atomic_write_file(path_join(out_dir, "run_report.json"), report.dump(2) + "\n");
    res.artifacts["run_report"] = path_join(out_dir, "run_report.json");
    return res;
}

PipelineResult run_pipeline(const PlatformConfig& cfg, const std::vector<Json>& raw_lines,
                            const std::string& out_dir, const PipelineOptions& opt) {
    const Instant now = opt.now.value_or(opt.window.end);
    auto norm = normalize_json_lines(raw_lines, cfg.ingest.lag_tolerance, now);
    // Quarantined parse failures re-enter through run_nsd_events' own pass;
    // writing both would duplicate. Feed typed events forward and let the
    // event-path pipeline own artifact writing, then merge quarantine rows.
    auto res = run_pipeline_events(cfg, std::move(norm.accepted), out_dir, opt);
    if (!norm.quarantined.empty()) {
        std::string extra = read_file(path_join(out_dir, "quarantine.jsonl"));
        for (const auto& q : norm.quarantined) {
            Json j = Json::object();
            j["reason"] = q.reason;
            j["event"] = q.original;
            extra += j.dump();
            extra += '\n';
        }
        atomic_write_file(path_join(out_dir, "quarantine.jsonl"), extra);
    }
    res.n_events_in = static_cast<std::int64_t>(raw_lines.size());
    return res;
}

Json PipelineResult::to_json() const {
    Json artifacts_json = Json::object();
    // File names only: reports must not depend on where the run happened.
    for (const auto& [k, v] : artifacts)
        artifacts_json[k] = std::filesystem::path(v).filename().string();
    Json errors = Json::array();
    for (const auto& e : detector_errors)
        errors.push_back(Json{{"job", e.job_id}, {"code", e.code}, {"message", e.message}});
    return Json{{"schema_version", 1},
                {"snapshot_id", snapshot_id},
                {"n_events_in", n_events_in},
                {"n_derived", n_derived},
                {"n_journeys", n_journeys},
                {"n_findings", n_findings},
                {"n_facts", n_facts},
                {"n_feed", n_feed},
                {"detector_errors", errors},
                {"warnings", warnings},
                {"artifacts", artifacts_json}};
}

}  // namespace pathlens
