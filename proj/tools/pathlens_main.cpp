// pathlens CLI: one subcommand per pipeline stage so every stage stays
// independently runnable and testable.

#include <CLI11.hpp>
#include <iostream>

#include "pathlens/audit.hpp"
#include "pathlens/error.hpp"
#include "pathlens/io.hpp"
#include "pathlens/pipeline.hpp"
#include "pathlens/simulator.hpp"

namespace {

using namespace pathlens;

int exit_code_for(const Error& e) {
    static const std::set<std::string> input_errors = {
        "config_error",    "input_error",        "missing_artifact", "unparseable_timestamp",
        "invalid_event",   "invalid_property",   "invalid_chain",    "invalid_rule",
        "unknown_state",   "empty_terminal_map", "overlapping_start_terminal",
        "non_positive_length", "invalid_outcome", "invalid_condition", "invalid_level",
        "invalid_lifecycle", "invalid_detector", "invalid_entity",   "invalid_finding",
        "invalid_sample"};
    if (e.code() == "generation_failed") return 3;
    if (input_errors.count(e.code())) return 1;
    return 2;
}

struct GlobalArgs {
    std::string config_path;
    std::string out_dir = "out";
    std::string window_end = "2024-01-08T00:00:00Z";
    int window_days = 7;
    std::uint64_t seed = 1;
    int threads = 1;
    bool json = false;
    std::string baseline_dir;
    std::string journey_id;
};

PipelineOptions make_options(const GlobalArgs& g) {
    PipelineOptions opt;
    opt.window = resolve_window(parse_rfc3339(g.window_end), Duration::days(g.window_days));
    opt.threads = g.threads;
    opt.baseline_dir = g.baseline_dir;
    opt.journey_id = g.journey_id;
    return opt;
}

PlatformConfig require_config(const GlobalArgs& g) {
    if (g.config_path.empty()) fail("config_error", "--config is required for this command");
    return load_config(g.config_path);
}

void emit(const GlobalArgs& g, const Json& report, const std::string& human) {
    if (g.json)
        std::cout << report.dump(2) << "\n";
    else
        std::cout << human << "\n";
}

std::string join_path(const std::string& dir, const std::string& name) {
    return dir.empty() ? name : dir + "/" + name;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"journey analytics pipeline"};
    app.require_subcommand(1);

    GlobalArgs g;
    app.add_option("--config", g.config_path, "platform config file");
    app.add_option("--out-dir", g.out_dir, "artifact directory");
    app.add_option("--window-end", g.window_end, "analysis window end (RFC3339)");
    app.add_option("--window-days", g.window_days, "analysis window length in days");
    app.add_option("--seed", g.seed, "random seed");
    app.add_option("--threads", g.threads, "worker threads");
    app.add_option("--baseline", g.baseline_dir, "previous window's artifact directory");
    app.add_option("--journey", g.journey_id, "journey id (default: first configured)");
    app.add_flag("--json", g.json, "machine-readable stage report on stdout");

    // simulate
    auto* sim = app.add_subcommand("simulate", "generate a seeded synthetic event stream");
    std::string spec_path;
    std::int64_t sim_n = 10000;
    std::string sim_start = "2024-01-01T06:00:00Z";
    std::int64_t spacing_ms = 1000;
    sim->add_option("--spec", spec_path, "chain spec json")->required();
    sim->add_option("--n", sim_n, "number of journeys");
    sim->add_option("--start", sim_start, "first journey start (RFC3339)");
    sim->add_option("--spacing-ms", spacing_ms, "gap between journey starts");

    // ingest
    auto* ingest = app.add_subcommand("ingest", "normalize events and derive states");
    std::string events_path;
    ingest->add_option("--events", events_path, "events.jsonl (default <out-dir>/events.jsonl)");

    // snapshot / detect / facts / feed
    app.add_subcommand("snapshot", "build journey-graph snapshots and metrics");
    app.add_subcommand("detect", "run the detector DAG over the snapshots");
    app.add_subcommand("facts", "reify findings into the behavioral fact log");
    app.add_subcommand("feed", "score findings and assemble the narrative feed");

    // narrate
    auto* narrate = app.add_subcommand("narrate", "re-render feed narratives");
    std::string generator = "template";
    narrate->add_option("--generator", generator, "template | external");

    // query
    auto* query_cmd = app.add_subcommand("query", "answer a question from the fact store");
    std::string question;
    query_cmd->add_option("--question", question, "natural-language question")->required();

    // audit
    auto* audit_cmd = app.add_subcommand("audit", "traceability audit over stored facts");
    std::int64_t sample_size = 200;
    audit_cmd->add_option("--sample", sample_size, "facts to sample");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            auto spec = load_chain_spec(spec_path);
            if (app.count("--seed")) spec.seed = g.seed;
            const auto res = simulate_trajectories(spec, sim_n, parse_rfc3339(sim_start),
                                                   Duration{spacing_ms});
            std::string out;
            for (const auto& e : res.events) {
                out += raw_event_to_json(e).dump();
                out += '\n';
            }
            atomic_write_file(join_path(g.out_dir, "events.jsonl"), out);
            atomic_write_file(join_path(g.out_dir, "sim_summary.json"),
                              simulation_summary_to_json(res.summary).dump(2) + "\n");
            emit(g, simulation_summary_to_json(res.summary),
                 "simulated " + std::to_string(res.summary.n_journeys) + " journeys, " +
                     std::to_string(res.summary.n_events) + " events -> " +
                     join_path(g.out_dir, "events.jsonl"));
            return 0;
        }

        if (app.get_subcommand("ingest")->parsed()) {
            const auto cfg = require_config(g);
            const auto opt = make_options(g);
            const std::string path =
                events_path.empty() ? join_path(g.out_dir, "events.jsonl") : events_path;
            std::vector<Json> lines;
            for (const auto& line : read_lines(path)) {
                try {
                    lines.push_back(Json::parse(line));
                } catch (const std::exception&) {
                    lines.push_back(Json{{"unparseable_line", line}});
                }
            }
            auto nsd = run_nsd(lines, cfg, opt.now.value_or(opt.window.end), opt.window.end);
            write_nsd_artifacts(nsd, g.out_dir);
            Json report{{"n_events_in", lines.size()},
                        {"n_normalized", nsd.normalized.size()},
                        {"n_derived", nsd.derived.size()},
                        {"n_quarantined", nsd.quarantined.size()},
                        {"n_bot_dropped", nsd.bot_dropped.size()},
                        {"multi_user_components", nsd.multi_user_components}};
            emit(g, report,
                 "ingested " + std::to_string(lines.size()) + " events -> " +
                     std::to_string(nsd.derived.size()) + " derived state events");
            return 0;
        }

        if (app.get_subcommand("snapshot")->parsed()) {
            const auto cfg = require_config(g);
            const auto opt = make_options(g);
            const auto nsd = load_nsd_artifacts(g.out_dir);
            const auto wc = compute_window(cfg, nsd.derived, nsd.actor_properties, opt);
            write_snapshot_artifacts(wc, g.out_dir);
            Json report{{"snapshot_id", wc.all.snapshot.snapshot_id},
                        {"n_journeys", wc.all.snapshot.n_journeys},
                        {"states", wc.all.snapshot.states},
                        {"segments", wc.segments.size()},
                        {"warnings", wc.warnings}};
            emit(g, report,
                 "snapshot " + wc.all.snapshot.snapshot_id.substr(0, 12) + " over " +
                     std::to_string(wc.all.snapshot.n_journeys) + " journeys");
            return 0;
        }

        if (app.get_subcommand("detect")->parsed() || app.get_subcommand("feed")->parsed()) {
            const bool feed_stage = app.get_subcommand("feed")->parsed();
            const auto cfg = require_config(g);
            const auto opt = make_options(g);
            const auto nsd = load_nsd_artifacts(g.out_dir);
            const auto wc = compute_window(cfg, nsd.derived, nsd.actor_properties, opt);

            std::optional<GraphSnapshot> baseline;
            FindingHistory history;
            if (!opt.baseline_dir.empty()) {
                const std::string snap_path = opt.baseline_dir + "/snapshot_all.json";
                if (file_exists(snap_path)) baseline = load_snapshot(snap_path);
                history = load_history(opt.baseline_dir);
            }
            DetectorRunInputs inputs;
            inputs.current = &wc.all;
            inputs.metrics = &wc.metrics;
            inputs.baseline = baseline ? &*baseline : nullptr;
            for (const auto& slice : wc.segments) inputs.segment_slices.push_back(&slice);
            inputs.releases = cfg.releases;
            const auto run = run_detector_dag(inputs, DetectorRegistry::standard(), cfg, history,
                                              opt.threads);

            if (!feed_stage) {
                std::string findings_text;
                for (const auto& f : run.findings) {
                    findings_text += finding_to_json(f).dump();
                    findings_text += '\n';
                }
                atomic_write_file(join_path(g.out_dir, "findings.jsonl"), findings_text);
                Json errors = Json::array();
                for (const auto& e : run.errors)
                    errors.push_back(Json{{"job", e.job_id}, {"code", e.code}});
                Json report{{"n_findings", run.findings.size()},
                            {"levels", run.levels},
                            {"errors", errors},
                            {"warnings", run.warnings}};
                emit(g, report, std::to_string(run.findings.size()) + " findings -> " +
                                    join_path(g.out_dir, "findings.jsonl"));
                return 0;
            }

            const auto findings = load_findings(join_path(g.out_dir, "findings.jsonl"));
            const auto store = FactStore::load_jsonl(join_path(g.out_dir, "facts.jsonl"));
            const auto feed = assemble_feed(findings, cfg.weights, cfg, history);
            const auto doc = build_feed_document(feed, store, cfg, opt.window,
                                                 wc.def.journey_id, opt.bundle);
            atomic_write_file(join_path(g.out_dir, "feed.json"), doc.dump(2) + "\n");
            emit(g, Json{{"n_items", feed.size()}},
                 "feed with " + std::to_string(feed.size()) + " insights -> " +
                     join_path(g.out_dir, "feed.json"));
            return 0;
        }

        if (app.get_subcommand("facts")->parsed()) {
            const auto cfg = require_config(g);
            const auto findings = load_findings(join_path(g.out_dir, "findings.jsonl"));
            const auto snap = load_snapshot(join_path(g.out_dir, "snapshot_all.json"));
            FactStore store;
            for (auto& fact : facts_from_findings(findings, snap, cfg))
                store.assert_fact(std::move(fact));
            store.save_jsonl(join_path(g.out_dir, "facts.jsonl"));
            emit(g, Json{{"n_facts", store.facts().size()}},
                 std::to_string(store.facts().size()) + " facts -> " +
                     join_path(g.out_dir, "facts.jsonl"));
            return 0;
        }

        if (narrate->parsed()) {
            const auto cfg = require_config(g);
            const auto findings = load_findings(join_path(g.out_dir, "findings.jsonl"));
            const auto store = FactStore::load_jsonl(join_path(g.out_dir, "facts.jsonl"));
            auto doc = Json::parse(read_file(join_path(g.out_dir, "feed.json")));

            std::unique_ptr<TextGenerationClient> client;
            if (generator == "external") client = make_http_client_from_env();

            std::map<std::string, const Finding*> by_id;
            for (const auto& f : findings) by_id[f.finding_id] = &f;
            int rendered = 0;
            for (auto& item : doc.at("items")) {
                const auto it = by_id.find(item.at("finding_id").get<std::string>());
                if (it == by_id.end()) continue;
                BundleLimits limits;
                try {
                    const auto bundle = build_fact_bundle(*it->second, store, limits);
                    const auto grounding = validate_grounding(bundle, cfg);
                    if (!grounding.overall) continue;
                    const auto n = client
                                       ? render_narrative_external(bundle, grounding, *client)
                                       : render_narrative(bundle, grounding);
                    item["content"] = n.text;
                    item["generator"] = n.generator;
                    item["bundle_id"] = n.bundle_id;
                    item["grounded"] = true;
                    ++rendered;
                } catch (const Error& e) {
                    if (e.code() == "generation_failed") throw;
                }
            }
            atomic_write_file(join_path(g.out_dir, "feed.json"), doc.dump(2) + "\n");
            emit(g, Json{{"rendered", rendered}},
                 "re-rendered " + std::to_string(rendered) + " narratives (" + generator + ")");
            return 0;
        }

        if (query_cmd->parsed()) {
            const auto cfg = require_config(g);
            const auto store = FactStore::load_jsonl(join_path(g.out_dir, "facts.jsonl"));
            const auto index = load_journey_index(g.out_dir);
            QueryLimits limits;
            const auto answer = answer_query(question, store, index, cfg, limits);
            Json report{{"answer", answer.text},
                        {"journey_id", answer.journey_id},
                        {"fact_ids", answer.fact_ids},
                        {"bundle_context", answer.bundle.rendered_context}};
            emit(g, report, answer.text);
            return 0;
        }

        if (audit_cmd->parsed()) {
            const auto cfg = require_config(g);
            const auto opt = make_options(g);
            const auto report = audit_traceability(cfg, g.out_dir, opt, sample_size, g.seed);
            char line[128];
            std::snprintf(line, sizeof(line), "traceability rate %.4f (%lld/%lld matched)",
                          report.rate, static_cast<long long>(report.matched),
                          static_cast<long long>(report.sampled));
            emit(g, audit_report_to_json(report), line);
            return report.mismatches.empty() ? 0 : 2;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
