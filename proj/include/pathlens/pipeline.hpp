#pragma once

#include "pathlens/bundle.hpp"
#include "pathlens/dag.hpp"
#include "pathlens/query.hpp"

namespace pathlens {

struct PipelineOptions {
    TimeWindow window;
    std::optional<Instant> now;  // ingestion clock; defaults to window.end
    int threads = 1;
    std::string journey_id;    // empty = first configured journey
    std::string baseline_dir;  // previous window's artifacts; enables regressions + novelty
    BundleLimits bundle;
};

TerminalOutcome target_outcome(const JourneyDefinition& def);

// Journeys, segment snapshots and chain metrics for one window.
struct WindowComputation {
    JourneyDefinition def;
    SnapshotSlice all;
    std::vector<SnapshotSlice> segments;
    ChainMetrics metrics;
    std::vector<std::string> warnings;
};

WindowComputation compute_window(const PlatformConfig& cfg,
                                 const std::vector<DerivedStateEvent>& derived,
                                 const std::map<std::string, PropertyMap>& actor_props,
                                 const PipelineOptions& opt);

struct PipelineResult {
    std::map<std::string, std::string> artifacts;  // logical name -> path
    std::string snapshot_id;
    std::int64_t n_events_in = 0;
    std::int64_t n_derived = 0;
    std::int64_t n_journeys = 0;
    std::int64_t n_findings = 0;
    std::int64_t n_facts = 0;
    std::int64_t n_feed = 0;
    std::vector<DetectorRunError> detector_errors;
    std::vector<std::string> warnings;

    Json to_json() const;
};

// Full M2..M8 run over one window; every artifact is content-addressed and
// byte-identical across reruns of the same inputs.
PipelineResult run_pipeline(const PlatformConfig& cfg, const std::vector<Json>& raw_lines,
                            const std::string& out_dir, const PipelineOptions& opt);
PipelineResult run_pipeline_events(const PlatformConfig& cfg, std::vector<RawEvent> events,
                                   const std::string& out_dir, const PipelineOptions& opt);

// Artifact helpers shared by the CLI stages.
void write_nsd_artifacts(const NsdResult& nsd, const std::string& out_dir);

struct NsdArtifacts {
    std::vector<DerivedStateEvent> derived;
    std::map<std::string, PropertyMap> actor_properties;
};
NsdArtifacts load_nsd_artifacts(const std::string& out_dir);

void write_snapshot_artifacts(const WindowComputation& wc, const std::string& out_dir);
GraphSnapshot load_snapshot(const std::string& path);
std::vector<Finding> load_findings(const std::string& path);
std::vector<SnapshotMeta> load_journey_index(const std::string& out_dir);

// Ranked feed with template narratives; returns the feed document.
Json build_feed_document(const std::vector<ScoredInsight>& feed, const FactStore& store,
                         const PlatformConfig& cfg, const TimeWindow& window,
                         const std::string& journey_id, const BundleLimits& limits);

FindingHistory load_history(const std::string& baseline_dir);

}  // namespace pathlens
