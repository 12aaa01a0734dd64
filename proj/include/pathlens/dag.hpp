#pragma once

#include "pathlens/scoring.hpp"

namespace pathlens {

struct DetectorJob {
    std::string job_id;
    DetectorKind kind = DetectorKind::ActivationDriver;
    std::vector<std::string> after;  // job ids this one waits for
};

struct DetectorRegistry {
    std::vector<DetectorJob> jobs;

    // Single-snapshot detectors in level 1; the two comparative detectors
    // (regression, divergence) declared after them.
    static DetectorRegistry standard();
};

// Kahn levels over the declared dependencies; throws cycle_detected.
std::vector<std::vector<std::string>> topo_levels(const DetectorRegistry& registry);

struct DetectorRunInputs {
    const SnapshotSlice* current = nullptr;   // required
    const ChainMetrics* metrics = nullptr;    // required
    const GraphSnapshot* baseline = nullptr;  // optional; enables regression jobs
    std::vector<const SnapshotSlice*> segment_slices;  // optional; divergence pairs
    std::vector<Release> releases;
};

struct DetectorRunError {
    std::string job_id;
    std::string code;
    std::string message;
};

struct DetectorRunResult {
    std::vector<Finding> findings;  // sorted by (detector, finding_id)
    std::vector<ScoredInsight> feed;
    std::vector<DetectorRunError> errors;  // failed detectors, isolated
    std::vector<std::string> warnings;
    std::vector<std::vector<std::string>> levels;  // executed topological levels
};

// Runs every registered job level by level (jobs within a level may run on
// worker threads), merges findings deterministically, scores them, and
// assembles the ranked feed. Identical inputs produce identical results for
// any thread count.
DetectorRunResult run_detector_dag(const DetectorRunInputs& inputs,
                                   const DetectorRegistry& registry, const PlatformConfig& cfg,
                                   const FindingHistory& history, int threads);

}  // namespace pathlens
