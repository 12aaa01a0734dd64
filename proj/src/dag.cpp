#include "pathlens/dag.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "pathlens/error.hpp"
#include "pathlens/parallel.hpp"

namespace pathlens {

DetectorRegistry DetectorRegistry::standard() {
    DetectorRegistry r;
    r.jobs = {
        {"activation", DetectorKind::ActivationDriver, {}},
        {"dropoff", DetectorKind::DropOffCluster, {}},
        {"loops", DetectorKind::UnexpectedLoop, {}},
        {"paths", DetectorKind::PathQuality, {}},
        {"regression", DetectorKind::TemporalRegression, {"activation", "dropoff"}},
        {"divergence", DetectorKind::SegmentDivergence, {"activation", "dropoff"}},
    };
    return r;
}

std::vector<std::vector<std::string>> topo_levels(const DetectorRegistry& registry) {
    std::map<std::string, int> indexed;
    for (std::size_t i = 0; i < registry.jobs.size(); ++i) {
        const auto& id = registry.jobs[i].job_id;
        if (indexed.count(id)) fail("cycle_detected", "duplicate job id '" + id + "'");
        indexed[id] = static_cast<int>(i);
    }
    for (const auto& j : registry.jobs)
        for (const auto& dep : j.after)
            if (!indexed.count(dep))
                fail("cycle_detected", "job '" + j.job_id + "' depends on unknown '" + dep + "'");

    std::map<std::string, int> level;
    std::vector<std::vector<std::string>> out;
    std::size_t placed = 0;
    while (placed < registry.jobs.size()) {
        std::vector<std::string> this_level;
        for (const auto& j : registry.jobs) {
            if (level.count(j.job_id)) continue;
            bool ready = true;
            for (const auto& dep : j.after)
                if (!level.count(dep)) {
                    ready = false;
                    break;
                }
            if (ready) this_level.push_back(j.job_id);
        }
        if (this_level.empty())
            fail("cycle_detected", "detector registry contains a dependency cycle");
        for (const auto& id : this_level) level[id] = static_cast<int>(out.size());
        placed += this_level.size();
        out.push_back(std::move(this_level));
    }
    return out;
}

DetectorRunResult run_detector_dag(const DetectorRunInputs& inputs,
                                   const DetectorRegistry& registry, const PlatformConfig& cfg,
                                   const FindingHistory& history, int threads) {
    if (!inputs.current || !inputs.metrics)
        fail("missing_component", "detector run needs a current snapshot slice and metrics");

    DetectorRunResult result;
    result.levels = topo_levels(registry);

    if (cfg.detector.tau_loop == 0.0)
        result.warnings.push_back("tau_loop = 0 flags every reached state");

    std::map<std::string, const DetectorJob*> jobs;
    for (const auto& j : registry.jobs) jobs[j.job_id] = &j;

    std::vector<std::vector<Finding>> slots(registry.jobs.size());
    std::map<std::string, std::size_t> slot_of;
    for (std::size_t i = 0; i < registry.jobs.size(); ++i)
        slot_of[registry.jobs[i].job_id] = i;

    struct JobError {
        std::string job_id;
        std::string code;
        std::string message;
    };
    std::vector<std::optional<JobError>> errors(registry.jobs.size());

    auto run_job = [&](const DetectorJob& job) -> std::vector<Finding> {
        switch (job.kind) {
            case DetectorKind::ActivationDriver:
                return detect_activation_drivers(*inputs.current, *inputs.metrics, cfg);
            case DetectorKind::DropOffCluster:
                return detect_dropoffs(*inputs.current, *inputs.metrics, cfg);
            case DetectorKind::UnexpectedLoop:
                return detect_repeated_visits(*inputs.current, cfg);
            case DetectorKind::PathQuality:
                return detect_path_quality(*inputs.current, cfg);
            case DetectorKind::TemporalRegression: {
                if (!inputs.baseline) return {};
                return detect_regressions(*inputs.baseline, *inputs.current, inputs.releases, cfg);
            }
            case DetectorKind::SegmentDivergence: {
                std::vector<Finding> all;
                for (std::size_t i = 0; i < inputs.segment_slices.size(); ++i)
                    for (std::size_t k = i + 1; k < inputs.segment_slices.size(); ++k) {
                        auto part = detect_segment_divergence(*inputs.segment_slices[i],
                                                              *inputs.segment_slices[k], cfg);
                        all.insert(all.end(), part.begin(), part.end());
                    }
                return all;
            }
        }
        fail("invalid_detector", "unknown detector enum value");
    };

    for (const auto& lvl : result.levels) {
        parallel_for(lvl.size(), threads, [&](std::size_t i) {
            const auto& job = *jobs.at(lvl[i]);
            const std::size_t slot = slot_of.at(job.job_id);
            try {
                slots[slot] = run_job(job);
            } catch (const Error& e) {
                errors[slot] = JobError{job.job_id, e.code(), e.what()};
            } catch (const std::exception& e) {
                errors[slot] = JobError{job.job_id, "detector_failure", e.what()};
            }
        });
    }

    for (std::size_t i = 0; i < registry.jobs.size(); ++i) {
        if (errors[i]) {
            result.errors.push_back({errors[i]->job_id, errors[i]->code, errors[i]->message});
            continue;
        }
        result.findings.insert(result.findings.end(), slots[i].begin(), slots[i].end());
    }

    std::sort(result.findings.begin(), result.findings.end(),
              [](const Finding& a, const Finding& b) {
                  if (a.detector != b.detector)
                      return static_cast<int>(a.detector) < static_cast<int>(b.detector);
                  return a.finding_id < b.finding_id;
              });

    result.feed = assemble_feed(result.findings, cfg.weights, cfg, history);
    return result;
}

}  // namespace pathlens
