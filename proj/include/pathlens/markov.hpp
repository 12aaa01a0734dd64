#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "pathlens/journeys.hpp"
#include "pathlens/snapshot.hpp"

namespace pathlens {

// Absorbing chain over named states. Every Q row plus R row sums to at most
// 1 + 1e-9 (exactly 1 for fully observed states), and every transient state
// must reach absorption through nonzero entries.
struct AbsorbingChain {
    std::vector<std::string> transient;
    std::vector<std::string> absorbing;
    Eigen::MatrixXd Q;  // |S| x |S|
    Eigen::MatrixXd R;  // |S| x |A|

    int transient_index(const std::string& s) const;
    int absorbing_index(const std::string& a) const;
};

AbsorbingChain chain_from_snapshot(const GraphSnapshot& snap);

// Transient states with no path to any absorbing state (reverse traversal
// over nonzero entries). Empty result means the chain is absorbing.
std::vector<int> non_absorbing_states(const AbsorbingChain& chain);

// N = (I - Q)^-1 via dense LU solve. Throws not_absorbing with the offending
// states before attempting the solve.
Eigen::MatrixXd fundamental_matrix(const AbsorbingChain& chain);

// B = N * R. Throws dimension_mismatch.
Eigen::MatrixXd absorption_probabilities(const Eigen::MatrixXd& N, const Eigen::MatrixXd& R);

// t_i = sum_j N_ij.
Eigen::VectorXd expected_steps(const Eigen::MatrixXd& N);

enum class ConditionalStatus {
    Ok,
    NecessaryForConversion,  // nobody converts without the state
    AllReached,              // complement empty: p_not_reached undefined
    NoneReached              // state never reached: p_reached undefined
};

struct ConversionConditionals {
    ConditionalStatus status = ConditionalStatus::Ok;
    double p_reached = 0;
    double p_not_reached = 0;
    double lift = 0;          // raw ratio; display-capped separately
    std::int64_t n_reached = 0;
    std::int64_t n_not_reached = 0;
    double z = 0;             // two-proportion test, reached vs not reached
    double p_value = 1.0;
};

inline constexpr double kLiftDisplayCap = 999.0;

ConversionConditionals conversion_conditionals(const std::vector<JourneyInstance>& journeys,
                                               const std::string& state, TerminalOutcome outcome);

// Conversion-rate drop at the start when `state` is deleted and predecessor
// rows are renormalized. Predecessors left with zero outgoing mass route all
// of it to `fallback` (the journey's drop-off outcome). start_weights is a
// distribution over transient states; multi-start journeys pass their
// reach-weighted start distribution.
double removal_effect(const AbsorbingChain& chain, const Eigen::VectorXd& start_weights,
                      int state, int outcome, int fallback);

double removal_effect(const AbsorbingChain& chain, const std::string& start_state,
                      const std::string& state, const std::string& outcome);

struct CandidateState {
    int index = 0;
    double reach = 0;
    double lift = 0;
    bool necessary = false;  // necessary_for_conversion states always pass
};

// reach * lift * n > tau pre-filter for the cubic-cost removal computation.
std::vector<int> candidate_filter(const std::vector<CandidateState>& states, std::int64_t n,
                                  double tau_candidate);

struct StateMetrics {
    std::string state;
    ConversionConditionals conditionals;
    std::optional<double> removal;  // set for candidate states only
};

struct ChainMetrics {
    AbsorbingChain chain;
    Eigen::MatrixXd N;
    Eigen::MatrixXd B;
    Eigen::VectorXd t;
    std::vector<StateMetrics> per_state;  // aligned with chain.transient
    TerminalOutcome target = TerminalOutcome::Converted;
    Eigen::VectorXd start_weights;
};

// Full metric pass for one snapshot: matrices, per-state conditionals against
// the target outcome, and removal effects for candidate states.
ChainMetrics compute_chain_metrics(const GraphSnapshot& snap,
                                   const std::vector<JourneyInstance>& journeys,
                                   const JourneyDefinition& def, TerminalOutcome target,
                                   double tau_candidate);

Json metrics_to_json(const ChainMetrics& m);

}  // namespace pathlens
