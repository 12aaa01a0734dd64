#include "pathlens/markov.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include "pathlens/error.hpp"
#include "pathlens/stats.hpp"

namespace pathlens {

int AbsorbingChain::transient_index(const std::string& s) const {
    for (std::size_t i = 0; i < transient.size(); ++i)
        if (transient[i] == s) return static_cast<int>(i);
    return -1;
}

int AbsorbingChain::absorbing_index(const std::string& a) const {
    for (std::size_t i = 0; i < absorbing.size(); ++i)
        if (absorbing[i] == a) return static_cast<int>(i);
    return -1;
}

AbsorbingChain chain_from_snapshot(const GraphSnapshot& snap) {
    AbsorbingChain c;
    c.transient = snap.states;
    for (TerminalOutcome t : snap.absorbing) c.absorbing.push_back(to_string(t));
    const auto S = static_cast<Eigen::Index>(snap.states.size());
    const auto A = static_cast<Eigen::Index>(snap.absorbing.size());
    c.Q = Eigen::MatrixXd::Zero(S, S);
    c.R = Eigen::MatrixXd::Zero(S, A);
    for (Eigen::Index i = 0; i < S; ++i) {
        for (Eigen::Index j = 0; j < S; ++j) c.Q(i, j) = snap.q(static_cast<int>(i), static_cast<int>(j));
        for (Eigen::Index k = 0; k < A; ++k) c.R(i, k) = snap.r(static_cast<int>(i), static_cast<int>(k));
    }
    return c;
}

std::vector<int> non_absorbing_states(const AbsorbingChain& chain) {
    const auto S = chain.Q.rows();
    std::vector<char> can_absorb(static_cast<std::size_t>(S), 0);
    std::deque<int> frontier;
    for (Eigen::Index i = 0; i < S; ++i) {
        if (chain.R.row(i).sum() > 0) {
            can_absorb[static_cast<std::size_t>(i)] = 1;
            frontier.push_back(static_cast<int>(i));
        }
    }
    while (!frontier.empty()) {
        const int j = frontier.front();
        frontier.pop_front();
        for (Eigen::Index i = 0; i < S; ++i) {
            if (!can_absorb[static_cast<std::size_t>(i)] && chain.Q(i, j) > 0) {
                can_absorb[static_cast<std::size_t>(i)] = 1;
                frontier.push_back(static_cast<int>(i));
            }
        }
    }
    std::vector<int> bad;
    for (Eigen::Index i = 0; i < S; ++i)
        if (!can_absorb[static_cast<std::size_t>(i)]) bad.push_back(static_cast<int>(i));
    return bad;
}

namespace {

[[noreturn]] void throw_not_absorbing(const AbsorbingChain& chain, const std::vector<int>& bad) {
    std::string msg = "no path to absorption from:";
    for (int i : bad) msg += " " + chain.transient[static_cast<std::size_t>(i)];
    fail("not_absorbing", msg);
}

}  // namespace

Eigen::MatrixXd fundamental_matrix(const AbsorbingChain& chain) {
    if (chain.Q.rows() != chain.Q.cols() || chain.Q.rows() != chain.R.rows())
        fail("dimension_mismatch", "Q must be square and share rows with R");
    for (Eigen::Index i = 0; i < chain.Q.rows(); ++i) {
        const double mass = chain.Q.row(i).sum() + chain.R.row(i).sum();
        if (mass > 1.0 + 1e-9 || chain.Q.row(i).minCoeff() < 0 || chain.R.row(i).minCoeff() < 0)
            fail("invalid_chain",
                 "row for '" + chain.transient[static_cast<std::size_t>(i)] +
                     "' is not sub-stochastic (sum " + std::to_string(mass) + ")");
    }
    const auto bad = non_absorbing_states(chain);
    if (!bad.empty()) throw_not_absorbing(chain, bad);
    const auto S = chain.Q.rows();
    const Eigen::MatrixXd M = Eigen::MatrixXd::Identity(S, S) - chain.Q;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
    Eigen::MatrixXd N = lu.solve(Eigen::MatrixXd::Identity(S, S));
    if (!N.allFinite()) fail("not_absorbing", "singular (I - Q)");
    return N;
}

Eigen::MatrixXd absorption_probabilities(const Eigen::MatrixXd& N, const Eigen::MatrixXd& R) {
    if (N.cols() != R.rows()) fail("dimension_mismatch", "N cols must match R rows");
    return N * R;
}

Eigen::VectorXd expected_steps(const Eigen::MatrixXd& N) { return N.rowwise().sum(); }

ConversionConditionals conversion_conditionals(const std::vector<JourneyInstance>& journeys,
                                               const std::string& state,
                                               TerminalOutcome outcome) {
    if (journeys.empty()) fail("no_journeys", "conditionals need at least one journey");

    std::int64_t n_reached = 0, n_not = 0, conv_reached = 0, conv_not = 0;
    for (const auto& j : journeys) {
        const bool hit = j.reached(state);
        const bool converted = j.outcome == outcome;
        if (hit) {
            ++n_reached;
            conv_reached += converted;
        } else {
            ++n_not;
            conv_not += converted;
        }
    }

    ConversionConditionals out;
    out.n_reached = n_reached;
    out.n_not_reached = n_not;
    if (n_reached == 0) {
        out.status = ConditionalStatus::NoneReached;
        return out;
    }
    out.p_reached = static_cast<double>(conv_reached) / static_cast<double>(n_reached);
    if (n_not == 0) {
        out.status = ConditionalStatus::AllReached;
        return out;
    }
    out.p_not_reached = static_cast<double>(conv_not) / static_cast<double>(n_not);

    const auto test = two_proportion_z(conv_reached, n_reached, conv_not, n_not);
    out.z = test.z;
    out.p_value = test.p_value;

    if (out.p_not_reached == 0.0) {
        out.status = out.p_reached > 0 ? ConditionalStatus::NecessaryForConversion
                                       : ConditionalStatus::Ok;
        out.lift = 0;
        return out;
    }
    out.lift = out.p_reached / out.p_not_reached;
    return out;
}

double removal_effect(const AbsorbingChain& chain, const Eigen::VectorXd& start_weights,
                      int state, int outcome, int fallback) {
    const auto S = chain.Q.rows();
    if (state < 0 || state >= S) fail("unknown_state", "removal state index out of range");
    if (start_weights(state) > 0) fail("cannot_remove_start", chain.transient[static_cast<std::size_t>(state)]);

    const Eigen::MatrixXd N = fundamental_matrix(chain);
    const Eigen::MatrixXd B = absorption_probabilities(N, chain.R);
    const double base = start_weights.dot(B.col(outcome));

    // Drop the state's row and column; renormalize what remains of each
    // predecessor row, or route dead rows to the fallback outcome.
    std::vector<int> keep;
    keep.reserve(static_cast<std::size_t>(S) - 1);
    for (int i = 0; i < S; ++i)
        if (i != state) keep.push_back(i);

    const auto S2 = static_cast<Eigen::Index>(keep.size());
    Eigen::MatrixXd Q2(S2, S2);
    Eigen::MatrixXd R2(S2, chain.R.cols());
    for (Eigen::Index i = 0; i < S2; ++i) {
        for (Eigen::Index j = 0; j < S2; ++j) Q2(i, j) = chain.Q(keep[i], keep[j]);
        R2.row(i) = chain.R.row(keep[i]);
    }
    for (Eigen::Index i = 0; i < S2; ++i) {
        const double lost = chain.Q(keep[i], state);
        if (lost <= 0) continue;  // not a predecessor; row keeps its mass
        const double orig = chain.Q.row(keep[i]).sum() + chain.R.row(keep[i]).sum();
        const double mass = Q2.row(i).sum() + R2.row(i).sum();
        if (mass > 1e-12) {
            // Scale what remains back up to the row's original total, so
            // sub-stochastic (partially observed) rows keep their deficit.
            Q2.row(i) *= orig / mass;
            R2.row(i) *= orig / mass;
        } else {
            R2.row(i).setZero();
            R2(i, fallback) = orig;
        }
    }

    AbsorbingChain reduced;
    reduced.absorbing = chain.absorbing;
    reduced.transient.reserve(keep.size());
    for (int i : keep) reduced.transient.push_back(chain.transient[static_cast<std::size_t>(i)]);
    reduced.Q = std::move(Q2);
    reduced.R = std::move(R2);

    const Eigen::MatrixXd N2 = fundamental_matrix(reduced);
    const Eigen::MatrixXd B2 = absorption_probabilities(N2, reduced.R);

    Eigen::VectorXd w2(S2);
    for (Eigen::Index i = 0; i < S2; ++i) w2(i) = start_weights(keep[i]);
    const double ws = w2.sum();
    if (ws <= 0) fail("cannot_remove_start", "no start mass left after removal");
    w2 /= ws;

    return base - w2.dot(B2.col(outcome));
}

namespace {

int dropoff_fallback_index(const AbsorbingChain& chain, int target) {
    const int drop = chain.absorbing_index(to_string(TerminalOutcome::DroppedOff));
    if (drop >= 0) return drop;
    for (std::size_t i = 0; i < chain.absorbing.size(); ++i)
        if (static_cast<int>(i) != target) return static_cast<int>(i);
    return target;  // single-absorbing chain
}

}  // namespace

double removal_effect(const AbsorbingChain& chain, const std::string& start_state,
                      const std::string& state, const std::string& outcome) {
    const int si = chain.transient_index(start_state);
    const int ri = chain.transient_index(state);
    const int oi = chain.absorbing_index(outcome);
    if (si < 0 || ri < 0) fail("unknown_state", si < 0 ? start_state : state);
    if (oi < 0) fail("unknown_state", outcome);
    if (si == ri) fail("cannot_remove_start", state);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(chain.Q.rows());
    w(si) = 1.0;
    return removal_effect(chain, w, ri, oi, dropoff_fallback_index(chain, oi));
}

std::vector<int> candidate_filter(const std::vector<CandidateState>& states, std::int64_t n,
                                  double tau_candidate) {
    std::vector<int> out;
    for (const auto& s : states) {
        if (s.necessary || s.reach * s.lift * static_cast<double>(n) > tau_candidate)
            out.push_back(s.index);
    }
    return out;
}

ChainMetrics compute_chain_metrics(const GraphSnapshot& snap,
                                   const std::vector<JourneyInstance>& journeys,
                                   const JourneyDefinition& def, TerminalOutcome target,
                                   double tau_candidate) {
    ChainMetrics m;
    m.chain = chain_from_snapshot(snap);
    m.target = target;
    m.N = fundamental_matrix(m.chain);
    m.B = absorption_probabilities(m.N, m.chain.R);
    m.t = expected_steps(m.N);

    const auto S = m.chain.Q.rows();

    // Start distribution: reach-weighted over declared start states (journeys
    // may define several).
    m.start_weights = Eigen::VectorXd::Zero(S);
    double total = 0;
    for (const auto& s : def.start_states) {
        const int i = m.chain.transient_index(s);
        if (i < 0) continue;
        const auto it = snap.reach.find(s);
        const double w = it == snap.reach.end() ? 0.0 : it->second;
        m.start_weights(i) = w;
        total += w;
    }
    if (total > 0) m.start_weights /= total;

    std::vector<CandidateState> cands;
    m.per_state.resize(static_cast<std::size_t>(S));
    for (Eigen::Index i = 0; i < S; ++i) {
        auto& sm = m.per_state[static_cast<std::size_t>(i)];
        sm.state = m.chain.transient[static_cast<std::size_t>(i)];
        sm.conditionals = conversion_conditionals(journeys, sm.state, target);
        CandidateState c;
        c.index = static_cast<int>(i);
        const auto it = snap.reach.find(sm.state);
        c.reach = it == snap.reach.end() ? 0.0 : it->second;
        c.necessary = sm.conditionals.status == ConditionalStatus::NecessaryForConversion;
        c.lift = sm.conditionals.status == ConditionalStatus::Ok ? sm.conditionals.lift : 0.0;
        if (m.start_weights(i) == 0) cands.push_back(c);  // start states are never removed
    }

    const int oi = m.chain.absorbing_index(to_string(target));
    const int fb = dropoff_fallback_index(m.chain, oi);
    for (int idx : candidate_filter(cands, snap.n_journeys, tau_candidate)) {
        m.per_state[static_cast<std::size_t>(idx)].removal =
            removal_effect(m.chain, m.start_weights, idx, oi, fb);
    }
    return m;
}

Json metrics_to_json(const ChainMetrics& m) {
    auto mat = [](const Eigen::MatrixXd& M) {
        std::vector<double> flat(static_cast<std::size_t>(M.size()));
        for (Eigen::Index i = 0; i < M.rows(); ++i)
            for (Eigen::Index j = 0; j < M.cols(); ++j)
                flat[static_cast<std::size_t>(i * M.cols() + j)] = M(i, j);
        return flat;
    };
    Json per_state = Json::array();
    for (const auto& sm : m.per_state) {
        Json js;
        js["state"] = sm.state;
        const auto& c = sm.conditionals;
        switch (c.status) {
            case ConditionalStatus::Ok:
                js["p_reached"] = c.p_reached;
                js["p_not_reached"] = c.p_not_reached;
                js["lift"] = c.lift;
                break;
            case ConditionalStatus::NecessaryForConversion:
                js["p_reached"] = c.p_reached;
                js["p_not_reached"] = 0.0;
                js["necessary_for_conversion"] = true;
                break;
            case ConditionalStatus::AllReached:
                js["p_reached"] = c.p_reached;
                js["p_not_reached"] = "not_applicable";
                break;
            case ConditionalStatus::NoneReached:
                js["p_reached"] = "not_applicable";
                break;
        }
        js["n_reached"] = c.n_reached;
        js["n_not_reached"] = c.n_not_reached;
        if (sm.removal) js["removal_effect"] = *sm.removal;
        per_state.push_back(js);
    }
    return Json{{"transient", m.chain.transient},
                {"absorbing", m.chain.absorbing},
                {"target", to_string(m.target)},
                {"N", mat(m.N)},
                {"B", mat(m.B)},
                {"expected_steps", mat(m.t)},
                {"per_state", per_state}};
}

}  // namespace pathlens
