#include "pathlens/query.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "pathlens/error.hpp"

namespace pathlens {

namespace {

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : text) {
        if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_') {
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
        } else if (!cur.empty()) {
            out.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

std::set<std::string> token_set(const std::string& text) {
    const auto toks = tokenize(text);
    return {toks.begin(), toks.end()};
}

}  // namespace

std::map<std::string, double> summary_idf(const FactStore& store) {
    std::map<std::string, std::int64_t> df;
    for (const auto& f : store.facts())
        for (const auto& t : token_set(f.summary)) ++df[t];
    const double n = static_cast<double>(store.facts().size());
    std::map<std::string, double> idf;
    for (const auto& [t, d] : df)
        idf[t] = std::log((1.0 + n) / (1.0 + static_cast<double>(d))) + 1.0;
    return idf;
}

double retrieval_score(const std::string& question, const std::string& summary,
                       const std::map<std::string, double>& idf) {
    const auto q = token_set(question);
    const auto s = token_set(summary);
    double score = 0;
    for (const auto& t : q) {
        if (!s.count(t)) continue;
        const auto it = idf.find(t);
        score += it == idf.end() ? 1.0 : it->second;
    }
    return score;
}

QueryAnswer answer_query(const std::string& question, const FactStore& store,
                         const std::vector<SnapshotMeta>& journey_index,
                         const PlatformConfig& cfg, const QueryLimits& limits) {
    if (store.facts().empty()) fail("no_relevant_facts", "fact store is empty");

    // Step 1: resolve journey and window. Journey ids are matched as tokens;
    // an RFC3339 date in the question selects the window containing it;
    // otherwise the most recent snapshot wins.
    const auto qtokens = token_set(question);
    std::string journey_id;
    for (const auto& meta : journey_index) {
        bool all = true;
        for (const auto& t : tokenize(meta.journey_id))
            if (!qtokens.count(t)) {
                all = false;
                break;
            }
        if (all && !meta.journey_id.empty()) {
            journey_id = meta.journey_id;
            break;
        }
    }

    std::optional<Instant> asked_instant;
    for (std::size_t i = 0; i + 10 <= question.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(question[i]))) continue;
        // YYYY-MM-DD
        if (i + 10 <= question.size() && question[i + 4] == '-' && question[i + 7] == '-') {
            try {
                asked_instant = parse_rfc3339(question.substr(i, 10) + "T00:00:00Z");
                break;
            } catch (const Error&) {
            }
        }
    }

    std::optional<TimeWindow> window;
    Instant best_end{std::numeric_limits<std::int64_t>::min()};
    for (const auto& meta : journey_index) {
        if (!journey_id.empty() && meta.journey_id != journey_id) continue;
        if (asked_instant && !meta.window.contains(*asked_instant)) continue;
        if (meta.window.end > best_end) {
            best_end = meta.window.end;
            window = meta.window;
            if (journey_id.empty()) journey_id = meta.journey_id;
        }
    }

    // Step 2: rank fact summaries. Ties keep assertion order: the log is
    // appended in detector-ranked order, so the platform's own ranking
    // resolves equally-matching summaries.
    const auto idf = summary_idf(store);
    struct Hit {
        const BehavioralFact* fact;
        double score;
    };
    std::vector<Hit> hits;
    for (const auto& f : store.facts()) {
        if (window && !f.validity_window.intersects(*window)) continue;
        if (f.confidence.score < limits.min_confidence) continue;
        const double s = retrieval_score(question, f.summary, idf);
        if (s > limits.min_score) hits.push_back({&f, s});
    }
    if (hits.empty()) fail("no_relevant_facts", "no fact summary matches the question");
    std::stable_sort(hits.begin(), hits.end(),
                     [](const Hit& a, const Hit& b) { return a.score > b.score; });
    if (static_cast<int>(hits.size()) > limits.top_k_facts)
        hits.resize(static_cast<std::size_t>(limits.top_k_facts));

    // Steps 3-4: one-hop bundle from the top hit, constrained generation.
    BundleLimits bl;
    bl.max_facts = limits.max_facts;
    bl.min_confidence = limits.min_confidence;
    auto bundle = build_fact_bundle_from_fact(*hits.front().fact, store, bl);
    const auto grounding = validate_grounding(bundle, cfg);
    if (!grounding.overall)
        fail("no_relevant_facts", "the best-matching bundle failed grounding validation");
    const auto narrative = render_narrative(bundle, grounding);

    QueryAnswer answer;
    answer.text = narrative.text;
    answer.bundle = std::move(bundle);
    for (const auto& h : hits) answer.fact_ids.push_back(h.fact->fact_id);
    answer.journey_id = journey_id;
    if (window) answer.window = *window;
    return answer;
}

}  // namespace pathlens
