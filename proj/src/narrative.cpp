#include "pathlens/narrative.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#define CPPHTTPLIB_NO_EXCEPTIONS 0
#include <httplib.h>

#include "pathlens/display.hpp"
#include "pathlens/error.hpp"

namespace pathlens {

namespace {

constexpr char kConstraintPromptV1[] =
    "You write one short product-analytics insight from the fact bundle below.\n"
    "Rules:\n"
    "1. Report every numerical value exactly as it appears in the bundle. Never invent,\n"
    "   recompute, or round numbers differently.\n"
    "2. Use associative language only (\"associated with\", \"more likely to\", \"suggests\").\n"
    "   Never use causal language (\"causes\", \"caused\", \"drives\", \"leads to\",\n"
    "   \"because of\").\n"
    "3. State the confidence label and the sample size.\n"
    "4. End with one concrete, actionable recommendation.\n"
    "Respond with the insight text only.\n";

std::string unquote_entity(const EntityRef& e) {
    if (e.kind == EntityKind::Outcome && e.id.rfind("outcome:", 0) == 0) return e.id.substr(8);
    if (e.kind == EntityKind::Segment && e.id.rfind("segment:", 0) == 0) return e.id.substr(8);
    if (e.kind == EntityKind::Path && e.id.rfind("path:", 0) == 0) {
        std::string seq = e.id.substr(5);
        for (auto& c : seq)
            if (c == '>') c = ' ';
        return seq;
    }
    if (e.kind == EntityKind::Edge && e.id.rfind("edge:", 0) == 0) return e.id.substr(5);
    return e.id;
}

std::string recommendation_for(const std::string& predicate) {
    if (predicate == "is_activation_driver_for")
        return "Recommended action: make this step easier to discover earlier in the journey.";
    if (predicate == "necessary_for_conversion")
        return "Recommended action: protect this step from regressions and monitor it closely.";
    if (predicate == "is_dropoff_point_for")
        return "Recommended action: review this step for friction and clarify the next action.";
    if (predicate == "regressed_after")
        return "Recommended action: review the release change list for this transition and "
               "consider a rollback or a fix.";
    if (predicate == "changed_after")
        return "Recommended action: investigate what changed around this transition during the "
               "window.";
    if (predicate == "diverges_from")
        return "Recommended action: compare the experience between the two segments to locate "
               "the divergence.";
    if (predicate == "more_common_in")
        return "Recommended action: examine why this behavior concentrates in one segment.";
    if (predicate == "less_common_in")
        return "Recommended action: examine what suppresses this behavior in the named segment.";
    if (predicate == "exhibits_loop")
        return "Recommended action: check this step for unclear feedback that may push users to "
               "repeat it.";
    if (predicate == "is_fast_path_to")
        return "Recommended action: guide more users onto this path.";
    if (predicate == "associated_with")
        return "Recommended action: consider redesigning or shortening this path.";
    return "Recommended action: review the underlying journey data for this finding.";
}

std::string template_text(const FactBundle& bundle) {
    const auto& fact = bundle.primary;
    const auto& ev = fact.evidence_payload;
    const std::string subject = unquote_entity(fact.subject);
    const std::string object = unquote_entity(fact.object);
    const std::string& pred = fact.predicate;

    auto has = [&](const std::string& key) { return evidence_find(ev, key) != nullptr; };
    auto val = [&](const std::string& key) -> std::string {
        const auto* v = evidence_find(ev, key);
        return v ? evidence_display(key, *v) : "n/a";
    };
    const std::string tail = " Confidence: " + fact.confidence.label + " (sample size " +
                             val("sample_size") + "). " + recommendation_for(pred);

    if (pred == "is_activation_driver_for") {
        return "Journeys that reach '" + subject + "' convert to '" + object + "' at " +
               val("p_reached") + ", compared with " + val("p_not_reached") +
               " among journeys that bypass it (lift " + val("lift") +
               "x). Reaching this state is associated with higher conversion: removing it from "
               "the journey graph lowers the modeled conversion rate by " +
               val("removal_effect") + ". It appears in " + val("reach_rate") + " of journeys." +
               tail;
    }
    if (pred == "necessary_for_conversion") {
        return "No observed journey converted to '" + object + "' without reaching '" + subject +
               "'. Journeys that reach it convert at " + val("p_reached") + ", and it appears in " +
               val("reach_rate") +
               " of journeys, so this state is associated with conversion as a required step." +
               tail;
    }
    if (pred == "is_dropoff_point_for") {
        if (has("n_states")) {
            return "A group of " + val("n_states") +
                   " connected states is associated with journey loss: their mean exit "
                   "probability into '" +
                   object + "' is " + val("mean_exit_probability") + "." + tail;
        }
        return "Journeys at '" + subject + "' end in '" + object + "' with probability " +
               val("exit_probability") + ". The state appears in " + val("reach_rate") +
               " of journeys, so this exit is associated with a large share of losses." + tail;
    }
    if (pred == "regressed_after" || pred == "changed_after") {
        std::string text = "The transition " + subject + " moved from " + val("p_prev") + " to " +
                           val("p_curr") + " between consecutive windows.";
        if (pred == "regressed_after")
            text += " The change window is anchored to release " + val("release_id") +
                    ", so the drop is associated with that release.";
        else if (has("ambiguous_release"))
            text += " More than one release fell inside the change window, so release "
                    "attribution is ambiguous; the drop is associated with this period.";
        else
            text += " No release marker falls inside the change window; the drop is associated "
                    "with this period.";
        return text + tail;
    }
    if (pred == "diverges_from") {
        return "Journey behavior in segment '" + val("segment_a") +
               "' diverges from segment '" + val("segment_b") + "' (divergence " +
               val("divergence") + "). Conversion is " + val("conversion_a") + " in segment '" +
               val("segment_a") + "' versus " + val("conversion_b") + " in segment '" +
               val("segment_b") + "', so outcomes are associated with segment membership." + tail;
    }
    if (pred == "more_common_in" || pred == "less_common_in") {
        const std::string direction = pred == "more_common_in" ? "more" : "less";
        return "Reaching '" + subject + "' is " + direction + " common in segment '" +
               val("segment_b") + "' (" + val("reach_b") + ") than in segment '" +
               val("segment_a") + "' (" + val("reach_a") +
               "), so this behavior is associated with segment membership." + tail;
    }
    if (pred == "exhibits_loop") {
        std::string text = "Users repeat '" + subject +
                           "' within single journeys: the mean visit count among journeys "
                           "containing it is " +
                           val("mean_visits") + ", and " + val("affected_fraction") +
                           " of journeys loop through it.";
        if (has("back_edge"))
            text += " The most common step immediately after a repeated visit is '" +
                    val("back_edge") + "'.";
        text += " This pattern is associated with friction or unclear feedback.";
        return text + tail;
    }
    if (pred == "is_fast_path_to") {
        return "The path [" + subject + "] reaches '" + object + "' with conversion " +
               val("conversion_rate") + " over " + val("path_length") +
               " steps (occurrence " + val("occurrence") +
               "). This route is associated with efficient journeys." + tail;
    }
    if (pred == "associated_with") {
        return "The path [" + subject + "] occurs " + val("occurrence") +
               " times and is associated with '" + object + "'; its normalized quality score is " +
               val("quality_normalized") + ", low relative to the best path." + tail;
    }
    return "Finding: '" + subject + "' " + pred + " '" + object +
           "'. The relationship is associative, not causal." + tail;
}

}  // namespace

std::string constraint_prompt() {
    if (const char* path = std::getenv("PATHLENS_CONSTRAINT_PROMPT_FILE")) {
        std::ifstream in(path);
        if (in) {
            std::string text((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
            if (!text.empty()) return text;
        }
    }
    return kConstraintPromptV1;
}

Narrative render_narrative(const FactBundle& bundle, const GroundingReport& grounding) {
    if (!grounding.overall || grounding.bundle_id != bundle.bundle_id)
        fail("unvalidated_bundle", "bundle " + bundle.bundle_id + " did not pass grounding");
    Narrative n;
    n.finding_id = bundle.finding_id;
    n.text = template_text(bundle);
    n.generator = "template";
    n.bundle_id = bundle.bundle_id;
    n.created_at = bundle.primary.validity_window.end;
    return n;
}

Narrative render_narrative_external(const FactBundle& bundle, const GroundingReport& grounding,
                                    TextGenerationClient& client) {
    if (!grounding.overall || grounding.bundle_id != bundle.bundle_id)
        fail("unvalidated_bundle", "bundle " + bundle.bundle_id + " did not pass grounding");

    const std::string prompt = constraint_prompt() + "\n" + bundle.rendered_context;
    for (int attempt = 0; attempt < 3; ++attempt) {
        std::string text;
        try {
            text = client.generate(prompt);
        } catch (const Error&) {
            continue;  // transport failure: retry, then fall back
        }
        const auto report = check_faithfulness(text, bundle);
        if (report.faithful) {
            Narrative n;
            n.finding_id = bundle.finding_id;
            n.text = text;
            n.generator = "external:" + client.client_id();
            n.bundle_id = bundle.bundle_id;
            n.created_at = bundle.primary.validity_window.end;
            return n;
        }
    }
    return render_narrative(bundle, grounding);  // fallback after retries
}

const std::vector<std::string>& forbidden_causal_lexicon() {
    static const std::vector<std::string> lexicon = {"causes", "caused", "drives", "leads to",
                                                     "because of"};
    return lexicon;
}

namespace {

struct NumericToken {
    std::string text;     // as written
    double value = 0;     // sign applied; percent NOT divided
    int decimals = 0;
    bool percent = false;
    bool is_integer = false;
};

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

std::vector<NumericToken> extract_numbers(const std::string& text) {
    std::vector<NumericToken> out;
    const std::size_t n = text.size();
    std::size_t i = 0;
    while (i < n) {
        if (!std::isdigit(static_cast<unsigned char>(text[i]))) {
            ++i;
            continue;
        }
        // Identifier-embedded digits (v2.3, step1) are not claims.
        const bool letter_prefixed = i > 0 && (std::isalpha(static_cast<unsigned char>(text[i - 1])) ||
                                               text[i - 1] == '_');
        const bool negative = !letter_prefixed && i > 0 && text[i - 1] == '-' &&
                              (i < 2 || !is_word_char(text[i - 2]));

        std::size_t j = i;
        std::string digits;
        bool valid_commas = true;
        while (j < n && (std::isdigit(static_cast<unsigned char>(text[j])) || text[j] == ',')) {
            if (text[j] == ',') {
                // Thousands separator only when exactly three digits follow.
                if (j + 3 < n && std::isdigit(static_cast<unsigned char>(text[j + 1])) &&
                    std::isdigit(static_cast<unsigned char>(text[j + 2])) &&
                    std::isdigit(static_cast<unsigned char>(text[j + 3])) &&
                    (j + 4 >= n || !std::isdigit(static_cast<unsigned char>(text[j + 4])))) {
                    ++j;
                    continue;
                }
                break;
            }
            digits += text[j];
            ++j;
        }
        (void)valid_commas;

        int decimals = 0;
        std::string frac;
        if (j < n && text[j] == '.' && j + 1 < n &&
            std::isdigit(static_cast<unsigned char>(text[j + 1]))) {
            ++j;
            while (j < n && std::isdigit(static_cast<unsigned char>(text[j]))) {
                frac += text[j];
                ++j;
            }
            decimals = static_cast<int>(frac.size());
        }

        bool percent = false;
        if (j < n && text[j] == '%') {
            percent = true;
            ++j;
        } else if (j < n && (text[j] == 'x' || text[j] == 'X') &&
                   (j + 1 >= n || !is_word_char(text[j + 1]))) {
            ++j;  // lift multiplier suffix
        }

        const bool letter_suffixed = j < n && is_word_char(text[j]);
        if (!letter_prefixed && !letter_suffixed) {
            NumericToken t;
            t.text = text.substr(i - (negative ? 1 : 0), j - i + (negative ? 1 : 0));
            t.value = std::stod(digits + (frac.empty() ? "" : "." + frac));
            if (negative) t.value = -t.value;
            t.decimals = decimals;
            t.percent = percent;
            t.is_integer = decimals == 0;
            out.push_back(std::move(t));
        } else if (letter_suffixed) {
            while (j < n && is_word_char(text[j])) ++j;  // consume the identifier tail
        }
        i = j;
    }
    return out;
}

std::string render_decimals(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

bool token_matches(const NumericToken& t, const std::vector<double>& values) {
    for (double v : values) {
        if (t.percent) {
            if (render_decimals(v * 100.0, t.decimals) == render_decimals(t.value, t.decimals))
                return true;
            continue;
        }
        if (t.is_integer) {
            if (std::abs(v - t.value) < 1e-9) return true;
            if (render_decimals(v, 0) == render_decimals(t.value, 0)) return true;
            continue;
        }
        if (render_decimals(v, t.decimals) == render_decimals(t.value, t.decimals)) return true;
    }
    return false;
}

}  // namespace

FaithfulnessReport check_faithfulness(const std::string& narrative_text,
                                      const FactBundle& bundle) {
    FaithfulnessReport report;

    std::vector<double> values;
    auto collect = [&](const BehavioralFact& f) {
        for (const auto& [k, v] : f.evidence_payload) {
            (void)k;
            if (const auto* d = std::get_if<double>(&v)) values.push_back(*d);
            if (const auto* i = std::get_if<std::int64_t>(&v))
                values.push_back(static_cast<double>(*i));
        }
    };
    collect(bundle.primary);
    for (const auto& f : bundle.supporting) collect(f);

    for (const auto& token : extract_numbers(narrative_text)) {
        ClaimCheck c;
        c.claim = "number " + token.text;
        c.verified = token_matches(token, values);
        if (!c.verified) c.detail = "no bundle value renders as '" + token.text + "'";
        report.claims.push_back(std::move(c));
    }

    // Causal-lexicon scan: lowercase, whitespace-normalized, word boundaries.
    std::string lowered;
    lowered.reserve(narrative_text.size());
    for (char ch : narrative_text) {
        if (std::isspace(static_cast<unsigned char>(ch))) {
            if (!lowered.empty() && lowered.back() != ' ') lowered.push_back(' ');
        } else {
            lowered.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
        }
    }
    for (const auto& phrase : forbidden_causal_lexicon()) {
        std::size_t pos = 0;
        bool hit = false;
        while ((pos = lowered.find(phrase, pos)) != std::string::npos) {
            const bool left_ok = pos == 0 || !is_word_char(lowered[pos - 1]);
            const std::size_t end = pos + phrase.size();
            const bool right_ok = end >= lowered.size() || !is_word_char(lowered[end]);
            if (left_ok && right_ok) {
                hit = true;
                break;
            }
            ++pos;
        }
        ClaimCheck c;
        c.claim = "lexicon \"" + phrase + "\"";
        c.verified = !hit;
        if (hit) c.detail = "forbidden causal phrase present";
        report.claims.push_back(std::move(c));
    }

    report.faithful = std::all_of(report.claims.begin(), report.claims.end(),
                                  [](const ClaimCheck& c) { return c.verified; });
    return report;
}

namespace {

class HttpTextClient : public TextGenerationClient {
public:
    HttpTextClient(std::string url, std::string token, int timeout_ms)
        : url_(std::move(url)), token_(std::move(token)), timeout_ms_(timeout_ms) {}

    std::string generate(const std::string& prompt) override {
        // Split scheme://host[:port]/path
        const auto scheme_end = url_.find("://");
        if (scheme_end == std::string::npos)
            fail("generation_failed", "bad generator URL '" + url_ + "'");
        const auto path_start = url_.find('/', scheme_end + 3);
        const std::string base = path_start == std::string::npos ? url_ : url_.substr(0, path_start);
        const std::string path = path_start == std::string::npos ? "/" : url_.substr(path_start);

        httplib::Client cli(base);
        cli.set_connection_timeout(0, timeout_ms_ * 1000);
        cli.set_read_timeout(timeout_ms_ / 1000, (timeout_ms_ % 1000) * 1000);
        httplib::Headers headers;
        if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);

        const Json body{{"prompt", prompt}};
        auto res = cli.Post(path, headers, body.dump(), "application/json");
        if (!res || res->status != 200)
            fail("generation_failed",
                 "generator returned " + (res ? std::to_string(res->status) : "no response"));
        // Accept either a raw-text body or {"text": "..."}.
        try {
            const auto j = Json::parse(res->body);
            if (j.is_object() && j.contains("text")) return j.at("text").get<std::string>();
        } catch (...) {
        }
        return res->body;
    }

    std::string client_id() const override { return url_; }

private:
    std::string url_;
    std::string token_;
    int timeout_ms_;
};

}  // namespace

std::unique_ptr<TextGenerationClient> make_http_client_from_env() {
    const char* url = std::getenv("PATHLENS_GENERATOR_URL");
    if (!url || !*url) fail("generation_failed", "PATHLENS_GENERATOR_URL is not set");
    const char* token = std::getenv("PATHLENS_GENERATOR_TOKEN");
    const char* timeout = std::getenv("PATHLENS_GENERATOR_TIMEOUT_MS");
    const int timeout_ms = timeout ? std::atoi(timeout) : 10000;
    return std::make_unique<HttpTextClient>(url, token ? token : "", timeout_ms);
}

Json narrative_to_json(const Narrative& n) {
    return Json{{"finding_id", n.finding_id},
                {"text", n.text},
                {"generator", n.generator},
                {"bundle_id", n.bundle_id},
                {"created_at", format_rfc3339(n.created_at)}};
}

}  // namespace pathlens
