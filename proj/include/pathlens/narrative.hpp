#pragma once

#include <functional>
#include <memory>

#include "pathlens/bundle.hpp"

namespace pathlens {

// Narrow request/response boundary to an external text generator. The model
// receives the rendered bundle plus the fixed constraint prompt and returns
// prose; it never computes numbers or calls tools.
class TextGenerationClient {
public:
    virtual ~TextGenerationClient() = default;
    virtual std::string generate(const std::string& prompt) = 0;  // throws on failure
    virtual std::string client_id() const = 0;
};

// POSTs the prompt to $PATHLENS_GENERATOR_URL with optional bearer token
// $PATHLENS_GENERATOR_TOKEN and timeout $PATHLENS_GENERATOR_TIMEOUT_MS.
std::unique_ptr<TextGenerationClient> make_http_client_from_env();

// The versioned constraint prompt shipped with the repo (assets/).
std::string constraint_prompt();

struct Narrative {
    std::string finding_id;
    std::string text;
    std::string generator;  // "template" or "external:<client_id>"
    std::string bundle_id;
    Instant created_at;
};

// Deterministic per-predicate templates. Numbers are embedded verbatim under
// the display rules, language stays associative, confidence label and sample
// size are stated, and a recommendation line from the per-predicate table
// closes the text. Throws unvalidated_bundle when the grounding report did
// not pass.
Narrative render_narrative(const FactBundle& bundle, const GroundingReport& grounding);

// External generation with faithfulness gating: up to two retries, then
// fall back to the template. Throws unvalidated_bundle; never returns an
// unfaithful narrative.
Narrative render_narrative_external(const FactBundle& bundle, const GroundingReport& grounding,
                                    TextGenerationClient& client);

struct ClaimCheck {
    std::string claim;
    bool verified = false;
    std::string detail;
};

struct FaithfulnessReport {
    std::vector<ClaimCheck> claims;
    bool faithful = false;
};

// Every numeric token in the narrative (integers with separators, decimals,
// percentages, trailing x multipliers) must match a bundle value under the
// display formatting rules; the causal lexicon is forbidden outright.
FaithfulnessReport check_faithfulness(const std::string& narrative_text, const FactBundle& bundle);

const std::vector<std::string>& forbidden_causal_lexicon();

Json narrative_to_json(const Narrative& n);

}  // namespace pathlens
