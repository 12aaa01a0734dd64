#pragma once

#include <cstdint>
#include <string>

#include "pathlens/findings.hpp"

namespace pathlens {

// Shared display contract: probabilities and lifts shown to 2 decimals,
// integers with thousands separators. The faithfulness checker verifies
// narrative numbers against exactly these renderings.
std::string format_probability(double v);
std::string format_lift(double v);
std::string format_integer(std::int64_t v);
// Generic number: integers render via format_integer, fractions via two
// decimals.
std::string format_evidence_value(const EvidenceValue& v);

}  // namespace pathlens
