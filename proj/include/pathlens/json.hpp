#pragma once

#include <nlohmann/json.hpp>

namespace pathlens {

// All artifacts use insertion-ordered objects so serialized bytes are a
// deterministic function of content.
using Json = nlohmann::ordered_json;

}  // namespace pathlens
