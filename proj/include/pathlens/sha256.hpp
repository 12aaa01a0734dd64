#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace pathlens {

// FIPS 180-4 SHA-256, lowercase hex digest. Used for content-addressed
// artifact ids (snapshots, findings, facts).
std::string sha256_hex(std::string_view data);

}  // namespace pathlens
