#pragma once

#include <string>
#include <vector>

#include "pathlens/json.hpp"

namespace pathlens {

// Write-temp-then-rename; partial artifacts are never visible.
void atomic_write_file(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);  // throws missing_artifact
bool file_exists(const std::string& path);

// One JSON value per line; blank lines skipped. Throws missing_artifact on
// open failure and input_error on parse failure (jsonl readers that must
// quarantine instead use read_lines).
std::vector<Json> read_jsonl(const std::string& path);
std::vector<std::string> read_lines(const std::string& path);

void write_jsonl(const std::string& path, const std::vector<Json>& rows);

}  // namespace pathlens
