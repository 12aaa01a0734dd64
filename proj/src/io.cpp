#include "pathlens/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "pathlens/error.hpp"

namespace pathlens {

void atomic_write_file(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.parent_path() / (target.filename().string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail("missing_artifact", "cannot write '" + tmp.string() + "'");
        out << content;
        if (!out) fail("missing_artifact", "short write to '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) fail("missing_artifact", "rename failed for '" + path + "': " + ec.message());
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("missing_artifact", "cannot read '" + path + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool file_exists(const std::string& path) { return std::filesystem::exists(path); }

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("missing_artifact", "cannot read '" + path + "'");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) lines.push_back(line);
    return lines;
}

std::vector<Json> read_jsonl(const std::string& path) {
    std::vector<Json> rows;
    for (const auto& line : read_lines(path)) {
        try {
            rows.push_back(Json::parse(line));
        } catch (const std::exception& e) {
            fail("input_error", "bad JSON line in '" + path + "': " + e.what());
        }
    }
    return rows;
}

void write_jsonl(const std::string& path, const std::vector<Json>& rows) {
    std::string out;
    for (const auto& r : rows) {
        out += r.dump();
        out += '\n';
    }
    atomic_write_file(path, out);
}

}  // namespace pathlens
