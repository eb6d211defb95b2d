#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "erreg/schema.hpp"

namespace erreg {

inline constexpr std::string_view kVersion = "0.1.0";

std::uint64_t fnv1a64(std::string_view bytes) noexcept;
// "fnv1a64:<16 hex digits>" over the file contents.
std::string hash_file(const std::filesystem::path& path);
std::string hash_text(std::string_view text);
// ISO 8601, UTC, seconds precision.
std::string utc_timestamp();

struct RunManifest {
    std::vector<std::string> command_line;
    std::map<std::string, std::string> config_hashes;
    std::map<std::string, std::uint64_t> seeds;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::string version{kVersion};
    std::string started_at;
    std::string finished_at;
    Json details = Json::object();
};

Json to_json(const RunManifest& m);

} // namespace erreg
