#include "erreg/manifest.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>

#include "json_util.hpp"

namespace erreg {

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hash_text(std::string_view text) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(text)));
    return std::string("fnv1a64:") + buf;
}

std::string hash_file(const std::filesystem::path& path) { return hash_text(detail::read_file(path)); }

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

Json to_json(const RunManifest& m) {
    Json j;
    j["tool"] = "erreg";
    j["version"] = m.version;
    j["command_line"] = m.command_line;
    j["config_hashes"] = m.config_hashes;
    j["seeds"] = m.seeds;
    j["inputs"] = m.inputs;
    j["outputs"] = m.outputs;
    j["started_at"] = m.started_at;
    j["finished_at"] = m.finished_at;
    j["details"] = m.details;
    return j;
}

} // namespace erreg
