#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "erreg/error.hpp"
#include "erreg/schema.hpp"

namespace erreg::detail {

// Lookup helpers that turn nlohmann type errors into ParseError with context.
template <typename T>
T required(const Json& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) {
        throw ParseError(where, 0, std::string("missing field '") + key + "'");
    }
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(where, 0, std::string("field '") + key + "': " + e.what());
    }
}

inline Json parse_json_text(const std::string& text, const std::string& source, std::size_t line = 0) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(source, line, e.what());
    }
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path.string(), 0, "cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline Json load_json_file(const std::filesystem::path& path) {
    return parse_json_text(read_file(path), path.string());
}

inline void write_file(const std::filesystem::path& path, const std::string& bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << bytes;
}

} // namespace erreg::detail
