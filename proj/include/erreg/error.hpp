#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace erreg {

// Base for every error raised by the library. The CLI maps the subclass to an
// exit code (usage: 1, data/validation: 2, backend: 3).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input text (JSON/JSONL). line is 1-based; 0 when not line-oriented.
class ParseError : public Error {
public:
    ParseError(std::string source, std::size_t line, const std::string& what)
        : Error(source + (line ? ":" + std::to_string(line) : std::string{}) + ": " + what),
          source_(std::move(source)), line_(line) {}

    const std::string& source() const noexcept { return source_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string source_;
    std::size_t line_;
};

// A categorical value that is not part of the declared domain of a feature.
class SchemaViolation : public Error {
public:
    SchemaViolation(std::string feature, std::string value, std::string record_id)
        : Error("schema violation in " + record_id + ": feature '" + feature +
                "' has no value '" + value + "'"),
          feature_(std::move(feature)), value_(std::move(value)), record_id_(std::move(record_id)) {}

    const std::string& feature() const noexcept { return feature_; }
    const std::string& value() const noexcept { return value_; }
    const std::string& record_id() const noexcept { return record_id_; }

private:
    std::string feature_;
    std::string value_;
    std::string record_id_;
};

// Structural invariant broken (duplicate sessions, overlapping utterances, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

// Template set inconsistent with the schema or with itself.
class TemplateError : public Error {
public:
    using Error::Error;
};

// Network structure or parameter problems.
class NetworkError : public Error {
public:
    using Error::Error;
};

// Evidence has probability zero under the network.
class ImpossibleEvidence : public Error {
public:
    using Error::Error;
};

class BackendError : public Error {
public:
    using Error::Error;
};

class UsageError : public Error {
public:
    using Error::Error;
};

} // namespace erreg
