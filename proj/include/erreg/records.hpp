#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "erreg/strategy.hpp"

namespace erreg {

// One instruction-tuning unit. label is withheld in inference exports.
struct PromptRecord {
    std::string record_id;
    std::string context;
    std::string prompt;
    std::optional<StrategyLabel> label;
    // In-memory only: introspection was requested but the frame carries none.
    bool introspection_unavailable = false;

    bool operator==(const PromptRecord&) const = default;
};

// One line of a predictions file. Either predicted_label is set, or error
// describes why no single label could be extracted.
struct Prediction {
    std::string record_id;
    std::optional<StrategyLabel> predicted_label;
    std::string error;
    std::string raw_generation;

    bool operator==(const Prediction&) const = default;
};

void write_dataset(const std::vector<PromptRecord>& records, std::ostream& out);
std::vector<PromptRecord> read_dataset(std::istream& in, const std::string& source = "<dataset>");
void save_dataset(const std::vector<PromptRecord>& records, const std::filesystem::path& path);
std::vector<PromptRecord> load_dataset(const std::filesystem::path& path);

void write_predictions(const std::vector<Prediction>& preds, std::ostream& out);
std::vector<Prediction> read_predictions(std::istream& in, const std::string& source = "<predictions>");
void save_predictions(const std::vector<Prediction>& preds, const std::filesystem::path& path);
std::vector<Prediction> load_predictions(const std::filesystem::path& path);

// Truth files may be either datasets with "label" or predictions files.
std::vector<Prediction> load_labels(const std::filesystem::path& path);

} // namespace erreg
