#include "erreg/records.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "erreg/error.hpp"
#include "json_util.hpp"

namespace erreg {

namespace {

template <typename Fn>
void for_each_line(std::istream& in, const std::string& source, Fn&& fn) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const Json j = detail::parse_json_text(line, source, lineno);
        try {
            fn(j);
        } catch (const ParseError& e) {
            throw ParseError(source, lineno, e.what());
        }
    }
}

StrategyLabel label_from(const std::string& text, const char* field) {
    auto label = parse_strategy(text);
    if (!label) throw ParseError(field, 0, "unknown strategy label '" + text + "'");
    return *label;
}

std::ifstream open(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path.string(), 0, "cannot open file");
    return in;
}

} // namespace

void write_dataset(const std::vector<PromptRecord>& records, std::ostream& out) {
    for (const auto& r : records) {
        Json j;
        j["record_id"] = r.record_id;
        j["context"] = r.context;
        j["prompt"] = r.prompt;
        if (r.label) j["label"] = display_name(*r.label);
        out << j.dump() << '\n';
    }
}

std::vector<PromptRecord> read_dataset(std::istream& in, const std::string& source) {
    std::vector<PromptRecord> out;
    for_each_line(in, source, [&](const Json& j) {
        PromptRecord r;
        r.record_id = detail::required<std::string>(j, "record_id", "record");
        r.context = detail::required<std::string>(j, "context", r.record_id);
        r.prompt = detail::required<std::string>(j, "prompt", r.record_id);
        if (j.contains("label")) r.label = label_from(detail::required<std::string>(j, "label", r.record_id), "label");
        out.push_back(std::move(r));
    });
    return out;
}

void save_dataset(const std::vector<PromptRecord>& records, const std::filesystem::path& path) {
    std::ostringstream os;
    write_dataset(records, os);
    detail::write_file(path, os.str());
}

std::vector<PromptRecord> load_dataset(const std::filesystem::path& path) {
    auto in = open(path);
    return read_dataset(in, path.string());
}

void write_predictions(const std::vector<Prediction>& preds, std::ostream& out) {
    for (const auto& p : preds) {
        Json j;
        j["record_id"] = p.record_id;
        if (p.predicted_label) {
            j["predicted_label"] = display_name(*p.predicted_label);
        } else {
            j["error"] = p.error;
            j["raw_generation"] = p.raw_generation;
        }
        out << j.dump() << '\n';
    }
}

std::vector<Prediction> read_predictions(std::istream& in, const std::string& source) {
    std::vector<Prediction> out;
    for_each_line(in, source, [&](const Json& j) {
        Prediction p;
        p.record_id = detail::required<std::string>(j, "record_id", "prediction");
        if (j.contains("predicted_label")) {
            p.predicted_label =
                label_from(detail::required<std::string>(j, "predicted_label", p.record_id), "predicted_label");
        } else if (j.contains("error")) {
            p.error = detail::required<std::string>(j, "error", p.record_id);
            if (j.contains("raw_generation")) {
                p.raw_generation = detail::required<std::string>(j, "raw_generation", p.record_id);
            }
        } else {
            throw ParseError(p.record_id, 0, "prediction has neither 'predicted_label' nor 'error'");
        }
        out.push_back(std::move(p));
    });
    return out;
}

void save_predictions(const std::vector<Prediction>& preds, const std::filesystem::path& path) {
    std::ostringstream os;
    write_predictions(preds, os);
    detail::write_file(path, os.str());
}

std::vector<Prediction> load_predictions(const std::filesystem::path& path) {
    auto in = open(path);
    return read_predictions(in, path.string());
}

std::vector<Prediction> load_labels(const std::filesystem::path& path) {
    auto in = open(path);
    std::vector<Prediction> out;
    for_each_line(in, path.string(), [&](const Json& j) {
        Prediction p;
        p.record_id = detail::required<std::string>(j, "record_id", "record");
        const char* key = j.contains("label") ? "label" : "predicted_label";
        p.predicted_label = label_from(detail::required<std::string>(j, key, p.record_id), key);
        out.push_back(std::move(p));
    });
    return out;
}

} // namespace erreg
