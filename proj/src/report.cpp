#include <charconv>
#include <cstdio>

#include "erreg/eval.hpp"

namespace erreg {

namespace {

constexpr const char* kNotApplicable = "---";

std::string fixed2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string shortest(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

std::string md_row(const std::vector<std::string>& cells) {
    std::string out = "|";
    for (const auto& c : cells) out += " " + c + " |";
    return out + "\n";
}

std::string md_rule(std::size_t n) {
    std::string out = "|";
    for (std::size_t i = 0; i < n; ++i) out += "---|";
    return out + "\n";
}

std::string yes_no(bool b) { return b ? "yes" : "no"; }

void metric_pair(std::vector<std::string>& row, const CellResult* c, double acc, double f1) {
    if (!c || c->status == CellStatus::NotApplicable) {
        row.insert(row.end(), {kNotApplicable, kNotApplicable});
    } else if (c->status == CellStatus::Failed) {
        row.insert(row.end(), {"failed", "failed"});
    } else {
        row.push_back(fixed2(acc));
        row.push_back(fixed2(f1));
    }
}

std::string markdown(const EvalReport& r) {
    std::string out = "## Per-class results\n\n";
    std::vector<std::string> header{"Model", "Introspection"};
    for (auto s : kAllStrategies) {
        header.push_back(std::string(display_name(s)) + " ACC");
        header.push_back(std::string(display_name(s)) + " F1");
    }
    header.insert(header.end(), {"Overall ACC", "Overall F1"});
    out += md_row(header) + md_rule(header.size());
    for (const auto& b : r.backends) {
        for (bool intro : {true, false}) {
            const auto* c = r.find(b, mask_for(MaskRow::All, intro));
            if (!c) continue;
            std::vector<std::string> row{b, yes_no(intro)};
            for (std::size_t k = 0; k < kNumStrategies; ++k) {
                metric_pair(row, c, c->pooled ? c->pooled->per_class[k].accuracy : 0.0,
                            c->pooled ? c->pooled->per_class[k].f1 : 0.0);
            }
            metric_pair(row, c, c->pooled ? c->pooled->accuracy : 0.0, c->pooled ? c->pooled->weighted_f1 : 0.0);
            out += md_row(row);
        }
    }

    out += "\n## Modality ablations\n\n";
    header = {"Modalities", "Introspection"};
    for (const auto& b : r.backends) {
        header.push_back(b + " ACC");
        header.push_back(b + " F1");
    }
    out += md_row(header) + md_rule(header.size());
    for (const auto& m : r.masks) {
        std::vector<std::string> row{m.row_name(), yes_no(m.include_introspection)};
        for (const auto& b : r.backends) {
            const auto* c = r.find(b, m);
            metric_pair(row, c, c && c->pooled ? c->pooled->accuracy : 0.0, c && c->pooled ? c->pooled->weighted_f1 : 0.0);
        }
        out += md_row(row);
    }
    return out;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string csv(const EvalReport& r) {
    std::vector<std::string> header{"backend", "row", "mask", "introspection", "status", "n", "accuracy", "weighted_f1",
                                    "fold_mean_accuracy", "fold_mean_weighted_f1"};
    for (auto s : kAllStrategies) {
        header.push_back(std::string(identifier(s)) + "_accuracy");
        header.push_back(std::string(identifier(s)) + "_f1");
    }
    auto line = [](const std::vector<std::string>& fields) {
        std::string out;
        for (std::size_t i = 0; i < fields.size(); ++i) out += (i ? "," : "") + csv_field(fields[i]);
        return out + "\n";
    };
    std::string out = line(header);
    for (const auto& c : r.cells) {
        std::vector<std::string> row{c.backend, c.mask.row_name(), c.mask.key(), yes_no(c.mask.include_introspection),
                                     std::string(cell_status_name(c.status))};
        const std::size_t n_metrics = header.size() - row.size();
        if (c.pooled && c.fold_mean) {
            row.push_back(std::to_string(c.pooled->n));
            row.push_back(shortest(c.pooled->accuracy));
            row.push_back(shortest(c.pooled->weighted_f1));
            row.push_back(shortest(c.fold_mean->accuracy));
            row.push_back(shortest(c.fold_mean->weighted_f1));
            for (const auto& pc : c.pooled->per_class) {
                row.push_back(shortest(pc.accuracy));
                row.push_back(shortest(pc.f1));
            }
        } else {
            const std::string fill = c.status == CellStatus::NotApplicable ? kNotApplicable : "";
            row.insert(row.end(), n_metrics, fill);
        }
        out += line(row);
    }
    return out;
}

} // namespace

std::optional<ReportFormat> parse_report_format(std::string_view text) noexcept {
    if (text == "markdown" || text == "md") return ReportFormat::Markdown;
    if (text == "csv") return ReportFormat::Csv;
    if (text == "json") return ReportFormat::Json;
    return std::nullopt;
}

std::string render_report(const EvalReport& report, ReportFormat format) {
    switch (format) {
    case ReportFormat::Markdown: return markdown(report);
    case ReportFormat::Csv: return csv(report);
    case ReportFormat::Json: return to_json(report).dump(2) + "\n";
    }
    return {};
}

} // namespace erreg
