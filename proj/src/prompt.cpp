#include "erreg/prompt.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "erreg/error.hpp"
#include "json_util.hpp"

namespace erreg {

namespace {

constexpr std::array<std::string_view, 4> kSectionNames = {"situational", "nonverbal", "introspection", "personal"};

// Placeholder each section owns.
const std::map<std::string, Section>& placeholder_owner() {
    static const std::map<std::string, Section> m = {
        {"situation", Section::Situational},       {"transcript", Section::Situational},
        {"nonverbal", Section::Nonverbal},         {"introspection", Section::Introspection},
        {"personal", Section::Personal},
    };
    return m;
}

std::vector<std::string> placeholders(std::string_view text) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '{') continue;
        auto end = text.find('}', i + 1);
        if (end == std::string_view::npos) throw TemplateError("unterminated placeholder in \"" + std::string(text) + "\"");
        out.emplace_back(text.substr(i + 1, end - i - 1));
        i = end;
    }
    return out;
}

void check_placeholders(std::string_view text, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& p : placeholders(text)) {
        if (!allowed.count(p)) throw TemplateError(where + ": unknown placeholder {" + p + "}");
    }
}

std::string substitute(std::string_view text, const std::map<std::string, std::string>& values) {
    std::string out;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '{') {
            auto end = text.find('}', i + 1);
            out += values.at(std::string(text.substr(i + 1, end - i - 1)));
            i = end;
        } else {
            out += text[i];
        }
    }
    return out;
}

std::string render_body(const std::string& body, const std::map<std::string, std::string>& values) {
    std::vector<std::string> lines;
    std::istringstream in(body);
    std::string line;
    while (std::getline(in, line)) {
        const auto ph = placeholders(line);
        const std::string rendered = substitute(line, values);
        if (rendered.empty() && ph.size() == 1 && line == "{" + ph[0] + "}") continue;
        lines.push_back(rendered);
    }
    std::string out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (i) out += '\n';
        out += lines[i];
    }
    return out;
}

std::string join_lines(const std::vector<std::string>& lines) {
    std::string out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (i) out += '\n';
        out += lines[i];
    }
    return out;
}

std::string render_map(const std::vector<CategoricalFeature>& features, const FeatureMap& values) {
    std::vector<std::string> lines;
    for (const auto& f : features) {
        auto it = values.find(f.name);
        if (it != values.end()) lines.push_back(f.textualize(it->second));
    }
    return join_lines(lines);
}

} // namespace

std::string_view section_name(Section s) noexcept { return kSectionNames[static_cast<std::size_t>(s)]; }

std::optional<Section> parse_section(std::string_view text) noexcept {
    for (std::size_t i = 0; i < kSectionNames.size(); ++i) {
        if (kSectionNames[i] == text) return static_cast<Section>(i);
    }
    return std::nullopt;
}

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
    if (needle.empty()) return 0;
    std::size_t n = 0;
    for (auto pos = haystack.find(needle); pos != std::string_view::npos; pos = haystack.find(needle, pos + needle.size())) {
        ++n;
    }
    return n;
}

void PromptTemplateSet::validate() const {
    for (auto s : kStrategyDisplay) {
        const auto n = count_occurrences(context_block, s);
        if (n != 1) {
            throw TemplateError("context block names \"" + std::string(s) + "\" " + std::to_string(n) +
                                " times; expected exactly once");
        }
    }
    if (!placeholders(context_block).empty()) throw TemplateError("context block must not contain placeholders");
    std::set<Section> seen;
    for (auto s : section_order) {
        if (!seen.insert(s).second) throw TemplateError("section '" + std::string(section_name(s)) + "' listed twice");
    }
    if (seen.size() != kAllSections.size()) throw TemplateError("section order must list all four sections");
    for (auto s : kAllSections) {
        auto it = sections.find(s);
        const std::string where = "section '" + std::string(section_name(s)) + "'";
        if (it == sections.end()) throw TemplateError(where + " has no template");
        check_placeholders(it->second.header, {}, where + " header");
        for (const auto& p : placeholders(it->second.body)) {
            auto owner = placeholder_owner().find(p);
            if (owner == placeholder_owner().end()) throw TemplateError(where + ": unknown placeholder {" + p + "}");
            if (owner->second != s) {
                throw TemplateError(where + ": placeholder {" + p + "} belongs to section '" +
                                    std::string(section_name(owner->second)) + "'");
            }
        }
    }
    for (auto sit : kAllSituations) {
        if (!situations.count(sit)) {
            throw TemplateError("no description for situation " + std::string(situation_name(sit)));
        }
    }
    check_placeholders(transcript.separator, {}, "transcript separator");
    check_placeholders(transcript.line, {"speaker", "text"}, "transcript line");
    check_placeholders(transcript.target, {"speaker", "text"}, "transcript target");
    check_placeholders(transcript.silent, {}, "transcript silent line");
}

PromptTemplateSet default_templates() {
    PromptTemplateSet t;
    t.context_block =
        "You will read descriptions of single video frames recorded during mock job interviews. In every "
        "interview the interviewer makes a remark meant to make the interviewee feel ashamed, either about "
        "their outfit or about their answers not standing out from those of other applicants. Decide which "
        "strategy the interviewee uses at the described frame to regulate shame.\n"
        "\n"
        "Strategy definitions (default wording, replace with your own definitions as needed):\n"
        "- Withdrawal: the interviewee pulls back from the situation, falls silent, looks away or freezes "
        "as if wanting to disappear.\n"
        "- Attack self: the interviewee turns the criticism inward, agrees with it and belittles themselves.\n"
        "- Attack other: the interviewee turns against the interviewer and questions their right to judge.\n"
        "- Avoidance: the interviewee plays the moment down, jokes or laughs it off, or changes the subject.\n"
        "- Depreciation: the interviewee devalues the remark, the standard behind it or the people holding it.\n"
        "- Stabilize self: the interviewee acknowledges the remark calmly and restores their self-image "
        "with arguments about themselves.\n"
        "- Rest: no regulation is visible; the interviewee behaves neutrally.\n"
        "\n"
        "Answer with the name of exactly one strategy, written as in the list above.";
    t.sections[Section::Situational] = {"Situational context:", "{situation}\n{transcript}"};
    t.sections[Section::Nonverbal] = {"Nonverbal behavior:", "{nonverbal}"};
    t.sections[Section::Introspection] = {"Verbalized introspection:", "{introspection}"};
    t.sections[Section::Personal] = {"Personal context:", "{personal}"};
    t.situations[SituationId::OutfitRemark] =
        "The interviewee is in a job interview. The interviewer has just criticized the interviewee's outfit.";
    t.situations[SituationId::StandOutRemark] =
        "The interviewee is in a job interview. The interviewer has just said that the interviewee's answers "
        "do not stand out from those of the other applicants.";
    t.transcript.separator = "- - - - - - - - - -";
    t.transcript.line = "{speaker}: {text}";
    t.transcript.target = ">>> Current utterance (classify this frame): {speaker}: {text}";
    t.transcript.silent = ">>> Current utterance (classify this frame): the interviewee is silent.";
    return t;
}

PromptTemplateSet templates_from_json(const Json& j) {
    using detail::required;
    const std::string where = "templates";
    PromptTemplateSet t;
    t.context_block = required<std::string>(j, "context_block", where);
    if (j.contains("section_order")) {
        t.section_order.clear();
        for (const auto& s : required<std::vector<std::string>>(j, "section_order", where)) {
            auto sec = parse_section(s);
            if (!sec) throw TemplateError("unknown section '" + s + "' in section_order");
            t.section_order.push_back(*sec);
        }
    }
    const auto& sections = j.at("sections");
    for (auto it = sections.begin(); it != sections.end(); ++it) {
        auto sec = parse_section(it.key());
        if (!sec) throw TemplateError("unknown section '" + it.key() + "'");
        t.sections[*sec] = {required<std::string>(it.value(), "header", where + "/" + it.key()),
                            required<std::string>(it.value(), "body", where + "/" + it.key())};
    }
    const auto& situations = j.at("situations");
    for (auto it = situations.begin(); it != situations.end(); ++it) {
        auto sit = parse_situation(it.key());
        if (!sit) throw TemplateError("unknown situation '" + it.key() + "'");
        t.situations[*sit] = it.value().get<std::string>();
    }
    const auto& tr = j.at("transcript");
    t.transcript.separator = required<std::string>(tr, "separator", where + "/transcript");
    t.transcript.line = required<std::string>(tr, "line", where + "/transcript");
    t.transcript.target = required<std::string>(tr, "target", where + "/transcript");
    t.transcript.silent = required<std::string>(tr, "silent", where + "/transcript");
    if (tr.contains("speakers")) {
        t.transcript.interviewer = tr.at("speakers").value("interviewer", t.transcript.interviewer);
        t.transcript.interviewee = tr.at("speakers").value("interviewee", t.transcript.interviewee);
    }
    if (j.contains("section_separator")) t.section_separator = required<std::string>(j, "section_separator", where);
    t.validate();
    return t;
}

Json to_json(const PromptTemplateSet& t) {
    Json j;
    j["context_block"] = t.context_block;
    j["section_order"] = Json::array();
    for (auto s : t.section_order) j["section_order"].push_back(section_name(s));
    j["sections"] = Json::object();
    for (const auto& [s, tpl] : t.sections) {
        j["sections"][std::string(section_name(s))] = {{"header", tpl.header}, {"body", tpl.body}};
    }
    j["situations"] = Json::object();
    for (const auto& [sit, text] : t.situations) j["situations"][std::string(situation_name(sit))] = text;
    j["transcript"] = {{"separator", t.transcript.separator},
                       {"line", t.transcript.line},
                       {"target", t.transcript.target},
                       {"silent", t.transcript.silent},
                       {"speakers", {{"interviewer", t.transcript.interviewer}, {"interviewee", t.transcript.interviewee}}}};
    j["section_separator"] = t.section_separator;
    return j;
}

PromptTemplateSet load_templates(const std::filesystem::path& path) {
    const Json j = detail::load_json_file(path);
    try {
        return templates_from_json(j);
    } catch (const TemplateError& e) {
        throw TemplateError(path.string() + ": " + e.what());
    } catch (const Json::exception& e) {
        throw ParseError(path.string(), 0, e.what());
    }
}

void save_templates(const PromptTemplateSet& t, const std::filesystem::path& path) {
    detail::write_file(path, to_json(t).dump(2) + "\n");
}

std::string render_transcript(const Session& session, int frame_index, const TranscriptTemplate& t) {
    const auto prefix = transcript_prefix(session, frame_index);
    auto speaker = [&](Speaker s) { return s == Speaker::Interviewer ? t.interviewer : t.interviewee; };
    std::vector<std::string> lines{t.separator};
    for (const auto& u : prefix.history) lines.push_back(substitute(t.line, {{"speaker", speaker(u.speaker)}, {"text", u.text}}));
    if (prefix.current) {
        lines.push_back(substitute(t.target, {{"speaker", speaker(prefix.current->speaker)}, {"text", prefix.current->text}}));
    } else {
        lines.push_back(t.silent);
    }
    return join_lines(lines);
}

PromptRecord compile_frame(const Frame& frame, const Session& session, const AnnotationSchema& schema,
                           const PromptTemplateSet& templates, const ModalityMask& mask) {
    mask.validate();
    if (frame.participant_id != session.participant_id || frame.situation != session.situation) {
        throw ValidationError("frame " + frame.record_id() + " does not belong to session " +
                              session.participant_id + "/" + std::string(situation_name(session.situation)));
    }
    PromptRecord rec;
    rec.record_id = frame.record_id();
    rec.context = templates.context_block;
    rec.label = frame.label;

    std::vector<std::string> blocks;
    for (auto s : templates.section_order) {
        std::map<std::string, std::string> values;
        switch (s) {
        case Section::Situational:
            if (!mask.include_situational_context) continue;
            values["situation"] = templates.situations.at(session.situation);
            values["transcript"] =
                mask.include_transcript ? render_transcript(session, frame.frame_index, templates.transcript) : "";
            break;
        case Section::Nonverbal:
            if (!mask.include_nonverbal) continue;
            values["nonverbal"] = render_map(schema.features, frame.nonverbal);
            break;
        case Section::Introspection:
            if (!mask.include_introspection) continue;
            if (!frame.introspection) {
                rec.introspection_unavailable = true;
                continue;
            }
            values["introspection"] = render_map(schema.introspection_features, *frame.introspection);
            break;
        case Section::Personal: {
            if (!mask.include_personal_context) continue;
            std::vector<std::string> lines;
            for (const auto& f : schema.personal_features) {
                if (f.name == feature::kGender) lines.push_back(f.textualize(session.personal.gender));
            }
            lines.push_back(schema.mindedness.as_categorical().textualize(session.personal.mindedness_level));
            values["personal"] = join_lines(lines);
            break;
        }
        }
        const auto& tpl = templates.sections.at(s);
        std::string block = tpl.header;
        const auto body = render_body(tpl.body, values);
        if (!body.empty()) block += (block.empty() ? "" : "\n") + body;
        blocks.push_back(std::move(block));
    }
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        if (i) rec.prompt += templates.section_separator;
        rec.prompt += blocks[i];
    }
    return rec;
}

std::vector<PromptRecord> compile_corpus(const Corpus& corpus, const PromptTemplateSet& templates,
                                         const ModalityMask& mask, bool with_labels) {
    templates.validate();
    std::vector<const Session*> order;
    for (const auto& s : corpus.sessions) order.push_back(&s);
    std::sort(order.begin(), order.end(), [](const Session* a, const Session* b) {
        return std::tie(a->participant_id, a->situation) < std::tie(b->participant_id, b->situation);
    });
    std::vector<PromptRecord> out;
    out.reserve(corpus.frame_count());
    for (const auto* s : order) {
        std::vector<const Frame*> frames;
        for (const auto& f : s->frames) frames.push_back(&f);
        std::sort(frames.begin(), frames.end(), [](const Frame* a, const Frame* b) { return a->frame_index < b->frame_index; });
        for (const auto* f : frames) {
            auto rec = compile_frame(*f, *s, corpus.schema, templates, mask);
            if (!with_labels) rec.label.reset();
            out.push_back(std::move(rec));
        }
    }
    return out;
}

} // namespace erreg
