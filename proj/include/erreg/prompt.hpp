#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "erreg/corpus.hpp"
#include "erreg/mask.hpp"
#include "erreg/records.hpp"

namespace erreg {

enum class Section { Situational, Nonverbal, Introspection, Personal };

inline constexpr std::array<Section, 4> kAllSections = {Section::Situational, Section::Nonverbal,
                                                        Section::Introspection, Section::Personal};

std::string_view section_name(Section s) noexcept;
std::optional<Section> parse_section(std::string_view text) noexcept;

struct SectionTemplate {
    std::string header;
    // Placeholders: situational {situation} {transcript}; nonverbal {nonverbal};
    // introspection {introspection}; personal {personal}. A line holding only a
    // placeholder that expands to nothing is dropped.
    std::string body;
};

struct TranscriptTemplate {
    std::string separator;
    std::string line;   // {speaker} {text}
    std::string target; // {speaker} {text}
    std::string silent;
    std::string interviewer = "Interviewer";
    std::string interviewee = "Interviewee";
};

struct PromptTemplateSet {
    std::string context_block;
    std::vector<Section> section_order = {kAllSections.begin(), kAllSections.end()};
    std::map<Section, SectionTemplate> sections;
    std::map<SituationId, std::string> situations;
    TranscriptTemplate transcript;
    std::string section_separator = "\n\n";

    // Throws TemplateError for unknown or cross-section placeholders, missing
    // sections, or a context block that does not name every strategy exactly once.
    void validate() const;
};

PromptTemplateSet default_templates();
PromptTemplateSet templates_from_json(const Json& j);
Json to_json(const PromptTemplateSet& t);
PromptTemplateSet load_templates(const std::filesystem::path& path);
void save_templates(const PromptTemplateSet& t, const std::filesystem::path& path);

// Occurrences of `needle` in `haystack`, case-sensitive, non-overlapping.
std::size_t count_occurrences(std::string_view haystack, std::string_view needle);

// Transcript block for one frame: separator, history lines, target line.
std::string render_transcript(const Session& session, int frame_index, const TranscriptTemplate& t);

PromptRecord compile_frame(const Frame& frame, const Session& session, const AnnotationSchema& schema,
                           const PromptTemplateSet& templates, const ModalityMask& mask);

// One record per frame ordered by (participant, situation, frame index).
std::vector<PromptRecord> compile_corpus(const Corpus& corpus, const PromptTemplateSet& templates,
                                         const ModalityMask& mask, bool with_labels);

} // namespace erreg
