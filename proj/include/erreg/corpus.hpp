#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "erreg/schema.hpp"
#include "erreg/strategy.hpp"

namespace erreg {

enum class SituationId { OutfitRemark = 0, StandOutRemark = 1 };

inline constexpr std::array<SituationId, 2> kAllSituations = {SituationId::OutfitRemark,
                                                              SituationId::StandOutRemark};

std::string_view situation_name(SituationId s) noexcept;
std::optional<SituationId> parse_situation(std::string_view text) noexcept;
// What the interviewer says to induce shame.
std::string_view stimulus_text(SituationId s) noexcept;

enum class Speaker { Interviewer, Interviewee };

std::string_view speaker_name(Speaker s) noexcept;
std::optional<Speaker> parse_speaker(std::string_view text) noexcept;

struct Utterance {
    Speaker speaker = Speaker::Interviewee;
    std::string text;
    int start_frame = 0;
    int end_frame = 0;

    bool operator==(const Utterance&) const = default;
};

struct PersonalContext {
    std::string gender;
    double mindedness_score = 0.0;
    std::string mindedness_level; // derived from score and schema thresholds
};

using FeatureMap = std::map<std::string, std::string>;

struct Frame {
    std::string participant_id;
    SituationId situation = SituationId::OutfitRemark;
    int frame_index = 0;
    FeatureMap nonverbal;
    std::optional<FeatureMap> introspection;
    StrategyLabel label = StrategyLabel::Rest;

    // participant_id/situation/frame_index
    std::string record_id() const;
};

struct Session {
    std::string participant_id;
    SituationId situation = SituationId::OutfitRemark;
    PersonalContext personal;
    std::vector<Utterance> transcript;
    std::vector<Frame> frames;
};

struct Corpus {
    AnnotationSchema schema;
    std::vector<Session> sessions;

    std::size_t frame_count() const;
    // Sorted, unique.
    std::vector<std::string> participants() const;
    // True when every participant has one session per situation.
    bool is_complete() const;
};

std::string make_record_id(std::string_view participant, SituationId situation, int frame_index);

// Checks every structural invariant and fills derived fields (mindedness
// levels, computing tercile thresholds into corpus.schema when the schema
// declares none). Throws SchemaViolation or ValidationError.
void finalize_corpus(Corpus& corpus);

// JSONL corpus: one session per line. Errors carry the 1-based line number.
Corpus read_corpus(std::istream& in, AnnotationSchema schema, const std::string& source = "<corpus>");
Corpus load_corpus(const std::filesystem::path& path, AnnotationSchema schema);

// Canonical form: schema feature order inside maps, one line per session.
void write_corpus(const Corpus& corpus, std::ostream& out);
std::string corpus_to_jsonl(const Corpus& corpus);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

using ClassHistogram = std::array<std::size_t, kNumStrategies>;

ClassHistogram class_histogram(const Corpus& corpus);

struct TranscriptPrefix {
    // Interviewer stimulus first, then every utterance that ended before the
    // frame, ordered by end frame.
    std::vector<Utterance> history;
    // Interviewee utterance spanning the frame, if any.
    std::optional<Utterance> current;
};

TranscriptPrefix transcript_prefix(const Session& session, int frame_index);

// Copy restricted to the given participants (session order preserved).
Corpus subset(const Corpus& corpus, const std::vector<std::string>& participants);

} // namespace erreg
