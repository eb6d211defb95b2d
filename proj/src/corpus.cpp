#include "erreg/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "erreg/error.hpp"
#include "json_util.hpp"

namespace erreg {

std::string_view situation_name(SituationId s) noexcept {
    return s == SituationId::OutfitRemark ? "OutfitRemark" : "StandOutRemark";
}

std::optional<SituationId> parse_situation(std::string_view text) noexcept {
    if (text == "OutfitRemark") return SituationId::OutfitRemark;
    if (text == "StandOutRemark") return SituationId::StandOutRemark;
    return std::nullopt;
}

std::string_view stimulus_text(SituationId s) noexcept {
    if (s == SituationId::OutfitRemark) {
        return "Before we start, a quick question. Where did you get that outfit? "
               "Somehow it doesn't really suit you.";
    }
    return "All the other applicants have already said what you said. "
           "You haven’t exactly stood out.";
}

std::string_view speaker_name(Speaker s) noexcept {
    return s == Speaker::Interviewer ? "interviewer" : "interviewee";
}

std::optional<Speaker> parse_speaker(std::string_view text) noexcept {
    if (text == "interviewer") return Speaker::Interviewer;
    if (text == "interviewee") return Speaker::Interviewee;
    return std::nullopt;
}

std::string make_record_id(std::string_view participant, SituationId situation, int frame_index) {
    std::string id(participant);
    id += '/';
    id += situation_name(situation);
    id += '/';
    id += std::to_string(frame_index);
    return id;
}

std::string Frame::record_id() const { return make_record_id(participant_id, situation, frame_index); }

std::size_t Corpus::frame_count() const {
    std::size_t n = 0;
    for (const auto& s : sessions) n += s.frames.size();
    return n;
}

std::vector<std::string> Corpus::participants() const {
    std::set<std::string> ids;
    for (const auto& s : sessions) ids.insert(s.participant_id);
    return {ids.begin(), ids.end()};
}

bool Corpus::is_complete() const {
    std::map<std::string, std::set<SituationId>> seen;
    for (const auto& s : sessions) seen[s.participant_id].insert(s.situation);
    return std::all_of(seen.begin(), seen.end(),
                       [](const auto& kv) { return kv.second.size() == kAllSituations.size(); });
}

namespace {

std::string session_id(const Session& s) {
    return s.participant_id + "/" + std::string(situation_name(s.situation));
}

void validate_features(const std::vector<CategoricalFeature>& group, const FeatureMap& values,
                       const std::string& record_id, bool require_complete, const char* what) {
    for (const auto& [key, value] : values) {
        auto it = std::find_if(group.begin(), group.end(), [&](const auto& f) { return f.name == key; });
        if (it == group.end()) {
            throw ValidationError(record_id + ": unknown " + what + " feature '" + key + "'");
        }
        if (!it->contains(value)) throw SchemaViolation(key, value, record_id);
    }
    if (require_complete && values.size() != group.size()) {
        for (const auto& f : group) {
            if (!values.count(f.name)) {
                throw ValidationError(record_id + ": " + what + " is missing feature '" + f.name + "'");
            }
        }
    }
}

void validate_transcript(const Session& session) {
    const auto id = session_id(session);
    const int n = static_cast<int>(session.frames.size());
    std::map<Speaker, int> last_end;
    int last_start = -1;
    for (const auto& u : session.transcript) {
        if (u.start_frame < 0 || u.start_frame > u.end_frame) {
            throw ValidationError(id + ": utterance frames [" + std::to_string(u.start_frame) + ", " +
                                  std::to_string(u.end_frame) + "] are not a valid range");
        }
        if (u.end_frame >= n) {
            throw ValidationError(id + ": utterance ends at frame " + std::to_string(u.end_frame) +
                                  " beyond the session's " + std::to_string(n) + " frames");
        }
        if (u.start_frame < last_start) {
            throw ValidationError(id + ": transcript is not sorted by start frame");
        }
        last_start = u.start_frame;
        auto it = last_end.find(u.speaker);
        if (it != last_end.end() && u.start_frame <= it->second) {
            throw ValidationError(id + ": overlapping " + std::string(speaker_name(u.speaker)) +
                                  " utterances at frame " + std::to_string(u.start_frame));
        }
        last_end[u.speaker] = u.end_frame;
    }
}

void validate_session(const AnnotationSchema& schema, const Session& s) {
    const auto id = session_id(s);
    if (s.participant_id.empty()) throw ValidationError("session with empty participant_id");
    const auto& gender = schema.personal(feature::kGender);
    if (!gender.contains(s.personal.gender)) {
        throw SchemaViolation(gender.name, s.personal.gender, id);
    }
    const auto& m = schema.mindedness;
    if (s.personal.mindedness_score < m.min || s.personal.mindedness_score > m.max) {
        std::ostringstream os;
        os << id << ": " << m.name << " " << s.personal.mindedness_score << " outside [" << m.min << ", "
           << m.max << "]";
        throw ValidationError(os.str());
    }
    for (std::size_t i = 0; i < s.frames.size(); ++i) {
        const auto& f = s.frames[i];
        if (f.frame_index != static_cast<int>(i)) {
            throw ValidationError(id + ": frames are not contiguous from 0 (found index " +
                                  std::to_string(f.frame_index) + " at position " + std::to_string(i) + ")");
        }
        if (f.participant_id != s.participant_id || f.situation != s.situation) {
            throw ValidationError(f.record_id() + ": frame does not belong to session " + id);
        }
        validate_features(schema.features, f.nonverbal, f.record_id(), false, "nonverbal");
        if (f.introspection) {
            validate_features(schema.introspection_features, *f.introspection, f.record_id(), true,
                              "introspection");
        }
    }
    validate_transcript(s);
}

Json feature_map_json(const std::vector<CategoricalFeature>& group, const FeatureMap& values) {
    Json j = Json::object();
    for (const auto& f : group) {
        auto it = values.find(f.name);
        if (it != values.end()) j[f.name] = it->second;
    }
    // Keys outside the schema cannot survive finalize_corpus, but keep them
    // visible if a caller writes an unvalidated corpus.
    for (const auto& [k, v] : values) {
        if (!j.contains(k)) j[k] = v;
    }
    return j;
}

Json session_json(const AnnotationSchema& schema, const Session& s) {
    Json j;
    j["participant_id"] = s.participant_id;
    j["situation"] = situation_name(s.situation);
    Json personal;
    personal["gender"] = s.personal.gender;
    personal["mindedness_score"] = s.personal.mindedness_score;
    j["personal"] = personal;
    Json transcript = Json::array();
    for (const auto& u : s.transcript) {
        Json ju;
        ju["speaker"] = speaker_name(u.speaker);
        ju["text"] = u.text;
        ju["start_frame"] = u.start_frame;
        ju["end_frame"] = u.end_frame;
        transcript.push_back(ju);
    }
    j["transcript"] = transcript;
    Json frames = Json::array();
    for (const auto& f : s.frames) {
        Json jf;
        jf["frame_index"] = f.frame_index;
        jf["nonverbal"] = feature_map_json(schema.features, f.nonverbal);
        if (f.introspection) {
            jf["introspection"] = feature_map_json(schema.introspection_features, *f.introspection);
        } else {
            jf["introspection"] = nullptr;
        }
        jf["label"] = display_name(f.label);
        frames.push_back(jf);
    }
    j["frames"] = frames;
    return j;
}

FeatureMap feature_map_from(const Json& j, const std::string& where) {
    if (!j.is_object()) throw ParseError(where, 0, "expected an object of feature values");
    FeatureMap m;
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!it.value().is_string()) {
            throw ParseError(where, 0, "feature '" + it.key() + "' must be a string");
        }
        m.emplace(it.key(), it.value().get<std::string>());
    }
    return m;
}

Session session_from(const Json& j, const std::string& where) {
    using detail::required;
    Session s;
    s.participant_id = required<std::string>(j, "participant_id", where);
    const auto situation = required<std::string>(j, "situation", where);
    auto sid = parse_situation(situation);
    if (!sid) throw ParseError(where, 0, "unknown situation '" + situation + "'");
    s.situation = *sid;
    const auto personal = required<Json>(j, "personal", where);
    s.personal.gender = required<std::string>(personal, "gender", where + " personal");
    s.personal.mindedness_score = required<double>(personal, "mindedness_score", where + " personal");

    const auto transcript = required<Json>(j, "transcript", where);
    if (!transcript.is_array()) throw ParseError(where, 0, "'transcript' must be an array");
    for (const auto& ju : transcript) {
        Utterance u;
        const auto speaker = required<std::string>(ju, "speaker", where + " transcript");
        auto sp = parse_speaker(speaker);
        if (!sp) throw ParseError(where, 0, "unknown speaker '" + speaker + "'");
        u.speaker = *sp;
        u.text = required<std::string>(ju, "text", where + " transcript");
        u.start_frame = required<int>(ju, "start_frame", where + " transcript");
        u.end_frame = required<int>(ju, "end_frame", where + " transcript");
        s.transcript.push_back(std::move(u));
    }

    const auto frames = required<Json>(j, "frames", where);
    if (!frames.is_array()) throw ParseError(where, 0, "'frames' must be an array");
    for (const auto& jf : frames) {
        Frame f;
        f.participant_id = s.participant_id;
        f.situation = s.situation;
        f.frame_index = required<int>(jf, "frame_index", where + " frame");
        const auto fwhere = where + " frame " + std::to_string(f.frame_index);
        f.nonverbal = feature_map_from(required<Json>(jf, "nonverbal", fwhere), fwhere + " nonverbal");
        if (jf.contains("introspection") && !jf.at("introspection").is_null()) {
            f.introspection = feature_map_from(jf.at("introspection"), fwhere + " introspection");
        }
        const auto label = required<std::string>(jf, "label", fwhere);
        auto parsed = parse_strategy(label);
        if (!parsed) throw SchemaViolation("label", label, f.record_id());
        f.label = *parsed;
        s.frames.push_back(std::move(f));
    }
    return s;
}

} // namespace

void finalize_corpus(Corpus& corpus) {
    corpus.schema.validate();
    std::set<std::pair<std::string, SituationId>> seen;
    std::map<std::string, const Session*> first_session;
    for (const auto& s : corpus.sessions) {
        if (!seen.emplace(s.participant_id, s.situation).second) {
            throw ValidationError("duplicate session " + session_id(s));
        }
        validate_session(corpus.schema, s);
        auto [it, inserted] = first_session.emplace(s.participant_id, &s);
        if (!inserted && (it->second->personal.gender != s.personal.gender ||
                          it->second->personal.mindedness_score != s.personal.mindedness_score)) {
            throw ValidationError("participant " + s.participant_id +
                                  " has inconsistent personal context across sessions");
        }
    }
    auto& m = corpus.schema.mindedness;
    if (!m.thresholds) {
        std::vector<double> scores;
        for (const auto& [_, s] : first_session) scores.push_back(s->personal.mindedness_score);
        // Empty corpora keep the midpoint split so levels stay defined.
        m.thresholds = scores.empty()
                           ? std::array<double, 2>{m.min + (m.max - m.min) / 3.0, m.min + 2.0 * (m.max - m.min) / 3.0}
                           : tercile_thresholds(std::move(scores));
    }
    for (auto& s : corpus.sessions) s.personal.mindedness_level = m.level_of(s.personal.mindedness_score);
}

Corpus read_corpus(std::istream& in, AnnotationSchema schema, const std::string& source) {
    Corpus corpus;
    corpus.schema = std::move(schema);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const Json j = detail::parse_json_text(line, source, lineno);
        try {
            corpus.sessions.push_back(session_from(j, "session"));
        } catch (const ParseError& e) {
            throw ParseError(source, lineno, e.what());
        }
    }
    finalize_corpus(corpus);
    return corpus;
}

Corpus load_corpus(const std::filesystem::path& path, AnnotationSchema schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path.string(), 0, "cannot open corpus file");
    return read_corpus(in, std::move(schema), path.string());
}

void write_corpus(const Corpus& corpus, std::ostream& out) {
    for (const auto& s : corpus.sessions) out << session_json(corpus.schema, s).dump() << '\n';
}

std::string corpus_to_jsonl(const Corpus& corpus) {
    std::ostringstream os;
    write_corpus(corpus, os);
    return os.str();
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
    detail::write_file(path, corpus_to_jsonl(corpus));
}

ClassHistogram class_histogram(const Corpus& corpus) {
    ClassHistogram h{};
    for (const auto& s : corpus.sessions) {
        for (const auto& f : s.frames) ++h[index_of(f.label)];
    }
    return h;
}

TranscriptPrefix transcript_prefix(const Session& session, int frame_index) {
    if (frame_index < 0 || frame_index >= static_cast<int>(session.frames.size())) {
        throw ValidationError(session_id(session) + ": frame " + std::to_string(frame_index) +
                              " outside session of " + std::to_string(session.frames.size()) + " frames");
    }
    TranscriptPrefix out;
    out.history.push_back(Utterance{Speaker::Interviewer, std::string(stimulus_text(session.situation)), -1, -1});
    std::vector<const Utterance*> ended;
    for (const auto& u : session.transcript) {
        if (u.end_frame < frame_index) {
            ended.push_back(&u);
        } else if (u.speaker == Speaker::Interviewee && u.start_frame <= frame_index && !out.current) {
            out.current = u;
        }
    }
    // Ordering by end frame keeps history at frame i a prefix of history at j > i.
    std::stable_sort(ended.begin(), ended.end(), [](const Utterance* a, const Utterance* b) {
        if (a->end_frame != b->end_frame) return a->end_frame < b->end_frame;
        if (a->start_frame != b->start_frame) return a->start_frame < b->start_frame;
        return a->speaker < b->speaker;
    });
    for (const auto* u : ended) out.history.push_back(*u);
    return out;
}

Corpus subset(const Corpus& corpus, const std::vector<std::string>& participants) {
    const std::set<std::string> keep(participants.begin(), participants.end());
    Corpus out;
    out.schema = corpus.schema;
    for (const auto& s : corpus.sessions) {
        if (keep.count(s.participant_id)) out.sessions.push_back(s);
    }
    return out;
}

} // namespace erreg
