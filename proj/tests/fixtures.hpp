#pragma once

#include <functional>
#include <string>

#include "erreg/corpus.hpp"
#include "erreg/synth.hpp"

namespace fixture {

// Every schema feature set to its first value.
inline erreg::FeatureMap first_values(const std::vector<erreg::CategoricalFeature>& features) {
    erreg::FeatureMap m;
    for (const auto& f : features) m[f.name] = f.domain.front();
    return m;
}

inline erreg::Session session(const erreg::AnnotationSchema& schema, const std::string& pid, erreg::SituationId sit,
                              int n_frames, erreg::StrategyLabel label = erreg::StrategyLabel::Rest,
                              double score = 50.0, const std::string& gender = "female") {
    erreg::Session s;
    s.participant_id = pid;
    s.situation = sit;
    s.personal.gender = gender;
    s.personal.mindedness_score = score;
    for (int i = 0; i < n_frames; ++i) {
        erreg::Frame f;
        f.participant_id = pid;
        f.situation = sit;
        f.frame_index = i;
        f.nonverbal = first_values(schema.features);
        f.introspection = first_values(schema.introspection_features);
        f.label = label;
        s.frames.push_back(std::move(f));
    }
    return s;
}

inline erreg::Corpus corpus(std::vector<erreg::Session> sessions, erreg::AnnotationSchema schema = erreg::default_schema()) {
    erreg::Corpus c;
    c.schema = std::move(schema);
    c.sessions = std::move(sessions);
    erreg::finalize_corpus(c);
    return c;
}

// Small synthetic corpus for tests that need realistic variety.
inline erreg::Corpus synthetic(std::uint64_t seed = 5, int participants = 4, int frames_per_session = 60,
                               erreg::ChannelFidelity fidelity = {}) {
    erreg::GenConfig cfg;
    cfg.seed = seed;
    cfg.n_participants = participants;
    cfg.frames_per_session = frames_per_session;
    cfg.mean_segment_length = 8;
    cfg.fidelity = fidelity;
    return erreg::generate_corpus(cfg);
}

} // namespace fixture
