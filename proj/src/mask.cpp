#include "erreg/mask.hpp"

#include "erreg/error.hpp"

namespace erreg {

void ModalityMask::validate() const {
    if (include_transcript && !include_situational_context) {
        throw ValidationError("mask includes the transcript but not the situational context that carries it");
    }
}

ModalityMask mask_for(MaskRow row, bool with_introspection) {
    ModalityMask m;
    m.include_introspection = with_introspection;
    switch (row) {
    case MaskRow::All: break;
    case MaskRow::NoPersonal: m.include_personal_context = false; break;
    case MaskRow::NoSituational:
        m.include_situational_context = false;
        m.include_transcript = false;
        break;
    case MaskRow::NoTranscript: m.include_transcript = false; break;
    case MaskRow::NoNonverbal: m.include_nonverbal = false; break;
    case MaskRow::OnlyIntrospection:
        m = ModalityMask::none();
        m.include_introspection = true;
        break;
    case MaskRow::OnlyNonverbal:
        m = ModalityMask::none();
        m.include_nonverbal = true;
        break;
    }
    return m;
}

std::string ModalityMask::row_name() const {
    struct Named {
        MaskRow row;
        const char* name;
    };
    static constexpr Named named[] = {
        {MaskRow::All, "All"},
        {MaskRow::NoPersonal, "No personal context"},
        {MaskRow::NoSituational, "No situational context"},
        {MaskRow::NoTranscript, "No transcript"},
        {MaskRow::NoNonverbal, "No nonverbal behavior"},
    };
    for (bool intro : {true, false}) {
        for (const auto& n : named) {
            if (mask_for(n.row, intro) == *this) return n.name;
        }
    }
    if (*this == mask_for(MaskRow::OnlyIntrospection, true)) return "Only verbalized introspection";
    if (*this == mask_for(MaskRow::OnlyNonverbal, false)) return "Only nonverbal behavior";

    std::string out;
    auto add = [&](bool on, const char* name) {
        if (!on) return;
        if (!out.empty()) out += "+";
        out += name;
    };
    add(include_personal_context, "personal");
    add(include_situational_context, "situational");
    add(include_transcript, "transcript");
    add(include_nonverbal, "nonverbal");
    add(include_introspection, "introspection");
    return out.empty() ? "Nothing" : out;
}

std::string ModalityMask::key() const {
    std::string k = "-----";
    if (include_personal_context) k[0] = 'P';
    if (include_situational_context) k[1] = 'S';
    if (include_transcript) k[2] = 'T';
    if (include_nonverbal) k[3] = 'N';
    if (include_introspection) k[4] = 'I';
    return k;
}

ModalityMask ModalityMask::from_key(const std::string& key) {
    static constexpr char letters[] = "PSTNI";
    if (key.size() != 5) throw ValidationError("mask key '" + key + "' must have five characters");
    bool bits[5];
    for (int i = 0; i < 5; ++i) {
        if (key[i] == letters[i]) {
            bits[i] = true;
        } else if (key[i] == '-') {
            bits[i] = false;
        } else {
            throw ValidationError("mask key '" + key + "' is malformed");
        }
    }
    ModalityMask m{bits[0], bits[1], bits[2], bits[3], bits[4]};
    m.validate();
    return m;
}

std::vector<ModalityMask> ablation_masks() {
    return {
        mask_for(MaskRow::All, true),           mask_for(MaskRow::NoPersonal, true),
        mask_for(MaskRow::NoSituational, true), mask_for(MaskRow::NoTranscript, true),
        mask_for(MaskRow::NoNonverbal, true),   mask_for(MaskRow::OnlyIntrospection, true),
        mask_for(MaskRow::All, false),          mask_for(MaskRow::NoPersonal, false),
        mask_for(MaskRow::NoSituational, false), mask_for(MaskRow::NoTranscript, false),
        mask_for(MaskRow::NoNonverbal, false),  mask_for(MaskRow::OnlyNonverbal, false),
    };
}

} // namespace erreg
