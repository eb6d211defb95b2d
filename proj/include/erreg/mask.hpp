#pragma once

#include <string>
#include <vector>

namespace erreg {

// Input channels used by a classifier. The transcript is rendered inside the
// situational block, so it cannot be present without it.
struct ModalityMask {
    bool include_personal_context = true;
    bool include_situational_context = true;
    bool include_transcript = true;
    bool include_nonverbal = true;
    bool include_introspection = true;

    static ModalityMask all() { return {}; }
    static ModalityMask none() { return {false, false, false, false, false}; }

    // Throws ValidationError when include_transcript is set without the situational block.
    void validate() const;

    // Row label used in ablation tables, e.g. "No transcript" or "Only nonverbal behavior".
    // Masks that match no named row get a "+"-joined channel list.
    std::string row_name() const;
    // Compact stable identifier ("PSTNI" with '-' for dropped channels).
    std::string key() const;
    static ModalityMask from_key(const std::string& key);

    bool operator==(const ModalityMask&) const = default;
};

// The twelve ablation rows: six with verbalized introspection, six without.
std::vector<ModalityMask> ablation_masks();

// The seven distinct row shapes used for ablations.
enum class MaskRow { All, NoPersonal, NoSituational, NoTranscript, NoNonverbal, OnlyIntrospection, OnlyNonverbal };
ModalityMask mask_for(MaskRow row, bool with_introspection);

} // namespace erreg
