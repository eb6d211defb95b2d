#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "erreg/bayesnet.hpp"
#include "erreg/corpus.hpp"

namespace erreg {

// Frame counts per class on the original recordings (sum 11535).
inline constexpr ClassHistogram kPaperHistogram = {655, 515, 629, 1650, 1911, 3593, 2582};

using UtteranceBank = std::map<std::pair<StrategyLabel, SituationId>, std::vector<std::string>>;

UtteranceBank default_utterance_bank();

// Probability that a channel value is kept; otherwise it is redrawn uniformly.
struct ChannelFidelity {
    double introspection = 1.0;
    double nonverbal = 1.0;
    double verbal = 1.0;
};

struct GenConfig {
    std::uint64_t seed = 0;
    int n_participants = 10;
    std::optional<int> frames_per_session;
    std::optional<ClassHistogram> target_histogram;
    double mean_segment_length = 40.0;
    ChannelFidelity fidelity;
    AnnotationSchema schema = default_schema();
    std::optional<BayesNet> planted_net; // default_planted_net(schema) when empty
    UtteranceBank utterance_bank = default_utterance_bank();

    // Throws ValidationError for out-of-range fidelities, uncovered bank
    // entries or infeasible histograms.
    void validate() const;
};

// DEEP-structured net with hand-set CPTs: regulation shifts the experienced
// emotion, introspection reports identify the strategy, nonverbal cues are
// only weakly tied to it.
BayesNet default_planted_net(const AnnotationSchema& schema);

// Frame-level ancestral sampling through the planted net. Strategies come in
// contiguous runs with geometric length; with a target histogram the runs are
// assigned stratified so class counts match exactly, and the internal emotion
// is drawn from its posterior given the assigned strategy.
Corpus generate_corpus(const GenConfig& config);

// Copy with all introspection removed.
Corpus split_introspection(const Corpus& corpus);

// Paths inside the JSON are resolved relative to `base_dir`.
GenConfig gen_config_from_json(const Json& j, const std::filesystem::path& base_dir = {});
GenConfig load_gen_config(const std::filesystem::path& path);
Json to_json(const UtteranceBank& bank);
UtteranceBank utterance_bank_from_json(const Json& j);

} // namespace erreg
