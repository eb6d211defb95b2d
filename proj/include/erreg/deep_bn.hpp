#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "erreg/bayesnet.hpp"
#include "erreg/corpus.hpp"
#include "erreg/mask.hpp"
#include "erreg/strategy.hpp"

namespace erreg {

namespace node {
inline constexpr std::string_view kGender = "Gender";
inline constexpr std::string_view kMindedness = "Mindedness";
inline constexpr std::string_view kSituation = "Situation";
inline constexpr std::string_view kInternalEmotion = "InternalEmotionComponent";
inline constexpr std::string_view kRegulation = "EmotionRegulation";
inline constexpr std::string_view kExperiencedEmotion = "ExperiencedEmotionComponent";
inline constexpr std::string_view kExperiencedEmotionReport = "ExperiencedEmotion_VI";
inline constexpr std::string_view kInternalEmotionReport = "InternalEmotion_VI";
inline constexpr std::string_view kShameAwareness = "ShameAwareness";
inline constexpr std::string_view kDisplayRule = "DisplayRule";
inline constexpr std::string_view kRelationshipManagement = "RelationshipManagement";
} // namespace node

// "Facial Expression" -> "FacialExpression".
std::string signal_node_name(std::string_view feature);

// Default DEEP edge set for a schema (context -> emotion components and
// regulation; IEC -> ER; {IEC, ER} -> EEC; {ER, EEC} -> signals and display
// rule; introspection reports hang off the components they report).
EdgeList deep_bn_edges(const AnnotationSchema& schema);

// Structure with uniform CPTs. `edges` replaces the default edge set.
BayesNet build_deep_bn(const AnnotationSchema& schema, const std::optional<EdgeList>& edges = std::nullopt);

// Value index of every node with a source the frame carries, -1 otherwise.
// Ignores node classes; used for training and generation checks.
std::vector<int> frame_values(const BayesNet& net, const Frame& frame, const Session& session);

// Evidence indices for prediction: only observed_* nodes whose channel the
// mask keeps. The transcript has no node and is never consumed.
std::vector<int> frame_evidence(const BayesNet& net, const Frame& frame, const Session& session,
                                const ModalityMask& mask);

struct BnPrediction {
    StrategyLabel label = StrategyLabel::Rest;
    std::vector<double> posterior; // over StrategyLabel order
};

// Argmax of P(EmotionRegulation | evidence); ties go to the earlier label.
BnPrediction predict(const BayesNet& net, const Frame& frame, const Session& session, const ModalityMask& mask);
BnPrediction decide(std::vector<double> posterior);

// Throws NetworkError unless the query node is EmotionRegulation over the
// seven strategy display strings.
void check_regulation_node(const BayesNet& net);

} // namespace erreg
