#include "erreg/deep_bn.hpp"

#include <algorithm>
#include <cctype>

#include "erreg/error.hpp"

namespace erreg {

std::string signal_node_name(std::string_view feature) {
    std::string out;
    bool upper = true;
    for (char c : feature) {
        if (c == ' ' || c == '_' || c == '-') {
            upper = true;
            continue;
        }
        out += upper ? static_cast<char>(std::toupper(static_cast<unsigned char>(c))) : c;
        upper = false;
    }
    return out;
}

EdgeList deep_bn_edges(const AnnotationSchema& schema) {
    const std::string G(node::kGender), M(node::kMindedness), S(node::kSituation);
    const std::string IEC(node::kInternalEmotion), ER(node::kRegulation), EEC(node::kExperiencedEmotion);
    EdgeList e;
    for (const auto& target : {IEC, ER, EEC}) {
        for (const auto& ctx : {G, M, S}) e.emplace_back(ctx, target);
    }
    e.emplace_back(IEC, ER);
    e.emplace_back(IEC, EEC);
    e.emplace_back(ER, EEC);
    for (const auto& f : schema.features) {
        e.emplace_back(ER, signal_node_name(f.name));
        e.emplace_back(EEC, signal_node_name(f.name));
    }
    e.emplace_back(IEC, std::string(node::kInternalEmotionReport));
    e.emplace_back(EEC, std::string(node::kExperiencedEmotionReport));
    e.emplace_back(ER, std::string(node::kShameAwareness));
    e.emplace_back(ER, std::string(node::kRelationshipManagement));
    e.emplace_back(ER, std::string(node::kDisplayRule));
    e.emplace_back(EEC, std::string(node::kDisplayRule));
    return e;
}

BayesNet build_deep_bn(const AnnotationSchema& schema, const std::optional<EdgeList>& edges) {
    schema.validate();
    const auto& internal = schema.introspection(feature::kInternalEmotion);
    const auto& experienced = schema.introspection(feature::kExperiencedEmotion);
    const std::string intro = "introspection:";

    std::vector<NodeSpec> nodes;
    nodes.push_back({std::string(node::kGender), schema.personal(feature::kGender).domain, {},
                     NodeClass::ObservedContext, "personal:" + std::string(feature::kGender)});
    nodes.push_back({std::string(node::kMindedness), schema.mindedness.levels, {}, NodeClass::ObservedContext,
                     "mindedness"});
    std::vector<std::string> situations;
    for (auto s : kAllSituations) situations.emplace_back(situation_name(s));
    nodes.push_back({std::string(node::kSituation), situations, {}, NodeClass::ObservedContext, "situation"});
    nodes.push_back({std::string(node::kInternalEmotion), internal.domain, {}, NodeClass::Latent,
                     intro + internal.name});
    std::vector<std::string> strategies(kStrategyDisplay.begin(), kStrategyDisplay.end());
    nodes.push_back({std::string(node::kRegulation), strategies, {}, NodeClass::Query, "label"});
    nodes.push_back({std::string(node::kExperiencedEmotion), experienced.domain, {}, NodeClass::Latent,
                     intro + experienced.name});
    for (const auto& f : schema.features) {
        nodes.push_back({signal_node_name(f.name), f.domain, {}, NodeClass::ObservedSignal, "nonverbal:" + f.name});
    }
    auto introspection_node = [&](std::string_view name, std::string_view feature) {
        const auto& f = schema.introspection(feature);
        nodes.push_back({std::string(name), f.domain, {}, NodeClass::ObservedIntrospection, intro + f.name});
    };
    introspection_node(node::kExperiencedEmotionReport, feature::kExperiencedEmotion);
    introspection_node(node::kInternalEmotionReport, feature::kInternalEmotion);
    introspection_node(node::kShameAwareness, feature::kShameAwareness);
    introspection_node(node::kDisplayRule, feature::kDisplayRule);
    introspection_node(node::kRelationshipManagement, feature::kRelationshipManagement);

    // Parents are filled from the edge list through with_edges, which also
    // checks names and acyclicity.
    BayesNet bare(nodes, std::string(node::kRegulation));
    return with_edges(bare, edges ? *edges : deep_bn_edges(schema));
}

namespace {

int value_index(const NodeSpec& n, const std::string& value) {
    auto it = std::find(n.domain.begin(), n.domain.end(), value);
    return it == n.domain.end() ? -1 : static_cast<int>(it - n.domain.begin());
}

int lookup(const FeatureMap& m, const std::string& key, const NodeSpec& n) {
    auto it = m.find(key);
    return it == m.end() ? -1 : value_index(n, it->second);
}

int source_value(const NodeSpec& n, const Frame& frame, const Session& session) {
    const auto& src = n.source;
    if (src == "label") return value_index(n, std::string(display_name(frame.label)));
    if (src == "situation") return value_index(n, std::string(situation_name(session.situation)));
    if (src == "mindedness") return value_index(n, session.personal.mindedness_level);
    if (src.rfind("personal:", 0) == 0) {
        return src.substr(9) == feature::kGender ? value_index(n, session.personal.gender) : -1;
    }
    if (src.rfind("nonverbal:", 0) == 0) return lookup(frame.nonverbal, src.substr(10), n);
    if (src.rfind("introspection:", 0) == 0) {
        return frame.introspection ? lookup(*frame.introspection, src.substr(14), n) : -1;
    }
    return -1;
}

} // namespace

std::vector<int> frame_values(const BayesNet& net, const Frame& frame, const Session& session) {
    std::vector<int> v(net.size(), -1);
    for (std::size_t i = 0; i < net.size(); ++i) v[i] = source_value(net.node(i), frame, session);
    return v;
}

std::vector<int> frame_evidence(const BayesNet& net, const Frame& frame, const Session& session,
                                const ModalityMask& mask) {
    std::vector<int> v(net.size(), -1);
    for (std::size_t i = 0; i < net.size(); ++i) {
        const auto& n = net.node(i);
        bool use = false;
        switch (n.node_class) {
        case NodeClass::ObservedContext:
            use = n.source == "situation" ? mask.include_situational_context : mask.include_personal_context;
            break;
        case NodeClass::ObservedSignal: use = mask.include_nonverbal; break;
        case NodeClass::ObservedIntrospection: use = mask.include_introspection; break;
        default: break;
        }
        if (use) v[i] = source_value(n, frame, session);
    }
    return v;
}

void check_regulation_node(const BayesNet& net) {
    if (net.query_node() != node::kRegulation) {
        throw NetworkError("network query node must be '" + std::string(node::kRegulation) + "'");
    }
    const auto& dom = net.node(net.index(node::kRegulation)).domain;
    if (!std::equal(dom.begin(), dom.end(), kStrategyDisplay.begin(), kStrategyDisplay.end())) {
        throw NetworkError("EmotionRegulation domain must list the strategy display strings in order");
    }
}

BnPrediction decide(std::vector<double> posterior) {
    BnPrediction out;
    const auto best = std::max_element(posterior.begin(), posterior.end());
    out.label = strategy_at(static_cast<std::size_t>(best - posterior.begin()));
    out.posterior = std::move(posterior);
    return out;
}

BnPrediction predict(const BayesNet& net, const Frame& frame, const Session& session, const ModalityMask& mask) {
    check_regulation_node(net);
    const auto evidence = frame_evidence(net, frame, session, mask);
    return decide(eliminate(net, evidence, net.index(node::kRegulation)));
}

} // namespace erreg
