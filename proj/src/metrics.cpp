#include "erreg/metrics.hpp"

#include "erreg/error.hpp"

namespace erreg {

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
    for (std::size_t t = 0; t < kNumStrategies; ++t) {
        for (std::size_t p = 0; p < kNumStrategies; ++p) counts[t][p] += other.counts[t][p];
    }
}

std::size_t ConfusionMatrix::total() const {
    std::size_t n = 0;
    for (const auto& row : counts) {
        for (auto c : row) n += c;
    }
    return n;
}

std::size_t ConfusionMatrix::correct() const {
    std::size_t n = 0;
    for (std::size_t c = 0; c < kNumStrategies; ++c) n += counts[c][c];
    return n;
}

std::size_t ConfusionMatrix::support(std::size_t c) const {
    std::size_t n = 0;
    for (auto x : counts[c]) n += x;
    return n;
}

Scores score(const ConfusionMatrix& cm) {
    Scores s;
    s.confusion = cm;
    s.n = cm.total();
    if (s.n == 0) throw ValidationError("cannot score an empty prediction set");
    const double n = static_cast<double>(s.n);
    for (std::size_t c = 0; c < kNumStrategies; ++c) {
        std::size_t fp = 0, fn = 0;
        for (std::size_t k = 0; k < kNumStrategies; ++k) {
            if (k == c) continue;
            fp += cm.counts[k][c];
            fn += cm.counts[c][k];
        }
        const std::size_t tp = cm.counts[c][c];
        const std::size_t tn = s.n - tp - fp - fn;
        auto& cs = s.per_class[c];
        cs.support = cm.support(c);
        cs.accuracy = static_cast<double>(tp + tn) / n;
        const std::size_t denom = 2 * tp + fp + fn;
        cs.f1 = denom ? static_cast<double>(2 * tp) / static_cast<double>(denom) : 0.0;
        s.weighted_f1 += static_cast<double>(cs.support) * cs.f1;
    }
    s.weighted_f1 /= n;
    s.accuracy = static_cast<double>(cm.correct()) / n;
    return s;
}

Scores score(std::span<const StrategyLabel> truths, std::span<const StrategyLabel> preds) {
    if (truths.size() != preds.size()) {
        throw ValidationError("length mismatch: " + std::to_string(truths.size()) + " truths vs " +
                              std::to_string(preds.size()) + " predictions");
    }
    if (truths.empty()) throw ValidationError("cannot score an empty prediction set");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < truths.size(); ++i) cm.add(truths[i], preds[i]);
    return score(cm);
}

Json to_json(const Scores& s) {
    Json j;
    j["n"] = s.n;
    j["accuracy"] = s.accuracy;
    j["weighted_f1"] = s.weighted_f1;
    j["per_class"] = Json::array();
    for (std::size_t c = 0; c < kNumStrategies; ++c) {
        j["per_class"].push_back({{"label", display_name(strategy_at(c))},
                                  {"accuracy", s.per_class[c].accuracy},
                                  {"f1", s.per_class[c].f1},
                                  {"support", s.per_class[c].support}});
    }
    j["confusion"] = s.confusion.counts;
    return j;
}

Scores scores_from_json(const Json& j) {
    ConfusionMatrix cm;
    cm.counts = j.at("confusion").get<decltype(cm.counts)>();
    return score(cm);
}

} // namespace erreg
