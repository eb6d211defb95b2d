#pragma once

#include <array>
#include <cstddef>
#include <span>

#include "erreg/schema.hpp"
#include "erreg/strategy.hpp"

namespace erreg {

// Rows are true labels, columns predictions.
struct ConfusionMatrix {
    std::array<std::array<std::size_t, kNumStrategies>, kNumStrategies> counts{};

    void add(StrategyLabel truth, StrategyLabel predicted) { ++counts[index_of(truth)][index_of(predicted)]; }
    void merge(const ConfusionMatrix& other);
    std::size_t total() const;
    std::size_t correct() const;
    std::size_t support(std::size_t c) const;

    bool operator==(const ConfusionMatrix&) const = default;
};

struct ClassScore {
    double accuracy = 0.0; // one-vs-rest
    double f1 = 0.0;
    std::size_t support = 0;
};

struct Scores {
    ConfusionMatrix confusion;
    std::array<ClassScore, kNumStrategies> per_class{};
    double accuracy = 0.0;
    double weighted_f1 = 0.0;
    std::size_t n = 0;
};

// Throws ValidationError for an empty matrix.
Scores score(const ConfusionMatrix& cm);
// Throws ValidationError on length mismatch or empty input.
Scores score(std::span<const StrategyLabel> truths, std::span<const StrategyLabel> preds);

Json to_json(const Scores& s);
Scores scores_from_json(const Json& j);

} // namespace erreg
