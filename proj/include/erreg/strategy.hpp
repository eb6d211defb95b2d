#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace erreg {

// Shame regulation strategies in their fixed iteration order.
enum class StrategyLabel : std::size_t {
    Withdrawal = 0,
    AttackSelf,
    AttackOther,
    Avoidance,
    Depreciation,
    StabilizeSelf,
    Rest,
};

inline constexpr std::size_t kNumStrategies = 7;

inline constexpr std::array<StrategyLabel, kNumStrategies> kAllStrategies = {
    StrategyLabel::Withdrawal,   StrategyLabel::AttackSelf,    StrategyLabel::AttackOther,
    StrategyLabel::Avoidance,    StrategyLabel::Depreciation,  StrategyLabel::StabilizeSelf,
    StrategyLabel::Rest,
};

// Canonical display strings, used verbatim in prompts, datasets and when
// matching generated text.
inline constexpr std::array<std::string_view, kNumStrategies> kStrategyDisplay = {
    "Withdrawal", "Attack self", "Attack other", "Avoidance",
    "Depreciation", "Stabilize self", "Rest",
};

inline constexpr std::array<std::string_view, kNumStrategies> kStrategyIdentifier = {
    "Withdrawal", "AttackSelf", "AttackOther", "Avoidance",
    "Depreciation", "StabilizeSelf", "Rest",
};

constexpr std::size_t index_of(StrategyLabel s) noexcept { return static_cast<std::size_t>(s); }

constexpr StrategyLabel strategy_at(std::size_t i) noexcept { return static_cast<StrategyLabel>(i); }

constexpr std::string_view display_name(StrategyLabel s) noexcept { return kStrategyDisplay[index_of(s)]; }

constexpr std::string_view identifier(StrategyLabel s) noexcept { return kStrategyIdentifier[index_of(s)]; }

// Accepts either the display string ("Stabilize self") or the identifier
// ("StabilizeSelf").
inline std::optional<StrategyLabel> parse_strategy(std::string_view text) noexcept {
    for (std::size_t i = 0; i < kNumStrategies; ++i) {
        if (text == kStrategyDisplay[i] || text == kStrategyIdentifier[i]) return strategy_at(i);
    }
    return std::nullopt;
}

} // namespace erreg
