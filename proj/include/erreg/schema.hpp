#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace erreg {

using Json = nlohmann::ordered_json;

// Feature names the network and the generator look up by name.
namespace feature {
inline constexpr std::string_view kGender = "Gender";
inline constexpr std::string_view kMindedness = "Mindedness score";
inline constexpr std::string_view kRelationshipManagement = "Relationship management";
inline constexpr std::string_view kShameAwareness = "Shame awareness";
inline constexpr std::string_view kExperiencedEmotion = "Experienced emotion";
inline constexpr std::string_view kInternalEmotion = "Internal emotion component";
inline constexpr std::string_view kDisplayRule = "Display rule";
} // namespace feature

struct CategoricalFeature {
    std::string name;
    std::vector<std::string> domain;
    std::map<std::string, std::string> textualizations;

    std::optional<std::size_t> index_of(std::string_view value) const;
    bool contains(std::string_view value) const { return index_of(value).has_value(); }
    // Throws TemplateError when the value has no sentence.
    const std::string& textualize(const std::string& value) const;
};

// Mindedness: a real-valued score discretized into ordered levels. When
// thresholds are absent they are computed from the corpus (terciles).
struct NumericFeature {
    std::string name;
    double min = 0.0;
    double max = 100.0;
    std::optional<std::array<double, 2>> thresholds;
    std::vector<std::string> levels;
    std::map<std::string, std::string> textualizations;

    // Requires thresholds. score < t0 -> levels[0]; score < t1 -> levels[1]; else levels[2].
    const std::string& level_of(double score) const;
    CategoricalFeature as_categorical() const;
};

struct AnnotationSchema {
    std::vector<CategoricalFeature> features;               // nonverbal behavior
    std::vector<CategoricalFeature> introspection_features; // verbalized introspection
    std::vector<CategoricalFeature> personal_features;      // Gender
    NumericFeature mindedness;

    const CategoricalFeature* find_nonverbal(std::string_view name) const;
    const CategoricalFeature* find_introspection(std::string_view name) const;
    const CategoricalFeature* find_personal(std::string_view name) const;
    const CategoricalFeature& introspection(std::string_view name) const;
    const CategoricalFeature& personal(std::string_view name) const;

    // Throws ValidationError on duplicate names, domains with fewer than two
    // values, or values lacking exactly one textualization.
    void validate() const;
};

AnnotationSchema default_schema();

AnnotationSchema schema_from_json(const Json& j);
Json to_json(const AnnotationSchema& schema);
AnnotationSchema load_schema(const std::filesystem::path& path);
void save_schema(const AnnotationSchema& schema, const std::filesystem::path& path);

// Type-7 (linear interpolation) quantiles at 1/3 and 2/3.
std::array<double, 2> tercile_thresholds(std::vector<double> values);

} // namespace erreg
