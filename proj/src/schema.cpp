#include "erreg/schema.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "erreg/error.hpp"
#include "json_util.hpp"

namespace erreg {

std::optional<std::size_t> CategoricalFeature::index_of(std::string_view value) const {
    auto it = std::find(domain.begin(), domain.end(), value);
    if (it == domain.end()) return std::nullopt;
    return static_cast<std::size_t>(it - domain.begin());
}

const std::string& CategoricalFeature::textualize(const std::string& value) const {
    auto it = textualizations.find(value);
    if (it == textualizations.end()) {
        throw TemplateError("feature '" + name + "' has no textualization for value '" + value + "'");
    }
    return it->second;
}

const std::string& NumericFeature::level_of(double score) const {
    if (!thresholds) throw ValidationError("feature '" + name + "' has no discretization thresholds");
    const auto& t = *thresholds;
    if (score < t[0]) return levels[0];
    if (score < t[1]) return levels[1];
    return levels[2];
}

CategoricalFeature NumericFeature::as_categorical() const {
    return CategoricalFeature{name, levels, textualizations};
}

namespace {

const CategoricalFeature* find_in(const std::vector<CategoricalFeature>& v, std::string_view name) {
    for (const auto& f : v) {
        if (f.name == name) return &f;
    }
    return nullptr;
}

void validate_feature(const CategoricalFeature& f) {
    if (f.name.empty()) throw ValidationError("feature with empty name");
    if (f.domain.size() < 2) {
        throw ValidationError("feature '" + f.name + "' needs at least two values");
    }
    std::set<std::string> seen;
    for (const auto& v : f.domain) {
        if (!seen.insert(v).second) {
            throw ValidationError("feature '" + f.name + "' repeats value '" + v + "'");
        }
        if (!f.textualizations.count(v)) {
            throw ValidationError("feature '" + f.name + "' value '" + v + "' has no textualization");
        }
    }
    for (const auto& [v, _] : f.textualizations) {
        if (!seen.count(v)) {
            throw ValidationError("feature '" + f.name + "' textualizes unknown value '" + v + "'");
        }
    }
}

CategoricalFeature make_feature(std::string name,
                                std::vector<std::pair<std::string, std::string>> values) {
    CategoricalFeature f;
    f.name = std::move(name);
    for (auto& [value, sentence] : values) {
        f.domain.push_back(value);
        f.textualizations.emplace(std::move(value), std::move(sentence));
    }
    return f;
}

CategoricalFeature emotion_feature(std::string name, const std::string& pattern) {
    static const std::vector<std::pair<std::string, std::string>> emotions = {
        {"shame", "shame"},     {"distress", "distress"}, {"fear", "fear"},
        {"disgust", "disgust"}, {"anger", "anger"},       {"joy", "joy"},
        {"contempt", "contempt"}, {"pride", "pride"},     {"neutral", "no particular emotion"},
    };
    std::vector<std::pair<std::string, std::string>> values;
    for (const auto& [value, word] : emotions) {
        std::string s = pattern;
        s.replace(s.find("{}"), 2, word);
        values.emplace_back(value, s);
    }
    return make_feature(std::move(name), std::move(values));
}

Json feature_json(const CategoricalFeature& f) {
    Json j;
    j["name"] = f.name;
    j["values"] = f.domain;
    Json t = Json::object();
    for (const auto& v : f.domain) {
        auto it = f.textualizations.find(v);
        if (it != f.textualizations.end()) t[v] = it->second;
    }
    j["textualizations"] = t;
    return j;
}

CategoricalFeature feature_from_json(const Json& j, const std::string& where) {
    CategoricalFeature f;
    f.name = detail::required<std::string>(j, "name", where);
    f.domain = detail::required<std::vector<std::string>>(j, "values", where + "/" + f.name);
    f.textualizations =
        detail::required<std::map<std::string, std::string>>(j, "textualizations", where + "/" + f.name);
    return f;
}

std::vector<CategoricalFeature> features_from_json(const Json& j, const char* key) {
    std::vector<CategoricalFeature> out;
    const auto arr = detail::required<Json>(j, key, "schema");
    if (!arr.is_array()) throw ParseError("schema", 0, std::string("'") + key + "' must be an array");
    for (const auto& f : arr) out.push_back(feature_from_json(f, std::string("schema/") + key));
    return out;
}

} // namespace

const CategoricalFeature* AnnotationSchema::find_nonverbal(std::string_view name) const {
    return find_in(features, name);
}

const CategoricalFeature* AnnotationSchema::find_introspection(std::string_view name) const {
    return find_in(introspection_features, name);
}

const CategoricalFeature* AnnotationSchema::find_personal(std::string_view name) const {
    return find_in(personal_features, name);
}

const CategoricalFeature& AnnotationSchema::introspection(std::string_view name) const {
    const auto* f = find_introspection(name);
    if (!f) throw ValidationError("schema lacks introspection feature '" + std::string(name) + "'");
    return *f;
}

const CategoricalFeature& AnnotationSchema::personal(std::string_view name) const {
    const auto* f = find_personal(name);
    if (!f) throw ValidationError("schema lacks personal feature '" + std::string(name) + "'");
    return *f;
}

void AnnotationSchema::validate() const {
    std::set<std::string> names;
    auto check_group = [&](const std::vector<CategoricalFeature>& group) {
        for (const auto& f : group) {
            validate_feature(f);
            if (!names.insert(f.name).second) {
                throw ValidationError("duplicate feature name '" + f.name + "'");
            }
        }
    };
    check_group(features);
    check_group(introspection_features);
    check_group(personal_features);

    if (!names.insert(mindedness.name).second) {
        throw ValidationError("duplicate feature name '" + mindedness.name + "'");
    }
    if (!(mindedness.min < mindedness.max)) {
        throw ValidationError("feature '" + mindedness.name + "' needs min < max");
    }
    if (mindedness.levels.size() != 3) {
        throw ValidationError("feature '" + mindedness.name + "' needs exactly three levels");
    }
    validate_feature(mindedness.as_categorical());
    if (mindedness.thresholds && (*mindedness.thresholds)[0] > (*mindedness.thresholds)[1]) {
        throw ValidationError("feature '" + mindedness.name + "' thresholds must be ordered");
    }

    for (auto name : {feature::kRelationshipManagement, feature::kShameAwareness,
                      feature::kExperiencedEmotion, feature::kInternalEmotion, feature::kDisplayRule}) {
        introspection(name);
    }
    personal(feature::kGender);
}

std::array<double, 2> tercile_thresholds(std::vector<double> values) {
    if (values.empty()) throw ValidationError("cannot compute terciles of an empty sample");
    std::sort(values.begin(), values.end());
    auto quantile = [&](double p) {
        const double h = (static_cast<double>(values.size()) - 1.0) * p;
        const auto lo = static_cast<std::size_t>(std::floor(h));
        const auto hi = std::min(lo + 1, values.size() - 1);
        return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
    };
    return {quantile(1.0 / 3.0), quantile(2.0 / 3.0)};
}

AnnotationSchema default_schema() {
    AnnotationSchema s;
    s.features = {
        make_feature("Speech", {{"speaking", "The interviewee is speaking."},
                                {"silent", "The interviewee is silent."}}),
        make_feature("Utterance", {{"fluent", "The interviewee speaks fluently."},
                                   {"hesitant", "The interviewee speaks hesitantly."},
                                   {"filler", "The interviewee uses filler sounds such as \"uhm\"."},
                                   {"none", "The interviewee produces no utterance."}}),
        make_feature("Facial Expression",
                     {{"neutral", "The interviewee shows a neutral facial expression."},
                      {"anger", "The interviewee's face expresses anger."},
                      {"disgust", "The interviewee's face expresses disgust."},
                      {"contempt", "The interviewee's face expresses contempt."},
                      {"joy", "The interviewee's face expresses joy."},
                      {"surprise", "The interviewee's face expresses surprise."},
                      {"fear", "The interviewee's face expresses fear."},
                      {"sadness", "The interviewee's face expresses sadness."}}),
        make_feature("Gaze", {{"direct", "The interviewee looks directly at the interviewer."},
                              {"averted", "The interviewee averts their gaze."},
                              {"down", "The interviewee looks down."}}),
        make_feature("Eyes", {{"open", "The interviewee's eyes are open."},
                              {"closed", "The interviewee closes their eyes."},
                              {"squinting", "The interviewee squints."}}),
        make_feature("Smile", {{"none", "The interviewee does not smile."},
                               {"smile", "The interviewee smiles."}}),
        make_feature("Smile Control", {{"none", "The interviewee does not hold back a smile."},
                                       {"controlled", "The interviewee tries to suppress a smile."}}),
        make_feature("Head", {{"still", "The interviewee holds their head still."},
                              {"tilt", "The interviewee tilts their head to the side."},
                              {"shake", "The interviewee shakes their head."},
                              {"nod", "The interviewee nods."},
                              {"averted", "The interviewee turns their head away."},
                              {"frozen", "The interviewee's head freezes in place."}}),
        make_feature("Head Tilt", {{"none", "The interviewee's head is not tilted."},
                                   {"left", "The interviewee's head is tilted to the left."},
                                   {"right", "The interviewee's head is tilted to the right."}}),
        make_feature("Upper body", {{"upright", "The interviewee sits upright."},
                                    {"lean_forward", "The interviewee leans forward."},
                                    {"lean_backward", "The interviewee leans backward."},
                                    {"collapsed", "The interviewee's upper body slumps."}}),
        make_feature("Shame display", {{"none", "The interviewee shows no visible sign of shame."},
                                       {"present", "The interviewee visibly displays shame."}}),
    };

    s.introspection_features = {
        make_feature(std::string(feature::kRelationshipManagement),
                     {{"maintain", "Looking back, the interviewee wanted to keep the relationship with the interviewer as it was."},
                      {"withdraw", "Looking back, the interviewee wanted to distance themselves from the interviewer."},
                      {"confront", "Looking back, the interviewee wanted to confront the interviewer."},
                      {"repair", "Looking back, the interviewee tried to repair the relationship with the interviewer."}}),
        make_feature(std::string(feature::kShameAwareness),
                     {{"aware", "The interviewee was aware of feeling shame."},
                      {"partial", "The interviewee was only partly aware of feeling shame."},
                      {"unaware", "The interviewee was not aware of feeling shame."}}),
        emotion_feature(std::string(feature::kExperiencedEmotion),
                        "The interviewee reported consciously experiencing {}."),
        emotion_feature(std::string(feature::kInternalEmotion),
                        "The interviewee's internal emotion was reconstructed as {}."),
        make_feature(std::string(feature::kDisplayRule),
                     {{"mask", "The interviewee reported covering their emotion with a different expression."},
                      {"neutralize", "The interviewee reported keeping a neutral face."},
                      {"intensify", "The interviewee reported exaggerating the emotion they showed."},
                      {"deintensify", "The interviewee reported toning down the emotion they showed."},
                      {"none", "The interviewee reported no deliberate control over their emotional display."}}),
    };

    s.personal_features = {
        make_feature(std::string(feature::kGender), {{"female", "The interviewee is a woman."},
                                                     {"male", "The interviewee is a man."}}),
    };

    s.mindedness.name = std::string(feature::kMindedness);
    s.mindedness.min = 0.0;
    s.mindedness.max = 100.0;
    s.mindedness.levels = {"low", "medium", "high"};
    s.mindedness.textualizations = {
        {"low", "The interviewee has a low psychological mindedness score."},
        {"medium", "The interviewee has a medium psychological mindedness score."},
        {"high", "The interviewee has a high psychological mindedness score."},
    };
    return s;
}

Json to_json(const AnnotationSchema& schema) {
    Json j;
    auto group = [](const std::vector<CategoricalFeature>& v) {
        Json a = Json::array();
        for (const auto& f : v) a.push_back(feature_json(f));
        return a;
    };
    j["features"] = group(schema.features);
    j["introspection_features"] = group(schema.introspection_features);
    j["personal_features"] = group(schema.personal_features);
    Json m = feature_json(schema.mindedness.as_categorical());
    Json numeric;
    numeric["name"] = schema.mindedness.name;
    numeric["min"] = schema.mindedness.min;
    numeric["max"] = schema.mindedness.max;
    if (schema.mindedness.thresholds) {
        numeric["thresholds"] = *schema.mindedness.thresholds;
    } else {
        numeric["thresholds"] = nullptr;
    }
    numeric["levels"] = m["values"];
    numeric["textualizations"] = m["textualizations"];
    j["mindedness"] = numeric;
    return j;
}

AnnotationSchema schema_from_json(const Json& j) {
    AnnotationSchema s;
    s.features = features_from_json(j, "features");
    s.introspection_features = features_from_json(j, "introspection_features");
    s.personal_features = features_from_json(j, "personal_features");
    const auto m = detail::required<Json>(j, "mindedness", "schema");
    s.mindedness.name = detail::required<std::string>(m, "name", "schema/mindedness");
    s.mindedness.min = detail::required<double>(m, "min", "schema/mindedness");
    s.mindedness.max = detail::required<double>(m, "max", "schema/mindedness");
    if (m.contains("thresholds") && !m.at("thresholds").is_null()) {
        s.mindedness.thresholds = detail::required<std::array<double, 2>>(m, "thresholds", "schema/mindedness");
    }
    s.mindedness.levels = detail::required<std::vector<std::string>>(m, "levels", "schema/mindedness");
    s.mindedness.textualizations =
        detail::required<std::map<std::string, std::string>>(m, "textualizations", "schema/mindedness");
    s.validate();
    return s;
}

AnnotationSchema load_schema(const std::filesystem::path& path) {
    const Json j = detail::load_json_file(path);
    try {
        return schema_from_json(j);
    } catch (const ParseError& e) {
        throw ParseError(path.string(), 0, e.what());
    }
}

void save_schema(const AnnotationSchema& schema, const std::filesystem::path& path) {
    detail::write_file(path, to_json(schema).dump(2) + "\n");
}

} // namespace erreg
