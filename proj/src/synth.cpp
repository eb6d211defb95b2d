#include "erreg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include "erreg/deep_bn.hpp"
#include "erreg/error.hpp"
#include "erreg/rng.hpp"
#include "json_util.hpp"

namespace erreg {

namespace {

using S = StrategyLabel;

// Parent values of one CPT row, by parent name.
class RowView {
public:
    RowView(const BayesNet& net, std::size_t node, std::size_t row) {
        const auto& parents = net.parents(node);
        std::vector<std::size_t> digits(parents.size());
        for (std::size_t k = parents.size(); k-- > 0;) {
            const auto card = net.cardinality(parents[k]);
            digits[k] = row % card;
            row /= card;
        }
        for (std::size_t k = 0; k < parents.size(); ++k) {
            values_.emplace(net.node(parents[k]).name, net.node(parents[k]).domain[digits[k]]);
        }
    }

    const std::string& operator[](std::string_view parent) const {
        static const std::string empty;
        auto it = values_.find(std::string(parent));
        return it == values_.end() ? empty : it->second;
    }

    std::optional<StrategyLabel> strategy() const { return parse_strategy((*this)[node::kRegulation]); }

private:
    std::map<std::string, std::string> values_;
};

using RowFn = std::function<std::vector<double>(const RowView&, const std::vector<std::string>& domain)>;

void fill(BayesNet& net, std::string_view name, const RowFn& fn) {
    const auto i = net.index(name);
    const auto& domain = net.node(i).domain;
    std::vector<double> table;
    for (std::size_t r = 0; r < net.cpt(i).rows(); ++r) {
        auto w = fn(RowView(net, i, r), domain);
        double total = 0.0;
        for (double x : w) total += x;
        for (double x : w) table.push_back(x / total);
    }
    net.set_cpt(name, std::move(table));
}

std::vector<double> uniform_weights(std::size_t n) { return std::vector<double>(n, 1.0); }

// Adds `mass` to `value` if the domain has it.
void bump(std::vector<double>& w, const std::vector<std::string>& domain, std::string_view value, double mass) {
    auto it = std::find(domain.begin(), domain.end(), value);
    if (it != domain.end()) w[static_cast<std::size_t>(it - domain.begin())] += mass;
}

// Deterministic report of a parent value when the domains agree, else uniform.
std::vector<double> copy_of(const std::string& parent_value, const std::vector<std::string>& domain) {
    std::vector<double> w(domain.size(), 0.0);
    bump(w, domain, parent_value, 1.0);
    double total = 0.0;
    for (double x : w) total += x;
    return total > 0.0 ? w : uniform_weights(domain.size());
}

struct Cue {
    const char* feature;
    const char* value;
};

// Nonverbal cues per strategy and per experienced emotion.
const std::map<S, std::vector<Cue>>& strategy_cues() {
    static const std::map<S, std::vector<Cue>> cues = {
        {S::Withdrawal, {{"Speech", "silent"}, {"Utterance", "none"}, {"Gaze", "averted"}, {"Head", "frozen"},
                         {"Upper body", "collapsed"}, {"Shame display", "present"}, {"Eyes", "closed"}}},
        {S::AttackSelf, {{"Facial Expression", "disgust"}, {"Shame display", "present"}, {"Head", "shake"},
                         {"Gaze", "down"}, {"Utterance", "hesitant"}}},
        {S::AttackOther, {{"Upper body", "lean_forward"}, {"Facial Expression", "anger"}, {"Gaze", "direct"},
                          {"Speech", "speaking"}, {"Utterance", "fluent"}, {"Eyes", "squinting"}}},
        {S::Avoidance, {{"Gaze", "averted"}, {"Head", "averted"}, {"Upper body", "lean_backward"},
                        {"Facial Expression", "joy"}, {"Smile", "smile"}, {"Utterance", "filler"}}},
        {S::Depreciation, {{"Facial Expression", "contempt"}, {"Smile", "smile"}, {"Smile Control", "controlled"},
                           {"Head", "tilt"}, {"Head Tilt", "left"}, {"Eyes", "squinting"}}},
        {S::StabilizeSelf, {{"Gaze", "direct"}, {"Upper body", "upright"}, {"Head", "nod"},
                            {"Utterance", "fluent"}, {"Speech", "speaking"}, {"Shame display", "none"}}},
        {S::Rest, {{"Head", "still"}, {"Facial Expression", "neutral"}, {"Head Tilt", "none"}}},
    };
    return cues;
}

const std::map<std::string, std::vector<Cue>>& emotion_cues() {
    static const std::map<std::string, std::vector<Cue>> cues = {
        {"shame", {{"Shame display", "present"}, {"Gaze", "down"}}},
        {"distress", {{"Facial Expression", "sadness"}}},
        {"fear", {{"Facial Expression", "fear"}}},
        {"disgust", {{"Facial Expression", "disgust"}}},
        {"anger", {{"Facial Expression", "anger"}}},
        {"joy", {{"Facial Expression", "joy"}, {"Smile", "smile"}}},
        {"contempt", {{"Facial Expression", "contempt"}}},
        {"pride", {{"Upper body", "upright"}}},
        {"neutral", {{"Facial Expression", "neutral"}}},
    };
    return cues;
}

struct IntrospectionCue {
    const char* relationship;
    const char* awareness;
    const char* display_rule;
};

// Distinct per strategy, so clean reports identify the strategy.
const std::map<S, IntrospectionCue>& introspection_cues() {
    static const std::map<S, IntrospectionCue> cues = {
        {S::Withdrawal, {"withdraw", "partial", "mask"}},
        {S::AttackSelf, {"maintain", "aware", "intensify"}},
        {S::AttackOther, {"confront", "unaware", "intensify"}},
        {S::Avoidance, {"maintain", "unaware", "mask"}},
        {S::Depreciation, {"confront", "partial", "deintensify"}},
        {S::StabilizeSelf, {"repair", "aware", "neutralize"}},
        {S::Rest, {"maintain", "aware", "none"}},
    };
    return cues;
}

// Emotions a strategy turns the internal emotion into.
const std::map<S, std::vector<std::pair<const char*, double>>>& experienced_by_strategy() {
    static const std::map<S, std::vector<std::pair<const char*, double>>> m = {
        {S::Withdrawal, {{"distress", 0.4}, {"fear", 0.4}}},
        {S::AttackSelf, {{"disgust", 0.8}}},
        {S::AttackOther, {{"anger", 0.8}}},
        {S::Avoidance, {{"joy", 0.8}}},
        {S::Depreciation, {{"disgust", 0.4}, {"contempt", 0.4}}},
        {S::StabilizeSelf, {{"pride", 0.8}}},
        {S::Rest, {}},
    };
    return m;
}

std::array<double, kNumStrategies> strategy_affinity(const std::string& internal) {
    std::array<double, kNumStrategies> a;
    a.fill(1.0);
    auto boost = [&](S s, double f) { a[index_of(s)] *= f; };
    if (internal == "distress" || internal == "fear") boost(S::Withdrawal, 4.0);
    if (internal == "disgust") {
        boost(S::AttackSelf, 4.0);
        boost(S::Depreciation, 2.0);
    }
    if (internal == "anger") boost(S::AttackOther, 5.0);
    if (internal == "joy") boost(S::Avoidance, 4.0);
    if (internal == "contempt") boost(S::Depreciation, 4.0);
    if (internal == "pride") boost(S::StabilizeSelf, 3.0);
    if (internal == "neutral") boost(S::Rest, 3.0);
    return a;
}

constexpr double kStrategyCueWeight = 0.22;
constexpr double kEmotionCueWeight = 0.12;

std::vector<double> signal_row(const std::string& feature, const RowView& row,
                               const std::vector<std::string>& domain) {
    // Background: the first value is the resting state.
    std::vector<double> w(domain.size(), 0.5 / static_cast<double>(domain.size()));
    w[0] += 0.5;
    double total = 1.0;
    auto add_cues = [&](const std::vector<Cue>& cues, double weight) {
        for (const auto& c : cues) {
            if (feature == c.feature && std::find(domain.begin(), domain.end(), c.value) != domain.end()) {
                bump(w, domain, c.value, weight * total);
                total += weight * total;
            }
        }
    };
    if (auto s = row.strategy()) {
        auto it = strategy_cues().find(*s);
        if (it != strategy_cues().end()) add_cues(it->second, kStrategyCueWeight / (1.0 - kStrategyCueWeight));
    }
    auto it = emotion_cues().find(row[node::kExperiencedEmotion]);
    if (it != emotion_cues().end()) add_cues(it->second, kEmotionCueWeight / (1.0 - kEmotionCueWeight));
    return w;
}

} // namespace

BayesNet default_planted_net(const AnnotationSchema& schema) {
    BayesNet net = build_deep_bn(schema);

    fill(net, node::kGender, [](const RowView&, const auto& d) { return uniform_weights(d.size()); });
    fill(net, node::kMindedness, [](const RowView&, const auto& d) { return uniform_weights(d.size()); });
    fill(net, node::kSituation, [](const RowView&, const auto& d) { return uniform_weights(d.size()); });

    fill(net, node::kInternalEmotion, [](const RowView& row, const auto& d) {
        std::vector<double> w(d.size(), 0.05);
        bump(w, d, "shame", 0.35);
        bump(w, d, "distress", 0.07);
        bump(w, d, "fear", 0.05);
        bump(w, d, "disgust", 0.03);
        bump(w, d, "anger", 0.04);
        bump(w, d, "contempt", 0.01);
        if (row[node::kSituation] == "StandOutRemark") {
            bump(w, d, "anger", 0.04);
            bump(w, d, "contempt", 0.04);
        } else {
            bump(w, d, "shame", 0.04);
            bump(w, d, "disgust", 0.03);
        }
        if (row[node::kMindedness] == "high") bump(w, d, "shame", 0.05);
        if (row[node::kMindedness] == "low") bump(w, d, "joy", 0.03);
        if (row[node::kGender] == "female") bump(w, d, "distress", 0.02);
        return w;
    });

    fill(net, node::kRegulation, [](const RowView& row, const auto& d) {
        auto affinity = strategy_affinity(row[node::kInternalEmotion]);
        std::vector<double> w(d.size());
        for (std::size_t i = 0; i < d.size(); ++i) {
            w[i] = static_cast<double>(kPaperHistogram[i]) * affinity[i];
        }
        auto scale = [&](S s, double f) { w[index_of(s)] *= f; };
        if (row[node::kMindedness] == "high") scale(S::StabilizeSelf, 1.3);
        if (row[node::kMindedness] == "low") scale(S::Avoidance, 1.3);
        if (row[node::kSituation] == "StandOutRemark") {
            scale(S::AttackOther, 1.3);
            scale(S::Depreciation, 1.2);
        } else {
            scale(S::Withdrawal, 1.2);
            scale(S::AttackSelf, 1.2);
        }
        return w;
    });

    fill(net, node::kExperiencedEmotion, [](const RowView& row, const auto& d) {
        std::vector<double> w(d.size(), 0.1 / static_cast<double>(d.size()));
        const auto s = row.strategy();
        const auto& typical = experienced_by_strategy().at(s.value_or(S::Rest));
        double used = 0.0;
        for (const auto& [emotion, p] : typical) {
            bump(w, d, emotion, p);
            used += p;
        }
        // Without regulation, or for the remainder, the internal emotion is felt as is.
        bump(w, d, row[node::kInternalEmotion], used > 0.0 ? 0.1 : 0.9);
        return w;
    });

    for (const auto& f : schema.features) {
        const auto name = f.name;
        fill(net, signal_node_name(f.name),
             [name](const RowView& row, const auto& d) { return signal_row(name, row, d); });
    }

    fill(net, node::kInternalEmotionReport,
         [](const RowView& row, const auto& d) { return copy_of(row[node::kInternalEmotion], d); });
    fill(net, node::kExperiencedEmotionReport,
         [](const RowView& row, const auto& d) { return copy_of(row[node::kExperiencedEmotion], d); });
    auto report = [](const char* IntrospectionCue::*member) {
        return [member](const RowView& row, const std::vector<std::string>& d) {
            const auto s = row.strategy();
            if (!s) return uniform_weights(d.size());
            return copy_of(introspection_cues().at(*s).*member, d);
        };
    };
    fill(net, node::kRelationshipManagement, report(&IntrospectionCue::relationship));
    fill(net, node::kShameAwareness, report(&IntrospectionCue::awareness));
    fill(net, node::kDisplayRule, report(&IntrospectionCue::display_rule));
    return net;
}

UtteranceBank default_utterance_bank() {
    using Sit = SituationId;
    UtteranceBank b;
    b[{S::Withdrawal, Sit::OutfitRemark}] = {
        "Oh. Um... I don't know.",
        "I... I'd rather not talk about that.",
        "Okay. Can we just move on?",
        "Hm. I don't really have anything to say to that.",
    };
    b[{S::Withdrawal, Sit::StandOutRemark}] = {
        "Oh. Okay... I don't know what to say.",
        "Hm. Fine. Maybe I should just go.",
        "I... okay.",
        "I guess there's no point in me continuing then.",
    };
    b[{S::AttackSelf, Sit::OutfitRemark}] = {
        "Yes, you're right, I really have no sense of style.",
        "I know, I always look ridiculous in clothes like this.",
        "Honestly, I should have known better than to wear this.",
        "It's my own fault, I never manage to dress properly.",
    };
    b[{S::AttackSelf, Sit::StandOutRemark}] = {
        "You're right, I'm really not a remarkable candidate.",
        "I know, I never manage to make an impression.",
        "Yes, I'm probably the most boring applicant you've had today.",
        "I should have prepared much better, that's on me.",
    };
    b[{S::AttackOther, Sit::OutfitRemark}] = {
        "Excuse me? I don't think my clothes are any of your business.",
        "That's a pretty inappropriate thing to say in an interview.",
        "Well, your tie isn't exactly great either.",
        "Do you comment on every applicant's appearance like this?",
    };
    b[{S::AttackOther, Sit::StandOutRemark}] = {
        "Maybe you just weren't listening properly.",
        "That says more about your questions than about my answers.",
        "I don't think you're in a position to judge that after five minutes.",
        "Frankly, that's an unprofessional way to run an interview.",
    };
    b[{S::Avoidance, Sit::OutfitRemark}] = {
        "Haha, well, fashion was never my strong suit, haha!",
        "Oh, this old thing? It was on sale, haha.",
        "Ha, good thing this isn't a fashion show then!",
        "Haha, my friends say the same. Anyway, shall we start?",
    };
    b[{S::Avoidance, Sit::StandOutRemark}] = {
        "Haha, well, great minds think alike, I suppose!",
        "Oh, really? Funny, haha. Anyway, what's the next question?",
        "Ha, then at least I'm in good company!",
        "Haha, okay, well, I'm sure it'll work out somehow.",
    };
    b[{S::Depreciation, Sit::OutfitRemark}] = {
        "Well, I prefer comfort over following silly trends.",
        "I don't really care about superficial things like that.",
        "Some people value appearance more than substance, I suppose.",
        "Clothes are hardly what matters for this job, are they?",
    };
    b[{S::Depreciation, Sit::StandOutRemark}] = {
        "Well, I doubt the other applicants really meant what they said.",
        "If everyone says the same, maybe the question isn't very good.",
        "I don't put much value on standing out for its own sake.",
        "I suppose that kind of judgement is typical for this company.",
    };
    b[{S::StabilizeSelf, Sit::OutfitRemark}] = {
        "I understand it may not be to your taste, but I feel comfortable in it.",
        "That's fair, I chose it because it feels right for me.",
        "Thank you for the feedback, I'm happy with my choice though.",
        "I see your point, but I'm confident in how I present myself.",
    };
    b[{S::StabilizeSelf, Sit::StandOutRemark}] = {
        "I understand. Let me explain what sets my experience apart.",
        "That's fair feedback. I still believe my background fits this role well.",
        "I see. I'm confident that my skills will show over time.",
        "Okay, then let me give you a concrete example of my work.",
    };
    b[{S::Rest, Sit::OutfitRemark}] = {
        "I got it at a store downtown.",
        "It's from a shop near my place.",
        "I bought it last year.",
        "Okay, so about the position...",
    };
    b[{S::Rest, Sit::StandOutRemark}] = {
        "Okay, I see.",
        "Alright. What would you like to know next?",
        "I have worked in this field for three years.",
        "Yes, I studied business administration.",
    };
    return b;
}

void GenConfig::validate() const {
    schema.validate();
    if (n_participants < 1) throw ValidationError("n_participants must be at least 1");
    for (double f : {fidelity.introspection, fidelity.nonverbal, fidelity.verbal}) {
        if (!(f >= 0.0 && f <= 1.0)) throw ValidationError("channel fidelities must lie in [0, 1]");
    }
    if (!(mean_segment_length >= 1.0)) throw ValidationError("mean_segment_length must be at least 1");
    for (auto s : kAllStrategies) {
        for (auto sit : kAllSituations) {
            auto it = utterance_bank.find({s, sit});
            if (it == utterance_bank.end() || it->second.empty()) {
                throw ValidationError("utterance bank has no sentence for " + std::string(identifier(s)) + " in " +
                                      std::string(situation_name(sit)));
            }
        }
    }
    const long sessions = 2L * n_participants;
    if (!frames_per_session && !target_histogram) {
        throw ValidationError("set frames_per_session or target_histogram");
    }
    if (frames_per_session && *frames_per_session < 1) throw ValidationError("frames_per_session must be positive");
    if (target_histogram) {
        long total = 0;
        for (auto c : *target_histogram) total += static_cast<long>(c);
        if (total < sessions) {
            throw ValidationError("target histogram has fewer frames than sessions");
        }
        if (frames_per_session && total > *frames_per_session * sessions) {
            throw ValidationError("infeasible target histogram: " + std::to_string(total) + " frames requested but only " +
                                  std::to_string(*frames_per_session * sessions) + " fit into " +
                                  std::to_string(sessions) + " sessions");
        }
    }
    if (planted_net) {
        const auto reference = build_deep_bn(schema);
        std::set<std::string> want, have;
        for (const auto& n : reference.nodes()) want.insert(n.name);
        for (const auto& n : planted_net->nodes()) have.insert(n.name);
        if (want != have) throw ValidationError("planted net does not carry the DEEP node set");
    }
}

namespace {

struct Run {
    StrategyLabel label;
    std::size_t length;
};

class Generator {
public:
    explicit Generator(const GenConfig& config)
        : cfg_(config), net_(config.planted_net ? *config.planted_net : default_planted_net(config.schema)),
          rng_(config.seed) {
        net_.validate();
        check_regulation_node(net_);
        regulation_ = net_.index(node::kRegulation);
        internal_ = net_.index(node::kInternalEmotion);
    }

    Corpus run() {
        Corpus corpus;
        corpus.schema = cfg_.schema;
        make_participants(corpus.schema);
        const auto session_runs = plan_runs();
        std::size_t k = 0;
        for (std::size_t p = 0; p < participants_.size(); ++p) {
            for (auto sit : kAllSituations) corpus.sessions.push_back(make_session(p, sit, session_runs[k++]));
        }
        finalize_corpus(corpus);
        return corpus;
    }

private:
    struct Participant {
        std::string id;
        std::string gender;
        double score;
        std::string level;
    };

    void make_participants(AnnotationSchema& schema) {
        const auto width = std::to_string(cfg_.n_participants).size() < 2 ? 2 : std::to_string(cfg_.n_participants).size();
        const auto& gender_node = net_.node(net_.index(node::kGender));
        const auto gender_cpt = net_.cpt(node::kGender).row(0);
        for (int i = 0; i < cfg_.n_participants; ++i) {
            Participant p;
            auto num = std::to_string(i + 1);
            p.id = "P" + std::string(width - num.size(), '0') + num;
            p.gender = gender_node.domain[rng_.categorical(gender_cpt)];
            const double raw = schema.mindedness.min + rng_.uniform() * (schema.mindedness.max - schema.mindedness.min);
            p.score = std::round(raw * 10.0) / 10.0;
            participants_.push_back(std::move(p));
        }
        if (!schema.mindedness.thresholds) {
            std::vector<double> scores;
            for (const auto& p : participants_) scores.push_back(p.score);
            schema.mindedness.thresholds = tercile_thresholds(scores);
        }
        for (auto& p : participants_) p.level = schema.mindedness.level_of(p.score);
    }

    // Runs per session, in session order (participant-major, situation-minor).
    std::vector<std::vector<Run>> plan_runs() {
        const std::size_t n_sessions = participants_.size() * kAllSituations.size();
        std::vector<std::vector<Run>> out(n_sessions);
        if (!cfg_.target_histogram) {
            // Labels drawn ancestrally later; lengths only.
            for (auto& runs : out) {
                std::size_t left = static_cast<std::size_t>(*cfg_.frames_per_session);
                while (left > 0) {
                    const auto len = std::min(left, rng_.geometric(cfg_.mean_segment_length));
                    runs.push_back({StrategyLabel::Rest, len});
                    left -= len;
                }
            }
            stratified_ = false;
            return out;
        }
        stratified_ = true;
        std::vector<Run> pool;
        std::size_t total = 0;
        for (std::size_t c = 0; c < kNumStrategies; ++c) {
            std::size_t left = (*cfg_.target_histogram)[c];
            total += left;
            while (left > 0) {
                const auto len = std::min(left, rng_.geometric(cfg_.mean_segment_length));
                pool.push_back({strategy_at(c), len});
                left -= len;
            }
        }
        rng_.shuffle(pool.begin(), pool.end());
        // Even split of the total; the first sessions take the remainder.
        std::vector<std::size_t> capacity(n_sessions, total / n_sessions);
        for (std::size_t i = 0; i < total % n_sessions; ++i) ++capacity[i];
        std::size_t s = 0;
        for (auto run : pool) {
            while (run.length > 0) {
                while (capacity[s] == 0) ++s;
                const auto take = std::min(run.length, capacity[s]);
                out[s].push_back({run.label, take});
                capacity[s] -= take;
                run.length -= take;
            }
        }
        return out;
    }

    std::vector<double> internal_posterior(const std::vector<int>& context, std::size_t label) {
        const auto key = std::make_tuple(context[net_.index(node::kGender)], context[net_.index(node::kMindedness)],
                                         context[net_.index(node::kSituation)], label);
        auto it = posterior_cache_.find(key);
        if (it != posterior_cache_.end()) return it->second;
        auto ev = context;
        ev[regulation_] = static_cast<int>(label);
        auto post = eliminate(net_, ev, internal_);
        posterior_cache_.emplace(key, post);
        return post;
    }

    void sample_node(std::vector<int>& a, std::size_t i) {
        std::vector<std::size_t> pv;
        for (auto p : net_.parents(i)) pv.push_back(static_cast<std::size_t>(a[p]));
        a[i] = static_cast<int>(rng_.categorical(net_.cpt(i).row(net_.cpt(i).config_index(pv))));
    }

    std::string noisy(const std::vector<std::string>& domain, int value, double fidelity) {
        if (rng_.uniform() < fidelity) return domain[static_cast<std::size_t>(value)];
        return domain[rng_.below(domain.size())];
    }

    Session make_session(std::size_t p, SituationId situation, const std::vector<Run>& runs) {
        const auto& part = participants_[p];
        Session s;
        s.participant_id = part.id;
        s.situation = situation;
        s.personal.gender = part.gender;
        s.personal.mindedness_score = part.score;

        std::vector<int> context(net_.size(), -1);
        auto set_ctx = [&](std::string_view name, const std::string& value) {
            const auto i = net_.index(name);
            const auto& d = net_.node(i).domain;
            auto it = std::find(d.begin(), d.end(), value);
            if (it == d.end()) throw ValidationError("planted net lacks value '" + value + "' for " + std::string(name));
            context[i] = static_cast<int>(it - d.begin());
        };
        set_ctx(node::kGender, part.gender);
        set_ctx(node::kMindedness, part.level);
        set_ctx(node::kSituation, std::string(situation_name(situation)));

        const auto& topo = net_.topological_order();
        int frame_index = 0;
        for (const auto& run : runs) {
            // Segment-level state: everything except nonverbal signals.
            std::vector<int> seg = context;
            if (stratified_) {
                seg[regulation_] = static_cast<int>(index_of(run.label));
                seg[internal_] = static_cast<int>(rng_.categorical(internal_posterior(context, index_of(run.label))));
            }
            for (auto i : topo) {
                if (seg[i] >= 0 || net_.node(i).node_class == NodeClass::ObservedSignal) continue;
                sample_node(seg, i);
            }
            const auto label = strategy_at(static_cast<std::size_t>(seg[regulation_]));
            const int start = frame_index;
            for (std::size_t k = 0; k < run.length; ++k) {
                std::vector<int> a = seg;
                Frame f;
                f.participant_id = s.participant_id;
                f.situation = situation;
                f.frame_index = frame_index++;
                f.label = label;
                FeatureMap introspection;
                for (auto i : topo) {
                    const auto& n = net_.node(i);
                    if (n.node_class == NodeClass::ObservedSignal) {
                        sample_node(a, i);
                        f.nonverbal[n.source.substr(10)] = noisy(n.domain, a[i], cfg_.fidelity.nonverbal);
                    } else if (n.node_class == NodeClass::ObservedIntrospection) {
                        introspection[n.source.substr(14)] = noisy(n.domain, a[i], cfg_.fidelity.introspection);
                    }
                }
                f.introspection = std::move(introspection);
                s.frames.push_back(std::move(f));
            }
            add_utterance(s, label, situation, start, frame_index - 1);
        }
        return s;
    }

    void add_utterance(Session& s, StrategyLabel label, SituationId situation, int first, int last) {
        const double speak = label == StrategyLabel::Withdrawal ? 0.3 : 0.85;
        if (rng_.uniform() >= speak) return;
        StrategyLabel source = label;
        if (rng_.uniform() >= cfg_.fidelity.verbal) source = strategy_at(rng_.below(kNumStrategies));
        const auto& options = cfg_.utterance_bank.at({source, situation});
        Utterance u;
        u.speaker = Speaker::Interviewee;
        u.text = options[rng_.below(options.size())];
        // Leave a silent frame at both ends of longer runs.
        u.start_frame = last - first >= 2 ? first + 1 : first;
        u.end_frame = last - first >= 2 ? last - 1 : last;
        s.transcript.push_back(std::move(u));
    }

    const GenConfig& cfg_;
    BayesNet net_;
    Rng rng_;
    std::size_t regulation_ = 0;
    std::size_t internal_ = 0;
    bool stratified_ = false;
    std::vector<Participant> participants_;
    std::map<std::tuple<int, int, int, std::size_t>, std::vector<double>> posterior_cache_;
};

} // namespace

Corpus generate_corpus(const GenConfig& config) {
    config.validate();
    return Generator(config).run();
}

Corpus split_introspection(const Corpus& corpus) {
    Corpus out = corpus;
    for (auto& s : out.sessions) {
        for (auto& f : s.frames) f.introspection.reset();
    }
    return out;
}

Json to_json(const UtteranceBank& bank) {
    Json j = Json::object();
    for (const auto& [key, sentences] : bank) {
        j[std::string(identifier(key.first))][std::string(situation_name(key.second))] = sentences;
    }
    return j;
}

UtteranceBank utterance_bank_from_json(const Json& j) {
    if (!j.is_object()) throw ParseError("utterance_bank", 0, "expected an object keyed by strategy");
    UtteranceBank bank;
    for (auto it = j.begin(); it != j.end(); ++it) {
        auto label = parse_strategy(it.key());
        if (!label) throw ParseError("utterance_bank", 0, "unknown strategy '" + it.key() + "'");
        for (auto jt = it.value().begin(); jt != it.value().end(); ++jt) {
            auto sit = parse_situation(jt.key());
            if (!sit) throw ParseError("utterance_bank", 0, "unknown situation '" + jt.key() + "'");
            bank[{*label, *sit}] = jt.value().get<std::vector<std::string>>();
        }
    }
    return bank;
}

GenConfig gen_config_from_json(const Json& j, const std::filesystem::path& base_dir) {
    using detail::required;
    GenConfig c;
    auto resolve = [&](const std::string& p) {
        std::filesystem::path path(p);
        return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
    };
    if (j.contains("schema") && !j.at("schema").is_null()) {
        const auto& js = j.at("schema");
        c.schema = js.is_string() ? load_schema(resolve(js.get<std::string>())) : schema_from_json(js);
    }
    if (j.contains("seed")) c.seed = required<std::uint64_t>(j, "seed", "gen config");
    if (j.contains("n_participants")) c.n_participants = required<int>(j, "n_participants", "gen config");
    if (j.contains("frames_per_session") && !j.at("frames_per_session").is_null()) {
        c.frames_per_session = required<int>(j, "frames_per_session", "gen config");
    }
    if (j.contains("target_histogram") && !j.at("target_histogram").is_null()) {
        const auto& h = j.at("target_histogram");
        if (h.is_string() && h.get<std::string>() == "paper") {
            c.target_histogram = kPaperHistogram;
        } else if (h.is_object()) {
            ClassHistogram hist{};
            for (auto it = h.begin(); it != h.end(); ++it) {
                auto label = parse_strategy(it.key());
                if (!label) throw ParseError("gen config", 0, "unknown strategy '" + it.key() + "'");
                hist[index_of(*label)] = it.value().get<std::size_t>();
            }
            c.target_histogram = hist;
        } else {
            throw ParseError("gen config", 0, "target_histogram must be \"paper\" or an object of counts");
        }
    }
    if (j.contains("mean_segment_length")) {
        c.mean_segment_length = required<double>(j, "mean_segment_length", "gen config");
    }
    if (j.contains("fidelity")) {
        const auto& f = j.at("fidelity");
        if (f.contains("introspection")) c.fidelity.introspection = required<double>(f, "introspection", "fidelity");
        if (f.contains("nonverbal")) c.fidelity.nonverbal = required<double>(f, "nonverbal", "fidelity");
        if (f.contains("verbal")) c.fidelity.verbal = required<double>(f, "verbal", "fidelity");
    }
    if (j.contains("planted_net") && !j.at("planted_net").is_null()) {
        const auto& pn = j.at("planted_net");
        if (pn.is_string() && pn.get<std::string>() != "default") {
            c.planted_net = load_net(resolve(pn.get<std::string>()));
        } else if (pn.is_object()) {
            c.planted_net = net_from_json(pn);
        }
    }
    if (j.contains("utterance_bank") && !j.at("utterance_bank").is_null()) {
        const auto& ub = j.at("utterance_bank");
        c.utterance_bank = utterance_bank_from_json(ub.is_string() ? detail::load_json_file(resolve(ub.get<std::string>())) : ub);
    }
    return c;
}

GenConfig load_gen_config(const std::filesystem::path& path) {
    const Json j = detail::load_json_file(path);
    try {
        return gen_config_from_json(j, path.parent_path());
    } catch (const ParseError& e) {
        throw ParseError(path.string(), 0, e.what());
    }
}

} // namespace erreg
