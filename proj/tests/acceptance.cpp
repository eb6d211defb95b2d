// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
// Usage: acceptance [path/to/erreg] [source-dir]

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "erreg/corpus.hpp"
#include "erreg/deep_bn.hpp"
#include "erreg/eval.hpp"
#include "erreg/metrics.hpp"
#include "erreg/prompt.hpp"
#include "erreg/synth.hpp"
#include "json_util.hpp"
#include "oracle/enumeration.hpp"
#include "sentinels.hpp"

using namespace erreg;
namespace fs = std::filesystem;

namespace {

// Tolerances and thresholds.
constexpr double kInferenceTol = 1e-10;
constexpr double kInferenceSeconds = 60.0;
constexpr double kExactTol = 1e-15;
constexpr double kMajorityTol = 1e-12;
constexpr double kWithIntrospectionMin = 0.85;
constexpr double kWithoutIntrospectionMax = 0.55;
constexpr double kGapMin = 0.30;
constexpr double kShapeSeconds = 600.0;

std::string g_cli = ERREG_CLI;
fs::path g_src = ERREG_SOURCE_DIR;
fs::path g_work;

struct Outcome {
    bool pass;
    std::string detail;
};

int cli(const std::string& args, const fs::path& out = {}) {
    std::string cmd = g_cli + " " + args;
    cmd += " >" + (out.empty() ? std::string("/dev/null") : out.string()) + " 2>>" + (g_work / "cli.log").string();
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

void require_cli(const std::string& args, const fs::path& out = {}) {
    if (const int rc = cli(args, out); rc != 0) throw std::runtime_error("erreg " + args + " exited with " + std::to_string(rc));
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

// Shared corpus and report for the evaluation-driven criteria.
struct Evaluated {
    fs::path corpus_path;
    Corpus corpus;
    Json report;
    std::string markdown;
    double seconds = 0;
};

const Evaluated& evaluated() {
    static const Evaluated e = [] {
        Evaluated e;
        const auto t0 = std::chrono::steady_clock::now();
        e.corpus_path = g_work / "acceptance.jsonl";
        require_cli("gen-synthetic --config " + q(g_src / "data/gen_acceptance.json") + " -o " + q(e.corpus_path));
        const auto md = g_work / "acceptance.md", rj = g_work / "acceptance.report.json";
        require_cli("eval-loso --corpus " + q(e.corpus_path) + " --backend bn --backend mock:leak --masks ablation --report-json " +
                    q(rj) + " -o " + q(md));
        e.seconds = seconds_since(t0);
        e.corpus = load_corpus(e.corpus_path, default_schema());
        e.report = detail::load_json_file(rj);
        e.markdown = detail::read_file(md);
        return e;
    }();
    return e;
}

const Json& cell(const Json& report, const std::string& backend, const ModalityMask& m) {
    for (const auto& c : report.at("cells")) {
        if (c.at("backend") == backend && c.at("mask") == m.key()) return c;
    }
    throw std::runtime_error("no cell " + backend + "/" + m.key());
}

Outcome inference_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0;
    std::size_t max_nodes = 0;
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        const auto rc = oracle::random_case(seed);
        const auto want = oracle::enumerate_posterior(rc.net, rc.evidence, rc.target);
        const auto got = eliminate(rc.net, rc.evidence, rc.target);
        if (got.size() != want.size()) return {false, "posterior size mismatch at seed " + std::to_string(seed)};
        for (std::size_t i = 0; i < got.size(); ++i) worst = std::max(worst, std::abs(got[i] - want[i]));
        max_nodes = std::max(max_nodes, rc.net.size());
    }
    const double secs = seconds_since(t0);
    return {worst <= kInferenceTol && secs < kInferenceSeconds && max_nodes <= 12,
            fmt("200 nets, max |VE - enumeration| = %.3g (tol %.0e), %.2f s (limit %.0f s)", worst, kInferenceTol, secs,
                kInferenceSeconds)};
}

Outcome structure_conformance() {
    const auto net = build_deep_bn(default_schema());
    std::set<std::pair<std::string, std::string>> got, want;
    for (const auto& e : net.edges()) got.insert(e);
    for (const auto& e : load_edge_list(g_src / "tests/golden/deep_bn_edges.json")) want.insert(e);
    std::set<std::string> er;
    for (auto p : net.parents(net.index("EmotionRegulation"))) er.insert(net.node(p).name);
    const std::set<std::string> want_er = {"Gender", "Mindedness", "Situation", "InternalEmotionComponent"};
    const bool ok = got == want && er == want_er;
    return {ok, std::to_string(got.size()) + " edges vs " + std::to_string(want.size()) + " golden, EmotionRegulation parents " +
                    (er == want_er ? "match" : "differ")};
}

// F1 from precision and recall over the raw label lists.
double oracle_f1(const std::vector<StrategyLabel>& t, const std::vector<StrategyLabel>& p, StrategyLabel c) {
    double tp = 0, predicted = 0, actual = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        tp += (t[i] == c && p[i] == c) ? 1 : 0;
        predicted += p[i] == c ? 1 : 0;
        actual += t[i] == c ? 1 : 0;
    }
    if (tp == 0) return 0.0;
    const double precision = tp / predicted, recall = tp / actual;
    return 2 * precision * recall / (precision + recall);
}

Outcome metric_oracle() {
    using S = StrategyLabel;
    // Hand example: A=Avoidance, B=Rest, C=Depreciation.
    const std::vector<S> t = {S::Avoidance, S::Avoidance, S::Rest, S::Depreciation};
    const std::vector<S> p = {S::Avoidance, S::Rest, S::Rest, S::Rest};
    const auto s = score(t, p);
    double weighted = 0;
    for (auto c : kAllStrategies) {
        const auto n = static_cast<double>(std::count(t.begin(), t.end(), c));
        weighted += n * oracle_f1(t, p, c);
    }
    weighted /= static_cast<double>(t.size());
    const bool example = std::abs(s.accuracy - 0.5) <= kExactTol && std::abs(s.weighted_f1 - weighted) <= kExactTol &&
                         std::abs(weighted - 11.0 / 24.0) <= kExactTol;

    std::mt19937_64 rng(3);
    std::vector<S> r(500);
    for (auto& x : r) x = kAllStrategies[std::uniform_int_distribution<std::size_t>(0, kNumStrategies - 1)(rng)];
    const auto perfect = score(r, r);
    bool all_one = perfect.accuracy == 1.0 && perfect.weighted_f1 == 1.0;
    for (const auto& pc : perfect.per_class) all_one = all_one && pc.accuracy == 1.0 && pc.f1 == 1.0;

    std::vector<S> truths;
    for (std::size_t k = 0; k < kNumStrategies; ++k) truths.insert(truths.end(), kPaperHistogram[k], kAllStrategies[k]);
    const auto maj = score(truths, std::vector<S>(truths.size(), S::StabilizeSelf));
    const bool majority = truths.size() == 11535 && std::abs(maj.accuracy - 3593.0 / 11535.0) <= kMajorityTol;

    return {example && all_one && majority,
            fmt("example acc %.4f, weighted F1 %.6f (precision/recall oracle %.6f); perfect case all 1: ", s.accuracy,
                s.weighted_f1, weighted) +
                (all_one ? "yes" : "no") + fmt("; majority acc %.12f vs 3593/11535", maj.accuracy)};
}

Outcome corpus_statistics() {
    const auto path = g_work / "paper.jsonl";
    require_cli("gen-synthetic --seed 7 --paper-proportions -o " + q(path));
    const auto c = load_corpus(path, default_schema());
    const auto h = class_histogram(c);
    std::string got;
    bool ok = true;
    for (std::size_t k = 0; k < kNumStrategies; ++k) {
        got += (k ? "/" : "") + std::to_string(h[k]);
        ok = ok && h[k] == kPaperHistogram[k];
    }
    ok = ok && c.frame_count() == 11535;
    return {ok, "counts " + got + ", total " + std::to_string(c.frame_count())};
}

Outcome qualitative_shape() {
    const auto& e = evaluated();
    const auto& with = cell(e.report, "bn", mask_for(MaskRow::All, true));
    const auto& without = cell(e.report, "bn", mask_for(MaskRow::All, false));
    if (with.at("status") != "ok" || without.at("status") != "ok") return {false, "BN cells did not complete"};
    const double w = with.at("pooled").at("weighted_f1").get<double>();
    const double wo = without.at("pooled").at("weighted_f1").get<double>();
    const bool ok = w >= kWithIntrospectionMin && wo <= kWithoutIntrospectionMax && w - wo >= kGapMin && e.seconds < kShapeSeconds;
    return {ok, fmt("pooled LOSO BN weighted F1 with introspection %.4f, without %.4f, gap %.4f; ", w, wo, w - wo) +
                    fmt("generation + 24-cell evaluation %.1f s", e.seconds)};
}

std::vector<std::string> md_cells(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string part;
    while (std::getline(ss, part, '|')) {
        const auto a = part.find_first_not_of(' '), b = part.find_last_not_of(' ');
        out.push_back(a == std::string::npos ? "" : part.substr(a, b - a + 1));
    }
    return out;
}

Outcome ablation_soundness() {
    const auto& e = evaluated();
    std::size_t leak_ok = 0;
    const auto masks = ablation_masks();
    for (const auto& m : masks) {
        const auto& c = cell(e.report, "mock:leak", m);
        if (c.at("status") == "ok" && c.at("pooled").at("accuracy") == 1.0 && c.at("pooled").at("weighted_f1") == 1.0) ++leak_ok;
    }

    // Ablation table columns: "", Modalities, Introspection, bn ACC, bn F1, ...
    std::size_t dashes = 0;
    std::istringstream lines(e.markdown);
    for (std::string line; std::getline(lines, line);) {
        const auto cells = md_cells(line);
        if (cells.size() >= 5 && cells[1] == "No transcript" && cells[3] == "---" && cells[4] == "---") ++dashes;
    }

    // Sentinel-tagged text must show up exactly where the mask allows.
    const auto schema = sentinel::schema();
    const auto templates = sentinel::templates();
    const std::vector<MaskRow> rows = {MaskRow::All,          MaskRow::NoPersonal,        MaskRow::NoSituational,
                                       MaskRow::NoTranscript, MaskRow::NoNonverbal,       MaskRow::OnlyIntrospection,
                                       MaskRow::OnlyNonverbal};
    const auto& s = e.corpus.sessions.front();
    std::size_t rows_ok = 0;
    for (auto row : rows) {
        bool row_ok = true;
        for (bool intro : {true, false}) {
            const auto m = mask_for(row, intro);
            bool any_line = false;
            for (const auto& f : s.frames) {
                const auto p = compile_frame(f, s, schema, templates, m).prompt;
                auto has = [&](const char* tag) { return p.find(tag) != std::string::npos; };
                any_line = any_line || has("<<TRANSCRIPT-LINE>>");
                row_ok = row_ok && has("<<SITUATIONAL>>") == m.include_situational_context &&
                         has("<<SITUATION-TEXT>>") == m.include_situational_context &&
                         has("<<TRANSCRIPT>>") == m.include_transcript && has("<<TRANSCRIPT-TARGET>>") == m.include_transcript &&
                         has("<<NONVERBAL>>") == m.include_nonverbal && has("<<NV>>") == m.include_nonverbal &&
                         has("<<INTROSPECTION>>") == m.include_introspection && has("<<IN>>") == m.include_introspection &&
                         has("<<PERSONAL>>") == m.include_personal_context && has("<<PC>>") == m.include_personal_context;
            }
            row_ok = row_ok && any_line == m.include_transcript;
        }
        if (row_ok) ++rows_ok;
    }
    const bool ok = leak_ok == masks.size() && dashes == 2 && rows_ok == rows.size();
    return {ok, "leak perfect on " + std::to_string(leak_ok) + "/" + std::to_string(masks.size()) + " masks; BN No transcript " +
                    "renders --- in " + std::to_string(dashes) + "/2 rows; sentinels exact for " + std::to_string(rows_ok) +
                    "/7 rows"};
}

Outcome determinism() {
    std::vector<std::string> corpora, prompts;
    for (int i : {1, 2}) {
        const auto n = std::to_string(i);
        const auto c = g_work / ("det" + n + ".jsonl"), d = g_work / ("det" + n + ".dataset.jsonl");
        require_cli("gen-synthetic --config " + q(g_src / "data/gen_acceptance.json") + " -o " + q(c));
        require_cli("compile-prompts --corpus " + q(g_work / "det1.jsonl") + " -o " + q(d));
        corpora.push_back(detail::read_file(c));
        prompts.push_back(detail::read_file(d));
    }
    const bool ok = corpora[0] == corpora[1] && prompts[0] == prompts[1] && !corpora[0].empty() && !prompts[0].empty();
    return {ok, std::string("gen-synthetic ") + (corpora[0] == corpora[1] ? "identical" : "differs") + " (" +
                    std::to_string(corpora[0].size()) + " bytes), compile-prompts " +
                    (prompts[0] == prompts[1] ? "identical" : "differs") + " (" + std::to_string(prompts[0].size()) + " bytes)"};
}

Outcome loso_hygiene() {
    const auto& e = evaluated();
    const auto plan = make_loso(e.corpus);
    std::size_t overlaps = 0, bad_sessions = 0;
    for (const auto& f : plan.folds) {
        std::set<std::string> train_ids, test_ids;
        std::size_t test_sessions = 0;
        for (const auto& s : e.corpus.sessions) {
            const bool held_out = s.participant_id == f.test_participant;
            const bool trained = std::find(f.train_participants.begin(), f.train_participants.end(), s.participant_id) !=
                                 f.train_participants.end();
            if (held_out) {
                test_ids.insert(s.participant_id);
                ++test_sessions;
            }
            if (trained) train_ids.insert(s.participant_id);
        }
        for (const auto& id : test_ids) overlaps += train_ids.count(id);
        if (test_sessions != 2) ++bad_sessions;
    }
    // The report's own per-fold audit must agree.
    std::size_t report_issues = 0;
    for (const auto& c : e.report.at("cells")) {
        if (c.at("status") != "ok") continue;
        if (c.at("folds").size() != 10) ++report_issues;
        for (const auto& f : c.at("folds")) {
            if (f.at("overlap") != 0 || f.at("test_sessions") != 2) ++report_issues;
        }
    }
    const bool ok = plan.folds.size() == 10 && overlaps == 0 && bad_sessions == 0 && report_issues == 0;
    return {ok, std::to_string(plan.folds.size()) + " folds, " + std::to_string(overlaps) + " overlapping ids, " +
                    std::to_string(bad_sessions) + " folds without exactly 2 test sessions, " +
                    std::to_string(report_issues) + " report audit issues"};
}

} // namespace

int main(int argc, char** argv) {
    if (argc > 1) g_cli = argv[1];
    if (argc > 2) g_src = argv[2];
    g_work = fs::temp_directory_path() / "erreg-acceptance";
    fs::remove_all(g_work);
    fs::create_directories(g_work);

    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"inference-oracle", inference_oracle},       {"structure-conformance", structure_conformance},
        {"metric-oracle", metric_oracle},             {"corpus-statistics", corpus_statistics},
        {"qualitative-shape", qualitative_shape},     {"ablation-soundness", ablation_soundness},
        {"determinism", determinism},                 {"loso-hygiene", loso_hygiene},
    };
    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& ex) {
            o = {false, std::string("error: ") + ex.what()};
        }
        std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
