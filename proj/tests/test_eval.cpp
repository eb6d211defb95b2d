#include <doctest.h>

#include <cstdlib>
#include <sstream>

#include "erreg/deep_bn.hpp"
#include "erreg/error.hpp"
#include "erreg/eval.hpp"
#include "erreg/learning.hpp"
#include "fixtures.hpp"
#include "json_util.hpp"

using namespace erreg;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("erreg-test-" + name);
    fs::remove_all(p);
    return p;
}

const Corpus& ten_participants() {
    static const Corpus c = fixture::synthetic(31, 10, 30, {0.95, 0.6, 0.8});
    return c;
}

AblationOptions options(const std::string& name, int workers = 1) {
    AblationOptions o;
    o.workdir = scratch(name);
    o.workers = workers;
    return o;
}

const std::string kFakeAdapter = "python3 " ERREG_SOURCE_DIR "/tests/fake_adapter.py";

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace

TEST_CASE("LOSO folds hold out each participant with both sessions") {
    const auto& c = ten_participants();
    const auto plan = make_loso(c);
    REQUIRE(plan.folds.size() == 10);
    for (const auto& f : plan.folds) {
        const auto train = subset(c, f.train_participants);
        const auto test = subset(c, {f.test_participant});
        CHECK(participant_overlap(train, test).empty());
        CHECK(test.sessions.size() == 2);
        CHECK(train.sessions.size() == 18);
        CHECK(f.train_participants.size() == 9);
    }
    CHECK(plan.folds.front().test_participant == "P01");
    CHECK(plan.folds.back().test_participant == "P10");
    CHECK(make_loso(fixture::synthetic(1, 2, 5)).folds.size() == 2);
    CHECK_THROWS_AS(make_loso(fixture::synthetic(1, 1, 5)), ValidationError);
}

TEST_CASE("leak backend scores 1 on every mask and folds stay disjoint") {
    const auto& c = ten_participants();
    LeakBackend leak;
    const auto r = run_ablation(c, {&leak}, ablation_masks(), make_loso(c), options("leak"));
    REQUIRE(r.cells.size() == 12);
    for (const auto& cell : r.cells) {
        REQUIRE(cell.status == CellStatus::Ok);
        CHECK(cell.pooled->accuracy == 1.0);
        CHECK(cell.pooled->weighted_f1 == 1.0);
        for (const auto& pc : cell.pooled->per_class) CHECK(pc.accuracy == 1.0);
        CHECK(cell.folds.size() == 10);
        for (const auto& f : cell.folds) {
            CHECK(f.overlap == 0);
            CHECK(f.test_sessions == 2);
            CHECK(f.train_sessions == 18);
        }
    }
}

TEST_CASE("majority backend accuracy per fold equals the test share of the training majority") {
    const auto& c = ten_participants();
    const auto plan = make_loso(c);
    MajorityBackend maj;
    const auto r = run_ablation(c, {&maj}, {ModalityMask::all()}, plan, options("majority"));
    const auto& cell = r.cells.at(0);
    REQUIRE(cell.status == CellStatus::Ok);
    std::size_t correct = 0, total = 0;
    for (std::size_t i = 0; i < plan.folds.size(); ++i) {
        const auto train_hist = class_histogram(subset(c, plan.folds[i].train_participants));
        const auto test_hist = class_histogram(subset(c, {plan.folds[i].test_participant}));
        std::size_t best = 0;
        for (std::size_t k = 1; k < kNumStrategies; ++k) {
            if (train_hist[k] > train_hist[best]) best = k;
        }
        std::size_t n = 0;
        for (auto x : test_hist) n += x;
        CHECK(cell.folds[i].scores->accuracy == doctest::Approx(static_cast<double>(test_hist[best]) / n).epsilon(1e-15));
        correct += cell.folds[i].scores->confusion.correct();
        total += cell.folds[i].scores->n;
    }
    CHECK(cell.pooled->accuracy == static_cast<double>(correct) / static_cast<double>(total));
    CHECK(total == c.frame_count());
}

TEST_CASE("BN is not applicable without the transcript and strong on noiseless data") {
    GenConfig cfg;
    cfg.seed = 17;
    cfg.target_histogram = kPaperHistogram;
    const auto c = generate_corpus(cfg);
    BnBackend bn;
    const std::vector<ModalityMask> masks = {mask_for(MaskRow::All, true), mask_for(MaskRow::NoTranscript, true)};
    const auto r = run_ablation(c, {&bn}, masks, make_loso(c), options("bn"));
    REQUIRE(r.cells[0].status == CellStatus::Ok);
    CHECK(r.cells[0].pooled->weighted_f1 >= 0.99);
    CHECK(r.cells[1].status == CellStatus::NotApplicable);
    const auto md = render_report(r, ReportFormat::Markdown);
    CHECK(md.find("| No transcript | yes | --- | --- |") != std::string::npos);
}

TEST_CASE("BN prediction honors the mask") {
    const auto c = fixture::synthetic(23, 3, 40, {0.9, 0.7, 1.0});
    const auto net = fit(build_deep_bn(c.schema), c, 1.0);
    const auto prior = eliminate(net, Evidence{}, "EmotionRegulation");
    const auto stripped = split_introspection(c);
    ModalityMask no_intro;
    no_intro.include_introspection = false;
    for (std::size_t si = 0; si < c.sessions.size(); ++si) {
        for (std::size_t fi = 0; fi < c.sessions[si].frames.size(); fi += 7) {
            const auto& f = c.sessions[si].frames[fi];
            const auto off = predict(net, f, c.sessions[si], ModalityMask::none());
            CHECK(off.label == decide(prior).label);
            const auto a = predict(net, stripped.sessions[si].frames[fi], stripped.sessions[si], ModalityMask::all());
            const auto b = predict(net, f, c.sessions[si], no_intro);
            CHECK(a.label == b.label);
            CHECK(a.posterior == b.posterior);
        }
    }
}

TEST_CASE("BN trains by hard EM when the training data has no introspection") {
    const auto c = split_introspection(fixture::synthetic(29, 3, 30));
    BnBackend bn;
    ModalityMask m = mask_for(MaskRow::OnlyNonverbal, false);
    const auto r = run_ablation(c, {&bn}, {m}, make_loso(c), options("bn-em"));
    CHECK(r.cells[0].status == CellStatus::Ok);
}

TEST_CASE("parallel workers give the same report") {
    const auto& c = ten_participants();
    BnBackend bn;
    MajorityBackend maj;
    const std::vector<ModalityMask> masks = {mask_for(MaskRow::All, true), mask_for(MaskRow::All, false)};
    const auto a = run_ablation(c, {&bn, &maj}, masks, make_loso(c), options("serial"));
    const auto b = run_ablation(c, {&bn, &maj}, masks, make_loso(c), options("parallel", 4));
    CHECK(render_report(a, ReportFormat::Json) == render_report(b, ReportFormat::Json));
}

TEST_CASE("external adapter backend speaks the command protocol") {
    const auto c = fixture::synthetic(3, 3, 20);
    AdapterBackend adapter(kFakeAdapter);
    const auto opts = options("adapter");
    const auto r = run_ablation(c, {&adapter}, {mask_for(MaskRow::NoPersonal, false)}, make_loso(c), opts);
    REQUIRE(r.cells[0].status == CellStatus::Ok);
    CHECK(r.cells[0].pooled->n == c.frame_count());
    const auto dir = opts.workdir / ("adapter_python3_" + [] {
        std::string s = ERREG_SOURCE_DIR "/tests/fake_adapter.py";
        for (auto& ch : s) ch = std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' ? ch : '_';
        return s;
    }()) / mask_for(MaskRow::NoPersonal, false).key() / "P01";
    REQUIRE(fs::exists(dir / "train.jsonl"));
    const auto train = load_dataset(dir / "train.jsonl");
    const auto infer = load_dataset(dir / "infer.jsonl");
    CHECK(train.size() + infer.size() == c.frame_count());
    for (const auto& rec : train) CHECK(rec.label);
    for (const auto& rec : infer) CHECK(!rec.label);
    CHECK(infer.front().prompt.find("Personal context:") == std::string::npos);
    const auto manifest = detail::load_json_file(dir / "adapter" / "manifest.json");
    CHECK(manifest["config"]["lora_rank"] == 8);
    CHECK(manifest["config"]["lora_alpha"] == 16);
}

TEST_CASE("adapter failures are recorded per cell and the run continues") {
    const auto c = fixture::synthetic(3, 2, 10);
    AdapterBackend adapter(kFakeAdapter);
    LeakBackend leak;
    setenv("FAKE_ADAPTER_FAIL", "train", 1);
    auto r = run_ablation(c, {&adapter, &leak}, {ModalityMask::all()}, make_loso(c), options("adapter-fail"));
    unsetenv("FAKE_ADAPTER_FAIL");
    CHECK(r.cells[0].status == CellStatus::Failed);
    CHECK(r.cells[0].error.find("train failed") != std::string::npos);
    CHECK(r.cells[1].status == CellStatus::Ok);
    CHECK(r.any_failed());
    CHECK(render_report(r, ReportFormat::Markdown).find("failed") != std::string::npos);

    setenv("FAKE_ADAPTER_GENERATION", "Rest or Avoidance", 1);
    r = run_ablation(c, {&adapter}, {ModalityMask::all()}, make_loso(c), options("adapter-garbage"));
    unsetenv("FAKE_ADAPTER_GENERATION");
    CHECK(r.cells[0].status == CellStatus::Failed);
    CHECK(r.cells[0].error.find("2 class strings matched") != std::string::npos);

    CHECK_THROWS_AS(make_backend("gpt"), UsageError);
    CHECK(make_backend("adapter:foo")->name() == "adapter:foo");
}

TEST_CASE("reports render in every format and round trip") {
    const auto& c = ten_participants();
    BnBackend bn;
    LeakBackend leak;
    const auto r = run_ablation(c, {&bn, &leak}, ablation_masks(), make_loso(c), options("report"));

    const auto md = render_report(r, ReportFormat::Markdown);
    CHECK(md.find("| bn | yes |") != std::string::npos);
    CHECK(md.find("| bn | no |") != std::string::npos);
    CHECK(md.find("| mock:leak | yes | 1.00 | 1.00 |") != std::string::npos);
    CHECK(md.find("| Only nonverbal behavior | no |") != std::string::npos);

    const auto json = render_report(r, ReportFormat::Json);
    const auto back = report_from_json(Json::parse(json));
    CHECK(render_report(back, ReportFormat::Json) == json);
    CHECK(render_report(back, ReportFormat::Markdown) == md);

    std::istringstream csv(render_report(r, ReportFormat::Csv));
    std::string line;
    std::getline(csv, line);
    const auto header = split_csv_line(line);
    CHECK(header[6] == "accuracy");
    std::size_t i = 0;
    while (std::getline(csv, line)) {
        const auto fields = split_csv_line(line);
        REQUIRE(fields.size() == header.size());
        const auto& cell = r.cells.at(i++);
        CHECK(fields[0] == cell.backend);
        CHECK(fields[2] == cell.mask.key());
        if (cell.status == CellStatus::NotApplicable) {
            CHECK(fields[6] == "---");
            continue;
        }
        CHECK(std::stod(fields[6]) == cell.pooled->accuracy);
        CHECK(std::stod(fields[7]) == cell.pooled->weighted_f1);
        CHECK(std::stod(fields[8]) == cell.fold_mean->accuracy);
        for (std::size_t k = 0; k < kNumStrategies; ++k) {
            CHECK(std::stod(fields[10 + 2 * k]) == cell.pooled->per_class[k].accuracy);
            CHECK(std::stod(fields[11 + 2 * k]) == cell.pooled->per_class[k].f1);
        }
    }
    CHECK(i == r.cells.size());
}

TEST_CASE("empty report renders headers only") {
    const EvalReport empty;
    const auto md = render_report(empty, ReportFormat::Markdown);
    CHECK(md.find("| Model | Introspection | Withdrawal ACC |") != std::string::npos);
    CHECK(md.find("| Modalities | Introspection |") != std::string::npos);
    std::size_t rows = 0;
    std::istringstream in(md);
    std::string line;
    while (std::getline(in, line)) rows += line.rfind("|", 0) == 0 ? 1 : 0;
    CHECK(rows == 4);
    const auto csv = render_report(empty, ReportFormat::Csv);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1);
}
