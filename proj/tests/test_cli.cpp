#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "json_util.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / "erreg-cli-test";

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(const std::string& args) {
    fs::create_directories(kWork);
    const auto out = kWork / "stdout.txt", err = kWork / "stderr.txt";
    const std::string cmd = std::string(ERREG_CLI) + " " + args + " >" + out.string() + " 2>" + err.string();
    const int rc = std::system(cmd.c_str());
    return {WIFEXITED(rc) ? WEXITSTATUS(rc) : -1, erreg::detail::read_file(out), erreg::detail::read_file(err)};
}

std::string path(const std::string& name) { return (kWork / name).string(); }

bool has(const std::string& text, const std::string& needle) { return text.find(needle) != std::string::npos; }

} // namespace

TEST_CASE("usage errors exit with 1") {
    CHECK(run("").code == 1);
    CHECK(run("frobnicate").code == 1);
    CHECK(run("validate --corpus").code == 1);
    CHECK(run("validate --corpus /nonexistent/file.jsonl").code == 1);
    CHECK(run("gen-synthetic --bogus").code == 1);
    const auto help = run("--help");
    CHECK(help.code == 0);
    CHECK(has(help.out, "eval-loso"));
    const auto sub = run("compile-prompts --help");
    CHECK(sub.code == 0);
    for (auto flag : {"--no-personal", "--no-situational", "--no-transcript", "--no-nonverbal", "--no-introspection",
                      "--only-nonverbal", "--only-introspection"}) {
        CHECK(has(sub.out, flag));
    }
}

TEST_CASE("gen-synthetic then validate reproduces the class histogram") {
    REQUIRE(run("gen-synthetic --seed 7 --paper-proportions -o " + path("paper.jsonl")).code == 0);
    CHECK(fs::exists(path("paper.jsonl.manifest.json")));
    const auto v = run("validate --corpus " + path("paper.jsonl"));
    REQUIRE(v.code == 0);
    for (auto line : {"frames: 11535", "Withdrawal: 655", "Attack self: 515", "Attack other: 629", "Avoidance: 1650",
                      "Depreciation: 1911", "Stabilize self: 3593", "Rest: 2582"}) {
        CHECK(has(v.out, line));
    }
    const auto manifest = erreg::detail::load_json_file(path("paper.jsonl.manifest.json"));
    CHECK(manifest["seeds"]["generator"] == 7);
    CHECK(manifest["command_line"].size() == 7);
}

TEST_CASE("data errors exit with 2") {
    erreg::detail::write_file(path("bad.jsonl"), "{\"participant_id\": 3}\n");
    const auto r = run("validate --corpus " + path("bad.jsonl"));
    CHECK(r.code == 2);
    CHECK(has(r.err, "bad.jsonl"));
    CHECK(run("gen-synthetic --seed 1 --paper-proportions --frames-per-session 5 -o " + path("x.jsonl")).code == 2);
}

TEST_CASE("score on identical files reports accuracy 1") {
    REQUIRE(run("gen-synthetic --seed 2 --participants 2 --frames-per-session 30 -o " + path("small.jsonl")).code == 0);
    REQUIRE(run("compile-prompts --corpus " + path("small.jsonl") + " -o " + path("small.dataset.jsonl")).code == 0);
    const auto r = run("score --truths " + path("small.dataset.jsonl") + " --predictions " + path("small.dataset.jsonl"));
    CHECK(r.code == 2); // a dataset is not a predictions file
    REQUIRE(run("train-bn --corpus " + path("small.jsonl") + " -o " + path("net.json")).code == 0);
    REQUIRE(run("predict-bn --net " + path("net.json") + " --corpus " + path("small.jsonl") + " -o " + path("pred.jsonl")).code == 0);
    const auto same = run("score --truths " + path("pred.jsonl") + " --predictions " + path("pred.jsonl"));
    REQUIRE(same.code == 0);
    CHECK(has(same.out, "overall accuracy: 1\n"));
    const auto vs = run("score --truths " + path("small.dataset.jsonl") + " --predictions " + path("pred.jsonl") + " --format json");
    REQUIRE(vs.code == 0);
    CHECK(erreg::Json::parse(vs.out)["n"] == 120);
}

TEST_CASE("eval-loso with the leak backend reports all ones") {
    REQUIRE(run("gen-synthetic --seed 3 --participants 3 --frames-per-session 20 -o " + path("leak.jsonl")).code == 0);
    const auto r = run("eval-loso --corpus " + path("leak.jsonl") + " --backend mock:leak --report-json " + path("leak.report.json") +
                       " -o " + path("leak.md"));
    REQUIRE(r.code == 0);
    const auto md = erreg::detail::read_file(path("leak.md"));
    CHECK(!has(md, "0.9"));
    CHECK(has(md, "| Only nonverbal behavior | no | 1.00 | 1.00 |"));
    const auto again = run("report --in " + path("leak.report.json") + " --format markdown");
    REQUIRE(again.code == 0);
    CHECK(again.out == md);
    const auto csv = run("report --in " + path("leak.report.json") + " --format csv");
    CHECK(has(csv.out, "mock:leak,All,PSTNI,yes,ok,120,1,1,1,1"));
}

TEST_CASE("eval-loso exits with 3 when a backend fails") {
    REQUIRE(run("gen-synthetic --seed 3 --participants 2 --frames-per-session 10 -o " + path("fail.jsonl")).code == 0);
    const auto r = run("eval-loso --corpus " + path("fail.jsonl") + " --masks PSTNI --backend mock:leak --backend 'adapter:false'");
    CHECK(r.code == 3);
    CHECK(has(r.out, "| mock:leak | yes | 1.00 |"));
    CHECK(has(r.err, "failed"));
}

TEST_CASE("commands are byte-identical across runs") {
    for (int i : {1, 2}) {
        const auto n = std::to_string(i);
        REQUIRE(run("gen-synthetic --config " ERREG_SOURCE_DIR "/data/gen_paper.json -o " + path("det" + n + ".jsonl")).code == 0);
        REQUIRE(run("compile-prompts --no-transcript --corpus " + path("det1.jsonl") + " -o " + path("det" + n + ".dataset.jsonl")).code == 0);
    }
    using erreg::detail::read_file;
    CHECK(read_file(path("det1.jsonl")) == read_file(path("det2.jsonl")));
    CHECK(read_file(path("det1.dataset.jsonl")) == read_file(path("det2.dataset.jsonl")));
}

TEST_CASE("mask flags reach the prompts") {
    REQUIRE(run("gen-synthetic --seed 4 --participants 2 --frames-per-session 5 -o " + path("m.jsonl")).code == 0);
    const auto only = run("compile-prompts --only-nonverbal --no-labels --corpus " + path("m.jsonl"));
    REQUIRE(only.code == 0);
    CHECK(!has(only.out, "Situational context:"));
    CHECK(!has(only.out, "\"label\""));
    const auto nosit = run("compile-prompts --no-situational --corpus " + path("m.jsonl"));
    REQUIRE(nosit.code == 0);
    CHECK(!has(nosit.out, "Situational context:"));
    CHECK(has(nosit.out, "Personal context:"));
    CHECK(run("compile-prompts --only-nonverbal --only-introspection --corpus " + path("m.jsonl")).code == 1);
}
