#include "erreg/eval.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdlib>
#include <map>
#include <set>
#include <thread>

#include "erreg/deep_bn.hpp"
#include "erreg/error.hpp"
#include "erreg/learning.hpp"
#include "erreg/records.hpp"
#include "json_util.hpp"

namespace erreg {

FoldPlan make_loso(const Corpus& corpus) {
    const auto participants = corpus.participants();
    if (participants.size() < 2) {
        throw ValidationError("leave-one-participant-out needs at least two participants, found " +
                              std::to_string(participants.size()));
    }
    FoldPlan plan;
    for (const auto& test : participants) {
        Fold f;
        f.test_participant = test;
        for (const auto& p : participants) {
            if (p != test) f.train_participants.push_back(p);
        }
        plan.folds.push_back(std::move(f));
    }
    return plan;
}

std::vector<std::string> participant_overlap(const Corpus& train, const Corpus& test) {
    const auto a = train.participants();
    const auto b = test.participants();
    std::vector<std::string> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

namespace {

std::filesystem::path predictions_path(const CellInput& input) { return input.workdir / "predictions.jsonl"; }

template <typename Fn>
std::filesystem::path predict_each(const CellInput& input, Fn&& fn) {
    std::vector<Prediction> preds;
    for (const auto& s : input.test.sessions) {
        for (const auto& f : s.frames) preds.push_back({f.record_id(), fn(f, s), "", ""});
    }
    const auto path = predictions_path(input);
    save_predictions(preds, path);
    return path;
}

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') out += "'\\''";
        else out += c;
    }
    return out + "'";
}

std::string sanitize(const std::string& name) {
    std::string out;
    for (char c : name) out += std::isalnum(static_cast<unsigned char>(c)) || c == '-' ? c : '_';
    return out;
}

} // namespace

bool BnBackend::supports(const ModalityMask& mask) const {
    return !(mask.include_situational_context && !mask.include_transcript);
}

std::filesystem::path BnBackend::run(const CellInput& input) {
    const auto structure = build_deep_bn(input.train.schema, edges_);
    bool labeled_latents = true;
    for (const auto& s : input.train.sessions) {
        for (const auto& f : s.frames) labeled_latents = labeled_latents && f.introspection.has_value();
    }
    const BayesNet net = labeled_latents ? fit(structure, input.train, alpha_)
                                         : fit_em(randomize_parameters(structure, 0), input.train, alpha_).net;
    std::map<std::vector<int>, StrategyLabel> cache;
    return predict_each(input, [&](const Frame& f, const Session& s) -> std::optional<StrategyLabel> {
        auto ev = frame_evidence(net, f, s, input.mask);
        auto it = cache.find(ev);
        if (it != cache.end()) return it->second;
        const auto label = decide(eliminate(net, ev, net.index(net.query_node()))).label;
        cache.emplace(std::move(ev), label);
        return label;
    });
}

std::filesystem::path LeakBackend::run(const CellInput& input) {
    return predict_each(input, [](const Frame& f, const Session&) -> std::optional<StrategyLabel> { return f.label; });
}

std::filesystem::path MajorityBackend::run(const CellInput& input) {
    const auto hist = class_histogram(input.train);
    std::size_t best = 0;
    for (std::size_t c = 1; c < kNumStrategies; ++c) {
        if (hist[c] > hist[best]) best = c;
    }
    const auto label = strategy_at(best);
    return predict_each(input, [label](const Frame&, const Session&) -> std::optional<StrategyLabel> { return label; });
}

Json default_adapter_config() {
    return {{"base_model_id", "sshleifer/tiny-gpt2"},
            {"lora_rank", 8},
            {"lora_alpha", 16},
            {"lora_dropout", 0.1},
            {"epochs", 5},
            {"per_device_batch", 4},
            {"max_sequence_length", 1024},
            {"max_new_tokens", 16},
            {"do_sample", false},
            {"seed", 0}};
}

std::filesystem::path AdapterBackend::run(const CellInput& input) {
    std::filesystem::create_directories(input.workdir);
    const auto train_path = input.workdir / "train.jsonl";
    const auto infer_path = input.workdir / "infer.jsonl";
    const auto adapter_dir = input.workdir / "adapter";
    const auto out = predictions_path(input);
    const auto log = input.workdir / "adapter.log";
    save_dataset(compile_corpus(input.train, input.templates, input.mask, true), train_path);
    save_dataset(compile_corpus(input.test, input.templates, input.mask, false), infer_path);
    std::filesystem::path config = config_ ? std::filesystem::absolute(*config_) : input.workdir / "adapter_config.json";
    if (!config_) detail::write_file(config, default_adapter_config().dump(2) + "\n");

    auto invoke = [&](const std::string& args, const char* step) {
        const std::string cmd = command_ + " " + args + " >>" + shell_quote(log.string()) + " 2>&1";
        const int rc = std::system(cmd.c_str());
        if (rc == -1 || !WIFEXITED(rc) || WEXITSTATUS(rc) != 0) {
            throw BackendError(std::string("adapter ") + step + " failed (status " + std::to_string(rc) + "), see " +
                               log.string());
        }
    };
    invoke("train --data " + shell_quote(train_path.string()) + " --out " + shell_quote(adapter_dir.string()) +
               " --config " + shell_quote(config.string()),
           "train");
    invoke("infer --adapter " + shell_quote(adapter_dir.string()) + " --data " + shell_quote(infer_path.string()) +
               " --out " + shell_quote(out.string()),
           "infer");
    if (!std::filesystem::exists(out)) throw BackendError("adapter infer wrote no predictions to " + out.string());
    return out;
}

std::unique_ptr<Backend> make_backend(const std::string& spec, double alpha, const std::optional<EdgeList>& edges,
                                      const std::optional<std::filesystem::path>& adapter_config) {
    if (spec == "bn") return std::make_unique<BnBackend>(alpha, edges);
    if (spec == "mock:leak") return std::make_unique<LeakBackend>();
    if (spec == "mock:majority") return std::make_unique<MajorityBackend>();
    const std::string prefix = "adapter:";
    if (spec.rfind(prefix, 0) == 0 && spec.size() > prefix.size()) {
        return std::make_unique<AdapterBackend>(spec.substr(prefix.size()), adapter_config);
    }
    throw UsageError("unknown backend '" + spec + "' (expected bn, mock:leak, mock:majority or adapter:<command>)");
}

std::string_view cell_status_name(CellStatus s) noexcept {
    switch (s) {
    case CellStatus::Ok: return "ok";
    case CellStatus::NotApplicable: return "n/a";
    case CellStatus::Failed: return "failed";
    }
    return "failed";
}

const CellResult* EvalReport::find(const std::string& backend, const ModalityMask& mask) const {
    for (const auto& c : cells) {
        if (c.backend == backend && c.mask == mask) return &c;
    }
    return nullptr;
}

bool EvalReport::any_failed() const {
    return std::any_of(cells.begin(), cells.end(), [](const CellResult& c) { return c.status == CellStatus::Failed; });
}

namespace {

// Scores a predictions file against the test frames, in test order.
Scores score_predictions(const Corpus& test, const std::filesystem::path& path) {
    std::map<std::string, Prediction> by_id;
    for (auto& p : load_predictions(path)) {
        const auto id = p.record_id;
        if (!by_id.emplace(id, std::move(p)).second) throw BackendError("duplicate prediction for " + id);
    }
    ConfusionMatrix cm;
    std::size_t used = 0;
    for (const auto& s : test.sessions) {
        for (const auto& f : s.frames) {
            const auto id = f.record_id();
            auto it = by_id.find(id);
            if (it == by_id.end()) throw BackendError("no prediction for " + id);
            if (!it->second.predicted_label) {
                throw BackendError("record " + id + ": " + it->second.error + " (generation: \"" +
                                   it->second.raw_generation + "\")");
            }
            cm.add(f.label, *it->second.predicted_label);
            ++used;
        }
    }
    if (used != by_id.size()) throw BackendError("predictions file holds records outside the test fold");
    return score(cm);
}

struct Job {
    std::size_t cell;
    std::size_t fold;
};

} // namespace

EvalReport run_ablation(const Corpus& corpus, const std::vector<Backend*>& backends,
                        const std::vector<ModalityMask>& masks, const FoldPlan& plan,
                        const AblationOptions& options) {
    for (const auto& m : masks) m.validate();
    options.templates.validate();
    EvalReport report;
    for (auto* b : backends) report.backends.push_back(b->name());
    report.masks = masks;

    std::vector<Job> jobs;
    for (std::size_t bi = 0; bi < backends.size(); ++bi) {
        for (const auto& m : masks) {
            CellResult cell;
            cell.backend = backends[bi]->name();
            cell.mask = m;
            if (!backends[bi]->supports(m)) {
                cell.status = CellStatus::NotApplicable;
            } else {
                cell.folds.resize(plan.folds.size());
                for (std::size_t fi = 0; fi < plan.folds.size(); ++fi) jobs.push_back({report.cells.size(), fi});
            }
            report.cells.push_back(std::move(cell));
        }
    }

    auto run_job = [&](const Job& job) {
        auto& cell = report.cells[job.cell];
        auto& result = cell.folds[job.fold];
        const auto& fold = plan.folds[job.fold];
        Backend* backend = backends[job.cell / masks.size()];
        result.test_participant = fold.test_participant;
        try {
            const Corpus train = subset(corpus, fold.train_participants);
            const Corpus test = subset(corpus, {fold.test_participant});
            result.train_sessions = train.sessions.size();
            result.test_sessions = test.sessions.size();
            result.overlap = participant_overlap(train, test).size();
            if (result.overlap) throw ValidationError("fold " + fold.test_participant + " leaks test participants");
            const auto workdir = options.workdir / sanitize(cell.backend) / cell.mask.key() / sanitize(fold.test_participant);
            std::filesystem::remove_all(workdir);
            std::filesystem::create_directories(workdir);
            const CellInput input{train, test, cell.mask, options.templates, workdir};
            result.scores = score_predictions(test, backend->run(input));
        } catch (const std::exception& e) {
            result.error = e.what();
        }
    };

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) run_job(jobs[i]);
    };
    const auto n_workers = static_cast<std::size_t>(std::max(1, options.workers));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < std::min(n_workers, jobs.size()); ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    for (auto& cell : report.cells) {
        if (cell.status == CellStatus::NotApplicable) continue;
        ConfusionMatrix pooled;
        FoldMean mean;
        for (const auto& f : cell.folds) {
            if (!f.scores) {
                cell.status = CellStatus::Failed;
                if (cell.error.empty()) cell.error = "fold " + f.test_participant + ": " + f.error;
                continue;
            }
            pooled.merge(f.scores->confusion);
            mean.accuracy += f.scores->accuracy;
            mean.weighted_f1 += f.scores->weighted_f1;
        }
        if (cell.status == CellStatus::Ok && !cell.folds.empty()) {
            cell.pooled = score(pooled);
            mean.accuracy /= static_cast<double>(cell.folds.size());
            mean.weighted_f1 /= static_cast<double>(cell.folds.size());
            cell.fold_mean = mean;
        } else if (cell.folds.empty()) {
            cell.status = CellStatus::Failed;
            cell.error = "fold plan is empty";
        }
    }
    return report;
}

Json to_json(const EvalReport& r) {
    Json j;
    j["backends"] = r.backends;
    j["masks"] = Json::array();
    for (const auto& m : r.masks) j["masks"].push_back(m.key());
    j["cells"] = Json::array();
    for (const auto& c : r.cells) {
        Json jc;
        jc["backend"] = c.backend;
        jc["mask"] = c.mask.key();
        jc["row"] = c.mask.row_name();
        jc["introspection"] = c.mask.include_introspection;
        jc["status"] = cell_status_name(c.status);
        jc["error"] = c.error;
        jc["pooled"] = c.pooled ? to_json(*c.pooled) : Json();
        jc["fold_mean"] = c.fold_mean ? Json{{"accuracy", c.fold_mean->accuracy}, {"weighted_f1", c.fold_mean->weighted_f1}}
                                      : Json();
        jc["folds"] = Json::array();
        for (const auto& f : c.folds) {
            jc["folds"].push_back({{"test_participant", f.test_participant},
                                   {"train_sessions", f.train_sessions},
                                   {"test_sessions", f.test_sessions},
                                   {"overlap", f.overlap},
                                   {"scores", f.scores ? to_json(*f.scores) : Json()},
                                   {"error", f.error}});
        }
        j["cells"].push_back(std::move(jc));
    }
    return j;
}

EvalReport report_from_json(const Json& j) {
    EvalReport r;
    try {
        r.backends = j.at("backends").get<std::vector<std::string>>();
        for (const auto& k : j.at("masks")) r.masks.push_back(ModalityMask::from_key(k.get<std::string>()));
        for (const auto& jc : j.at("cells")) {
            CellResult c;
            c.backend = jc.at("backend").get<std::string>();
            c.mask = ModalityMask::from_key(jc.at("mask").get<std::string>());
            const auto status = jc.at("status").get<std::string>();
            c.status = status == "ok" ? CellStatus::Ok : status == "n/a" ? CellStatus::NotApplicable : CellStatus::Failed;
            c.error = jc.value("error", "");
            if (!jc.at("pooled").is_null()) c.pooled = scores_from_json(jc.at("pooled"));
            if (!jc.at("fold_mean").is_null()) {
                c.fold_mean = FoldMean{jc.at("fold_mean").at("accuracy").get<double>(),
                                       jc.at("fold_mean").at("weighted_f1").get<double>()};
            }
            for (const auto& jf : jc.at("folds")) {
                FoldResult f;
                f.test_participant = jf.at("test_participant").get<std::string>();
                f.train_sessions = jf.at("train_sessions").get<std::size_t>();
                f.test_sessions = jf.at("test_sessions").get<std::size_t>();
                f.overlap = jf.at("overlap").get<std::size_t>();
                if (!jf.at("scores").is_null()) f.scores = scores_from_json(jf.at("scores"));
                f.error = jf.value("error", "");
                c.folds.push_back(std::move(f));
            }
            r.cells.push_back(std::move(c));
        }
    } catch (const Json::exception& e) {
        throw ParseError("<report>", 0, e.what());
    }
    return r;
}

} // namespace erreg
