#include <CLI11.hpp>

#include <unistd.h>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "erreg/deep_bn.hpp"
#include "erreg/error.hpp"
#include "erreg/eval.hpp"
#include "erreg/learning.hpp"
#include "erreg/manifest.hpp"
#include "erreg/prompt.hpp"
#include "erreg/records.hpp"
#include "erreg/synth.hpp"
#include "json_util.hpp"

using namespace erreg;
namespace fs = std::filesystem;

namespace {

struct MaskFlags {
    bool no_personal = false;
    bool no_situational = false;
    bool no_transcript = false;
    bool no_nonverbal = false;
    bool no_introspection = false;
    bool only_nonverbal = false;
    bool only_introspection = false;

    void add(CLI::App* cmd) {
        cmd->add_flag("--no-personal", no_personal, "Drop the personal context block");
        cmd->add_flag("--no-situational", no_situational, "Drop the situational block (and with it the transcript)");
        cmd->add_flag("--no-transcript", no_transcript, "Keep the situation description, drop the dialogue");
        cmd->add_flag("--no-nonverbal", no_nonverbal, "Drop nonverbal behavior");
        cmd->add_flag("--no-introspection", no_introspection, "Drop verbalized introspection");
        cmd->add_flag("--only-nonverbal", only_nonverbal, "Nonverbal behavior only");
        cmd->add_flag("--only-introspection", only_introspection, "Verbalized introspection only");
    }

    bool any() const {
        return no_personal || no_situational || no_transcript || no_nonverbal || no_introspection || only_nonverbal ||
               only_introspection;
    }

    ModalityMask mask() const {
        if (only_nonverbal && only_introspection) {
            throw UsageError("--only-nonverbal and --only-introspection are mutually exclusive");
        }
        if (only_nonverbal) return mask_for(MaskRow::OnlyNonverbal, false);
        if (only_introspection) return mask_for(MaskRow::OnlyIntrospection, true);
        ModalityMask m;
        m.include_personal_context = !no_personal;
        m.include_situational_context = !no_situational;
        m.include_transcript = !no_transcript && !no_situational;
        m.include_nonverbal = !no_nonverbal;
        m.include_introspection = !no_introspection;
        return m;
    }
};

struct Context {
    std::vector<std::string> argv;
    std::string manifest_path;
    RunManifest manifest;
};

AnnotationSchema schema_arg(const std::string& path) { return path.empty() ? default_schema() : load_schema(path); }

Corpus corpus_arg(const std::string& corpus, const std::string& schema, Context& ctx) {
    ctx.manifest.inputs.push_back(corpus);
    ctx.manifest.config_hashes["corpus"] = hash_file(corpus);
    if (!schema.empty()) {
        ctx.manifest.inputs.push_back(schema);
        ctx.manifest.config_hashes["schema"] = hash_file(schema);
    }
    return load_corpus(corpus, schema_arg(schema));
}

void emit(const std::string& out, const std::string& bytes, Context& ctx) {
    if (out.empty() || out == "-") {
        std::cout << bytes;
        std::cout.flush();
        return;
    }
    detail::write_file(out, bytes);
    ctx.manifest.outputs.push_back(out);
}

void write_manifest(Context& ctx) {
    ctx.manifest.finished_at = utc_timestamp();
    const auto text = to_json(ctx.manifest).dump(2) + "\n";
    std::string path = ctx.manifest_path;
    if (path.empty() && !ctx.manifest.outputs.empty()) path = ctx.manifest.outputs.front() + ".manifest.json";
    if (path.empty() || path == "-") {
        std::cerr << text;
    } else {
        detail::write_file(path, text);
    }
}

std::string number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string describe_scores(const Scores& s) {
    std::ostringstream o;
    o << "records: " << s.n << "\n";
    o << "overall accuracy: " << number(s.accuracy) << "\n";
    o << "weighted F1: " << number(s.weighted_f1) << "\n";
    for (std::size_t c = 0; c < kNumStrategies; ++c) {
        const auto& pc = s.per_class[c];
        o << "  " << display_name(strategy_at(c)) << ": accuracy " << number(pc.accuracy) << ", F1 " << number(pc.f1)
          << ", support " << pc.support << "\n";
    }
    return o.str();
}

std::vector<ModalityMask> parse_masks(const std::string& spec) {
    if (spec == "ablation") return ablation_masks();
    if (spec == "all") return {mask_for(MaskRow::All, true), mask_for(MaskRow::All, false)};
    std::vector<ModalityMask> out;
    std::stringstream ss(spec);
    std::string key;
    while (std::getline(ss, key, ',')) {
        try {
            out.push_back(ModalityMask::from_key(key));
        } catch (const Error& e) {
            throw UsageError("bad mask '" + key + "': " + e.what());
        }
    }
    if (out.empty()) throw UsageError("empty --masks list");
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Emotion-regulation recognition pipeline: synthetic corpora, prompt datasets, Bayesian network "
                 "baseline and leave-one-participant-out evaluation."};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));
    Context ctx;
    for (int i = 0; i < argc; ++i) ctx.argv.emplace_back(argv[i]);
    app.add_option("--manifest", ctx.manifest_path,
                   "Where to write the run manifest (default: <out>.manifest.json, or stderr)");

    std::string schema, corpus, out, format = "markdown";

    // gen-synthetic
    auto* gen = app.add_subcommand("gen-synthetic", "Sample a synthetic corpus from the planted network");
    std::string gen_config;
    std::optional<std::uint64_t> seed;
    std::optional<int> participants, frames_per_session;
    bool paper_proportions = false;
    gen->add_option("--config", gen_config, "Generator config JSON")->check(CLI::ExistingFile);
    gen->add_option("--seed", seed, "Random seed (overrides the config)");
    gen->add_flag("--paper-proportions", paper_proportions, "Match the reference class histogram exactly");
    gen->add_option("--participants", participants, "Number of participants");
    gen->add_option("--frames-per-session", frames_per_session, "Frames per session");
    gen->add_option("--schema", schema, "Annotation schema JSON")->check(CLI::ExistingFile);
    gen->add_option("-o,--out", out, "Corpus JSONL (default stdout)");

    // validate
    auto* val = app.add_subcommand("validate", "Check a corpus against the schema and summarize it");
    val->add_option("--corpus", corpus, "Corpus JSONL")->required()->check(CLI::ExistingFile);
    val->add_option("--schema", schema, "Annotation schema JSON")->check(CLI::ExistingFile);

    // compile-prompts
    auto* cp = app.add_subcommand("compile-prompts", "Compile frames into (context, prompt) dataset records");
    std::string templates;
    bool no_labels = false;
    MaskFlags cp_mask;
    cp->add_option("--corpus", corpus, "Corpus JSONL")->required()->check(CLI::ExistingFile);
    cp->add_option("--schema", schema, "Annotation schema JSON")->check(CLI::ExistingFile);
    cp->add_option("--templates", templates, "Prompt template JSON")->check(CLI::ExistingFile);
    cp->add_flag("--no-labels", no_labels, "Withhold labels (inference export)");
    cp->add_option("-o,--out", out, "Dataset JSONL (default stdout)");
    cp_mask.add(cp);

    // train-bn
    auto* tb = app.add_subcommand("train-bn", "Fit the Bayesian network CPTs");
    double alpha = 1.0;
    std::string edges;
    bool em = false;
    std::uint64_t em_seed = 0;
    tb->add_option("--corpus", corpus, "Training corpus JSONL")->required()->check(CLI::ExistingFile);
    tb->add_option("--schema", schema, "Annotation schema JSON")->check(CLI::ExistingFile);
    tb->add_option("--alpha", alpha, "Laplace smoothing")->check(CLI::NonNegativeNumber);
    tb->add_option("--edges", edges, "Edge list JSON replacing the default structure")->check(CLI::ExistingFile);
    tb->add_flag("--em", em, "Hard EM for the latent emotion nodes");
    tb->add_option("--seed", em_seed, "Seed for the EM starting point");
    tb->add_option("-o,--out", out, "Network JSON (default stdout)");

    // predict-bn
    auto* pb = app.add_subcommand("predict-bn", "Predict the regulation strategy for every frame");
    std::string net_path;
    MaskFlags pb_mask;
    pb->add_option("--net", net_path, "Fitted network JSON")->required()->check(CLI::ExistingFile);
    pb->add_option("--corpus", corpus, "Corpus JSONL")->required()->check(CLI::ExistingFile);
    pb->add_option("--schema", schema, "Annotation schema JSON")->check(CLI::ExistingFile);
    pb->add_option("-o,--out", out, "Predictions JSONL (default stdout)");
    pb_mask.add(pb);

    // eval-loso
    auto* ev = app.add_subcommand("eval-loso", "Leave-one-participant-out evaluation over backends and masks");
    std::vector<std::string> backends;
    std::string masks = "ablation", workdir, report_json, adapter_config;
    int workers = 1;
    MaskFlags ev_mask;
    ev->add_option("--corpus", corpus, "Corpus JSONL")->required()->check(CLI::ExistingFile);
    ev->add_option("--schema", schema, "Annotation schema JSON")->check(CLI::ExistingFile);
    ev->add_option("--backend", backends, "bn, mock:leak, mock:majority or adapter:<command> (repeatable)");
    ev->add_option("--masks", masks, "ablation (12 rows), all (with/without introspection) or comma-separated mask keys");
    ev->add_option("--workers", workers, "Concurrent jobs")->check(CLI::PositiveNumber);
    ev->add_option("--workdir", workdir, "Per-cell working directories (default: a temporary directory)");
    ev->add_option("--templates", templates, "Prompt template JSON for adapter exports")->check(CLI::ExistingFile);
    ev->add_option("--alpha", alpha, "Laplace smoothing for the bn backend")->check(CLI::NonNegativeNumber);
    ev->add_option("--edges", edges, "Edge list JSON for the bn backend")->check(CLI::ExistingFile);
    ev->add_option("--adapter-config", adapter_config, "Config file passed to adapter train")->check(CLI::ExistingFile);
    ev->add_option("--format", format, "markdown, csv or json");
    ev->add_option("-o,--out", out, "Rendered report (default stdout)");
    ev->add_option("--report-json", report_json, "Also write the full report JSON here");
    ev_mask.add(ev);

    // score
    auto* sc = app.add_subcommand("score", "Score a predictions file against truth labels");
    std::string truths, predictions;
    std::string score_format = "text";
    sc->add_option("--truths", truths, "Dataset with labels or predictions file")->required()->check(CLI::ExistingFile);
    sc->add_option("--predictions", predictions, "Predictions JSONL")->required()->check(CLI::ExistingFile);
    sc->add_option("--format", score_format, "text or json");
    sc->add_option("-o,--out", out, "Output (default stdout)");

    // report
    auto* rp = app.add_subcommand("report", "Render a saved report JSON");
    std::string in_path;
    rp->add_option("--in", in_path, "Report JSON from eval-loso --report-json")->required()->check(CLI::ExistingFile);
    rp->add_option("--format", format, "markdown, csv or json");
    rp->add_option("-o,--out", out, "Output (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    ctx.manifest.command_line = ctx.argv;
    ctx.manifest.started_at = utc_timestamp();
    auto* cmd = app.get_subcommands().front();
    ctx.manifest.details["command"] = cmd->get_name();

    try {
        if (cmd == gen) {
            GenConfig cfg;
            if (!gen_config.empty()) {
                cfg = load_gen_config(gen_config);
                ctx.manifest.inputs.push_back(gen_config);
                ctx.manifest.config_hashes["gen_config"] = hash_file(gen_config);
            }
            if (!schema.empty()) {
                cfg.schema = load_schema(schema);
                ctx.manifest.config_hashes["schema"] = hash_file(schema);
            }
            if (seed) cfg.seed = *seed;
            if (participants) cfg.n_participants = *participants;
            if (frames_per_session) cfg.frames_per_session = *frames_per_session;
            if (paper_proportions) cfg.target_histogram = kPaperHistogram;
            if (!cfg.frames_per_session && !cfg.target_histogram) {
                throw UsageError("give --frames-per-session, --paper-proportions or a config that sets one");
            }
            ctx.manifest.seeds["generator"] = cfg.seed;
            const auto c = generate_corpus(cfg);
            emit(out, corpus_to_jsonl(c), ctx);
            ctx.manifest.details["frames"] = c.frame_count();
            ctx.manifest.details["sessions"] = c.sessions.size();
        } else if (cmd == val) {
            const auto c = corpus_arg(corpus, schema, ctx);
            std::size_t with_intro = 0;
            for (const auto& s : c.sessions) {
                for (const auto& f : s.frames) with_intro += f.introspection ? 1 : 0;
            }
            const auto& t = *c.schema.mindedness.thresholds;
            std::cout << "corpus: " << corpus << "\n"
                      << "participants: " << c.participants().size() << "\n"
                      << "sessions: " << c.sessions.size() << "\n"
                      << "frames: " << c.frame_count() << "\n"
                      << "complete: " << (c.is_complete() ? "yes" : "no") << "\n"
                      << "mindedness thresholds: " << number(t[0]) << ", " << number(t[1]) << "\n"
                      << "frames with introspection: " << with_intro << "\n"
                      << "label histogram:\n";
            const auto hist = class_histogram(c);
            for (std::size_t k = 0; k < kNumStrategies; ++k) {
                std::cout << "  " << display_name(strategy_at(k)) << ": " << hist[k] << "\n";
            }
        } else if (cmd == cp) {
            const auto c = corpus_arg(corpus, schema, ctx);
            const auto tpl = templates.empty() ? default_templates() : load_templates(templates);
            if (!templates.empty()) ctx.manifest.config_hashes["templates"] = hash_file(templates);
            const auto mask = cp_mask.mask();
            mask.validate();
            const auto records = compile_corpus(c, tpl, mask, !no_labels);
            std::size_t unavailable = 0;
            for (const auto& r : records) unavailable += r.introspection_unavailable ? 1 : 0;
            if (unavailable) {
                std::cerr << "warning: " << unavailable << " frames carry no introspection; block omitted\n";
            }
            std::ostringstream o;
            write_dataset(records, o);
            emit(out, o.str(), ctx);
            ctx.manifest.details["mask"] = mask.key();
            ctx.manifest.details["records"] = records.size();
            ctx.manifest.details["introspection_unavailable"] = unavailable;
        } else if (cmd == tb) {
            const auto c = corpus_arg(corpus, schema, ctx);
            std::optional<EdgeList> el;
            if (!edges.empty()) {
                el = load_edge_list(edges);
                ctx.manifest.config_hashes["edges"] = hash_file(edges);
            }
            const auto structure = build_deep_bn(c.schema, el);
            BayesNet net;
            if (em) {
                ctx.manifest.seeds["em"] = em_seed;
                auto r = fit_em(randomize_parameters(structure, em_seed), c, alpha);
                ctx.manifest.details["em_iterations"] = r.iterations;
                ctx.manifest.details["em_converged"] = r.converged;
                net = std::move(r.net);
            } else {
                net = fit(structure, c, alpha);
            }
            ctx.manifest.details["alpha"] = alpha;
            emit(out, to_json(net).dump(2) + "\n", ctx);
        } else if (cmd == pb) {
            const auto c = corpus_arg(corpus, schema, ctx);
            const auto net = load_net(net_path);
            ctx.manifest.inputs.push_back(net_path);
            ctx.manifest.config_hashes["net"] = hash_file(net_path);
            check_regulation_node(net);
            const auto mask = pb_mask.mask();
            mask.validate();
            std::vector<Prediction> preds;
            for (const auto& s : c.sessions) {
                for (const auto& f : s.frames) preds.push_back({f.record_id(), predict(net, f, s, mask).label, "", ""});
            }
            std::ostringstream o;
            write_predictions(preds, o);
            emit(out, o.str(), ctx);
            ctx.manifest.details["mask"] = mask.key();
        } else if (cmd == ev) {
            const auto fmt = parse_report_format(format);
            if (!fmt) throw UsageError("unknown --format '" + format + "'");
            const auto c = corpus_arg(corpus, schema, ctx);
            if (backends.empty()) backends = {"bn"};
            std::optional<EdgeList> el;
            if (!edges.empty()) el = load_edge_list(edges);
            std::vector<std::unique_ptr<Backend>> owned;
            std::vector<Backend*> ptrs;
            for (const auto& b : backends) {
                owned.push_back(make_backend(b, alpha, el, adapter_config.empty() ? std::nullopt : std::optional<fs::path>(adapter_config)));
                ptrs.push_back(owned.back().get());
            }
            AblationOptions opts;
            opts.workers = workers;
            bool temporary = workdir.empty();
            opts.workdir = temporary ? fs::temp_directory_path() / ("erreg-" + hash_text(corpus).substr(8) +
                                                                     "-" + std::to_string(::getpid()))
                                     : fs::path(workdir);
            if (!templates.empty()) opts.templates = load_templates(templates);
            const auto mask_list = ev_mask.any() ? std::vector<ModalityMask>{ev_mask.mask()} : parse_masks(masks);
            const auto report = run_ablation(c, ptrs, mask_list, make_loso(c), opts);
            if (temporary) fs::remove_all(opts.workdir);
            emit(out, render_report(report, *fmt), ctx);
            if (!report_json.empty()) {
                detail::write_file(report_json, render_report(report, ReportFormat::Json));
                ctx.manifest.outputs.push_back(report_json);
            }
            Json cells = Json::array();
            for (const auto& cell : report.cells) {
                cells.push_back({{"backend", cell.backend},
                                 {"mask", cell.mask.key()},
                                 {"status", cell_status_name(cell.status)},
                                 {"error", cell.error}});
                if (cell.status == CellStatus::Failed) {
                    std::cerr << "cell " << cell.backend << " / " << cell.mask.row_name() << " failed: " << cell.error << "\n";
                }
            }
            ctx.manifest.details["cells"] = cells;
            ctx.manifest.details["workers"] = workers;
            write_manifest(ctx);
            return report.any_failed() ? 3 : 0;
        } else if (cmd == sc) {
            const auto truth = load_labels(truths);
            const auto preds = load_predictions(predictions);
            ctx.manifest.inputs = {truths, predictions};
            std::map<std::string, StrategyLabel> by_id;
            for (const auto& p : preds) {
                if (!p.predicted_label) {
                    throw BackendError("record " + p.record_id + " has no predicted label: " + p.error);
                }
                by_id[p.record_id] = *p.predicted_label;
            }
            if (by_id.size() != truth.size()) {
                throw ValidationError(std::to_string(truth.size()) + " truth records but " +
                                      std::to_string(by_id.size()) + " predictions");
            }
            std::vector<StrategyLabel> t, p;
            for (const auto& r : truth) {
                auto it = by_id.find(r.record_id);
                if (it == by_id.end()) throw ValidationError("no prediction for " + r.record_id);
                if (!r.predicted_label) throw ValidationError("truth record " + r.record_id + " has no label");
                t.push_back(*r.predicted_label);
                p.push_back(it->second);
            }
            const auto s = score(t, p);
            if (score_format == "json") {
                emit(out, to_json(s).dump(2) + "\n", ctx);
            } else if (score_format == "text") {
                emit(out, describe_scores(s), ctx);
            } else {
                throw UsageError("unknown --format '" + score_format + "'");
            }
        } else if (cmd == rp) {
            const auto fmt = parse_report_format(format);
            if (!fmt) throw UsageError("unknown --format '" + format + "'");
            ctx.manifest.inputs.push_back(in_path);
            const auto report = report_from_json(detail::load_json_file(in_path));
            emit(out, render_report(report, *fmt), ctx);
        }
        write_manifest(ctx);
        return 0;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n" << cmd->help();
        return 1;
    } catch (const BackendError& e) {
        std::cerr << "backend error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
