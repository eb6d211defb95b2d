#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "erreg/bayesnet.hpp"
#include "erreg/corpus.hpp"
#include "erreg/mask.hpp"
#include "erreg/metrics.hpp"
#include "erreg/prompt.hpp"

namespace erreg {

struct Fold {
    std::string test_participant;
    std::vector<std::string> train_participants;
};

struct FoldPlan {
    std::vector<Fold> folds;
};

// Leave-one-participant-out, folds in participant-id order. Throws
// ValidationError with fewer than two participants.
FoldPlan make_loso(const Corpus& corpus);

// Participant ids present on both sides.
std::vector<std::string> participant_overlap(const Corpus& train, const Corpus& test);

struct CellInput {
    const Corpus& train;
    const Corpus& test;
    const ModalityMask& mask;
    const PromptTemplateSet& templates;
    std::filesystem::path workdir; // exclusive to this cell and fold
};

class Backend {
public:
    virtual ~Backend() = default;
    virtual std::string name() const = 0;
    virtual bool supports(const ModalityMask&) const { return true; }
    // Trains on input.train, predicts every frame of input.test and returns the
    // path of the predictions file it wrote. Throws BackendError on failure.
    virtual std::filesystem::path run(const CellInput& input) = 0;
};

// In-process BN: fit with Laplace smoothing (hard EM when the training frames
// carry no introspection), then MAP prediction under the mask. Not applicable
// to masks that keep the situational block but drop the transcript.
class BnBackend : public Backend {
public:
    explicit BnBackend(double alpha = 1.0, std::optional<EdgeList> edges = std::nullopt)
        : alpha_(alpha), edges_(std::move(edges)) {}
    std::string name() const override { return "bn"; }
    bool supports(const ModalityMask& mask) const override;
    std::filesystem::path run(const CellInput& input) override;

private:
    double alpha_;
    std::optional<EdgeList> edges_;
};

// Echoes the hidden test labels.
class LeakBackend : public Backend {
public:
    std::string name() const override { return "mock:leak"; }
    std::filesystem::path run(const CellInput& input) override;
};

// Predicts the most frequent training label (earlier label on ties).
class MajorityBackend : public Backend {
public:
    std::string name() const override { return "mock:majority"; }
    std::filesystem::path run(const CellInput& input) override;
};

// External fine-tuning tool speaking the adapter command protocol:
//   <command> train --data train.jsonl --out <dir> --config <file>
//   <command> infer --adapter <dir> --data infer.jsonl --out predictions.jsonl
class AdapterBackend : public Backend {
public:
    explicit AdapterBackend(std::string command, std::optional<std::filesystem::path> config = std::nullopt)
        : command_(std::move(command)), config_(std::move(config)) {}
    std::string name() const override { return "adapter:" + command_; }
    std::filesystem::path run(const CellInput& input) override;

private:
    std::string command_;
    std::optional<std::filesystem::path> config_;
};

// "bn", "mock:leak", "mock:majority" or "adapter:<command>".
std::unique_ptr<Backend> make_backend(const std::string& spec, double alpha = 1.0,
                                      const std::optional<EdgeList>& edges = std::nullopt,
                                      const std::optional<std::filesystem::path>& adapter_config = std::nullopt);

// Default adapter settings written when no config file is given.
Json default_adapter_config();

enum class CellStatus { Ok, NotApplicable, Failed };

std::string_view cell_status_name(CellStatus s) noexcept;

struct FoldResult {
    std::string test_participant;
    std::size_t train_sessions = 0;
    std::size_t test_sessions = 0;
    std::size_t overlap = 0; // participants seen on both sides
    std::optional<Scores> scores;
    std::string error;
};

struct FoldMean {
    double accuracy = 0.0;
    double weighted_f1 = 0.0;
};

struct CellResult {
    std::string backend;
    ModalityMask mask;
    CellStatus status = CellStatus::Ok;
    std::string error;
    std::optional<Scores> pooled;
    std::optional<FoldMean> fold_mean;
    std::vector<FoldResult> folds;
};

struct EvalReport {
    std::vector<std::string> backends;
    std::vector<ModalityMask> masks;
    std::vector<CellResult> cells; // backend-major, masks in order

    const CellResult* find(const std::string& backend, const ModalityMask& mask) const;
    bool any_failed() const;
};

struct AblationOptions {
    int workers = 1;
    std::filesystem::path workdir = "erreg-work";
    PromptTemplateSet templates = default_templates();
};

// Runs every (backend, mask, fold) job, scores each fold against the test
// labels and pools the confusion matrices per cell. A failing fold marks its
// cell Failed and the run continues.
EvalReport run_ablation(const Corpus& corpus, const std::vector<Backend*>& backends,
                        const std::vector<ModalityMask>& masks, const FoldPlan& plan,
                        const AblationOptions& options = {});

Json to_json(const EvalReport& r);
EvalReport report_from_json(const Json& j);

enum class ReportFormat { Markdown, Csv, Json };
std::optional<ReportFormat> parse_report_format(std::string_view text) noexcept;
std::string render_report(const EvalReport& report, ReportFormat format);

} // namespace erreg
