#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "osc/losses.hpp"
#include "osc/metrics.hpp"
#include "osc/synth.hpp"

namespace osc {

// ---------------------------------------------------------------------------
// Gradient verification

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::size_t entries_checked = 0;
    std::size_t entries_skipped = 0;
    /// Worst entry (pixel, class) and its two estimates.
    std::size_t worst_pixel = 0;
    std::size_t worst_class = 0;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
};

inline constexpr std::size_t kGradCheckMinEntries = 200;
inline constexpr std::size_t kGradCheckMaxEntries = 512;
inline constexpr double kGradCheckTolerance = 1e-4;

/// Central differences of the OsC total over a deterministic, evenly strided
/// sample of (pixel, class) entries, compared against osc_grad. Relative error
/// uses max(|analytic|, |numeric|, 1e-8) as denominator. Entries whose
/// perturbation would cross the 0.5 binarization threshold or a clamp edge are
/// skipped, since the loss is not differentiable there.
[[nodiscard]] GradCheckResult grad_check(const ProbMap& probs, const LabelMask& truth, const LossConfig& cfg,
                                         double h);

/// Softmax of N(0, 1) logits, deterministic in `seed`.
[[nodiscard]] ProbMap random_prob_map(std::size_t width, std::size_t height, std::size_t num_classes,
                                      std::uint64_t seed);
/// Nested centered discs: class c occupies radius min(w, h) / 4 * (K - c) / (K - 1).
[[nodiscard]] LabelMask disc_target(std::size_t width, std::size_t height, std::size_t num_classes);

// ---------------------------------------------------------------------------
// Direct logit optimization

enum class InitKind { Zero, Gaussian };

std::string_view to_string(InitKind kind) noexcept;
InitKind init_kind_from_string(std::string_view name);

struct FitConfig {
    std::size_t steps = 500;
    double learning_rate = 100.0;
    LossKind loss_kind = LossKind::Osc;
    LossConfig loss_config;
    std::uint64_t seed = 0;
    InitKind init = InitKind::Zero;
    double init_sigma = 0.1;
    std::size_t record_every = 1;
    /// Scale of the image prior added to foreground logits when an image is supplied.
    double image_gain = 4.0;

    void validate() const;
    friend bool operator==(const FitConfig&, const FitConfig&) = default;
};

struct TraceEntry {
    std::size_t step = 0;  // number of updates applied
    double loss_total = 0.0;
    /// Term breakdown, set when the loss is OsC.
    std::optional<double> l1;
    std::optional<double> l2;
    std::optional<double> l3;
    double dsc = 0.0;  // argmax prediction vs the fitted target, macro over foreground classes
};

struct FitTrace {
    double initial_loss = 0.0;
    std::vector<TraceEntry> entries;
    ProbMap final_probs;
};

[[nodiscard]] ProbMap softmax(const std::vector<std::vector<double>>& logits, const Shape& shape);

/// Plain gradient descent on per-pixel free logits; P = softmax(logits).
/// Entry s holds the loss after s updates, recorded every `record_every`
/// steps and always at the final step. Throws DivergenceDetected with the
/// step index if the loss or logits become non-finite.
[[nodiscard]] FitTrace fit_logits(const ScalarField* image, const LabelMask& truth, const FitConfig& cfg);

inline constexpr const char* kTraceCsvHeader = "step,loss_total,l1,l2,l3,dsc";
[[nodiscard]] std::string trace_to_csv(const FitTrace& trace);
/// Inverse of trace_to_csv for the recorded entries.
[[nodiscard]] std::vector<TraceEntry> parse_trace_csv(const std::string& csv);

// ---------------------------------------------------------------------------
// Batch experiments

struct ExperimentSpec {
    std::vector<LossKind> losses{LossKind::Bce, LossKind::Dice, LossKind::Focal, LossKind::Osc};
    std::vector<std::uint64_t> seeds;
    /// seed is replaced by each experiment seed.
    SynthSpec dataset;
    /// loss_kind and seed are replaced per run.
    FitConfig fit;
    /// Seed logits from the synthetic image.
    bool use_image = true;
};

struct ExperimentRow {
    LossKind loss = LossKind::Osc;
    std::uint64_t seed = 0;
    MetricsReport metrics;  // final argmax prediction vs clean truth
    std::size_t steps = 0;
    double final_loss = 0.0;
};

struct LossSummary {
    LossKind loss = LossKind::Osc;
    std::size_t runs = 0;
    double mean_dsc = 0.0;
    double mean_hau95 = 0.0;
};

struct ExperimentReport {
    std::vector<ExperimentRow> rows;  // loss order of the spec, then seed order

    [[nodiscard]] std::string to_csv() const;
    [[nodiscard]] std::vector<LossSummary> summarize() const;
    /// Human-readable summary, including whether OsC's mean Dice exceeds BCE's.
    [[nodiscard]] std::string summary_text() const;
};

inline constexpr const char* kExperimentCsvHeader = "loss,seed,dsc,jac,pre,rec,hau95,steps,final_loss";

/// Fits every (loss, seed) pair against the noisy labels of the synthetic
/// sample and scores the result against the clean truth. Runs are spread over
/// `workers` threads (0 = hardware concurrency); output does not depend on it.
[[nodiscard]] ExperimentReport run_experiment(const ExperimentSpec& spec, std::size_t workers = 0);

[[nodiscard]] std::vector<ExperimentRow> parse_experiment_csv(const std::string& csv);

}  // namespace osc
