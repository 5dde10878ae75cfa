#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "osc/geometry.hpp"
#include "osc/grid.hpp"

namespace osc {

/// How the distance field inside the band and length terms follows P.
///  Detached: phi = signed_distance(P_c >= 0.5), constant w.r.t. P.
///  Soft:     phi = 2 P_c - 1 for the residual weights and the length term;
///            the band and descriptors still come from the detached field.
enum class PhiMode { Detached, Soft };

std::string_view to_string(PhiMode mode) noexcept;
PhiMode phi_mode_from_string(std::string_view name);

struct LossConfig {
    double alpha = 0.5;  // region (cross-entropy) weight
    double beta = 0.3;   // offset-band weight
    double eta = 0.2;    // contour-length weight
    double lambda1 = 1.0;
    double lambda2 = 1.0;
    double band_half_width = 5.0;
    double eps = 1.0;
    PhiMode phi_mode = PhiMode::Detached;
    double tv_delta = 1e-8;
    double focal_gamma = 2.0;
    double focal_alpha = 0.25;
    double clamp = 1e-7;

    /// Throws InvalidArgument naming the first violated constraint.
    void validate() const;
    friend bool operator==(const LossConfig&, const LossConfig&) = default;
};

// Baseline losses on a foreground probability plane against a binary target.
// Probabilities are clipped to [clamp, 1 - clamp] before taking logs.

[[nodiscard]] double bce(std::span<const double> probs, const BinaryMask& truth, double clamp);
[[nodiscard]] double bce(const ScalarField& probs, const BinaryMask& truth, double clamp);
[[nodiscard]] std::vector<double> bce_grad(std::span<const double> probs, const BinaryMask& truth, double clamp);

/// 1 - (2 sum(TP) + smooth) / (sum(T + P) + smooth)
[[nodiscard]] double dice_loss(std::span<const double> probs, const BinaryMask& truth, double smooth);
[[nodiscard]] double dice_loss(const ScalarField& probs, const BinaryMask& truth, double smooth);
[[nodiscard]] std::vector<double> dice_grad(std::span<const double> probs, const BinaryMask& truth, double smooth);

/// Focal loss with a leading minus so that it is non-negative and reduces to
/// BCE for gamma = 0, alpha = 1.
[[nodiscard]] double focal_loss(std::span<const double> probs, const BinaryMask& truth, double gamma, double alpha,
                                double clamp);
[[nodiscard]] double focal_loss(const ScalarField& probs, const BinaryMask& truth, double gamma, double alpha,
                                double clamp);
[[nodiscard]] std::vector<double> focal_grad(std::span<const double> probs, const BinaryMask& truth, double gamma,
                                             double alpha, double clamp);

/// Multi-class cross-entropy, mean over pixels. Throws NotNormalized unless
/// every pixel of `probs` sums to one and `truth` is one-hot.
[[nodiscard]] double ce_multiclass(const ProbMap& probs, const ProbMap& truth, double clamp);

struct BandDescriptors {
    double b_minus = 0.0;  // Heaviside-weighted mean of T over the band (inside side)
    double b_plus = 0.0;   // (1 - H)-weighted mean of T over the band (outside side)
    bool minus_fallback = false;  // inner side empty, b_minus is the global mean of T
    bool plus_fallback = false;   // outer side empty, b_plus is the global mean of T
};

/// Descriptors of the target over the band, weighted by H_eps(phi).
[[nodiscard]] BandDescriptors band_descriptors(std::span<const double> target, std::span<const double> phi,
                                               const BandMask& band, double eps);
[[nodiscard]] BandDescriptors band_descriptors(const ScalarField& target, const SignedDistanceField& sdf,
                                               const BandMask& band, double eps);

struct BandTerm {
    double value = 0.0;
    BandDescriptors descriptors;
    std::size_t band_pixels = 0;
    bool empty_band = false;
};

/// Offset-band term: mean over band pixels of
///   lambda1 |P - b-|^2 H(phi) + lambda2 |P - b+|^2 (1 - H(phi)),
/// with the descriptors taken from the target. Empty band gives 0, flagged.
[[nodiscard]] BandTerm osc_l2(const ScalarField& probs, const ScalarField& target, const SignedDistanceField& sdf,
                              const BandMask& band, const LossConfig& cfg);

/// Contour-length term: mean over pixels of sqrt(Dx^2 + Dy^2 + delta^2) - delta
/// with forward differences and replicated boundary (last row/column difference 0).
[[nodiscard]] double osc_l3(const ScalarField& phi, double tv_delta);
[[nodiscard]] double osc_l3(std::span<const double> phi, const Shape& shape, double tv_delta);
/// Gradient of osc_l3 with respect to each phi value.
[[nodiscard]] std::vector<double> osc_l3_grad(std::span<const double> phi, const Shape& shape, double tv_delta);

struct ClassTerms {
    std::size_t class_index = 0;
    double l2 = 0.0;
    double l3 = 0.0;
    std::size_t band_pixels = 0;
    BandDescriptors descriptors;
    bool degenerate = false;  // thresholded prediction is all-one or all-zero
    bool empty_band = false;
};

struct LossBreakdown {
    double l1 = 0.0;
    double l2 = 0.0;
    double l3 = 0.0;
    double total = 0.0;
    /// dL/dP, one field per class.
    std::vector<ScalarField> gradient;
    std::size_t band_pixels = 0;
    /// One entry per foreground class (1..K-1).
    std::vector<ClassTerms> classes;
};

/// L = alpha L1 + beta L2 + eta L3. L2 and L3 are evaluated one-vs-rest for
/// each foreground class and averaged over the K - 1 foreground classes.
[[nodiscard]] LossBreakdown osc_loss(const ProbMap& probs, const LabelMask& truth, const LossConfig& cfg);
[[nodiscard]] std::vector<ScalarField> osc_grad(const ProbMap& probs, const LabelMask& truth, const LossConfig& cfg);

namespace detail {
/// osc_loss without the normalization precondition; finite differences
/// evaluate the loss at perturbed, slightly unnormalized maps.
LossBreakdown osc_evaluate(const ProbMap& probs, const LabelMask& truth, const LossConfig& cfg, bool with_gradient);
}  // namespace detail

enum class LossKind { Bce, Dice, Focal, Osc };

std::string_view to_string(LossKind kind) noexcept;
LossKind loss_kind_from_string(std::string_view name);

/// Smoothing constant used when Dice drives optimization.
inline constexpr double kDiceSmooth = 1.0;

struct LossEvaluation {
    LossKind kind = LossKind::Osc;
    double total = 0.0;
    std::vector<ScalarField> gradient;
    std::optional<LossBreakdown> breakdown;  // set for LossKind::Osc
};

/// Baselines are averaged one-vs-rest over the foreground classes.
[[nodiscard]] LossEvaluation evaluate_loss(LossKind kind, const ProbMap& probs, const LabelMask& truth,
                                           const LossConfig& cfg);

}  // namespace osc
