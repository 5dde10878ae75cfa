#pragma once

#include <cstdint>
#include <string_view>

#include "osc/grid.hpp"

namespace osc {

enum class ShapeKind { Disc, Annulus, VesselCurve };

std::string_view to_string(ShapeKind kind) noexcept;
ShapeKind shape_kind_from_string(std::string_view name);

/// Synthetic imbalanced segmentation target. The default foreground ratio
/// is a small lesion occupying 2.4% of the image.
struct SynthSpec {
    ShapeKind kind = ShapeKind::Disc;
    std::size_t width = 64;
    std::size_t height = 64;
    double fg_fraction = 0.024;
    /// Probability of flipping a label within noise_band px of the true contour.
    double noise = 0.0;
    double noise_band = 5.0;
    std::uint64_t seed = 0;

    void validate() const;
    friend bool operator==(const SynthSpec&, const SynthSpec&) = default;
};

inline constexpr double kSynthFractionTolerance = 0.10;  // relative
inline constexpr double kSynthPixelNoise = 0.1;

struct SynthSample {
    ScalarField image;
    LabelMask truth;
    LabelMask noisy;
    /// Shape parameter hitting the target ratio: radius for disc and annulus
    /// (outer radius), half thickness for vessel-curve.
    double shape_parameter = 0.0;
    double achieved_fraction = 0.0;
};

/// Rasterizes the shape with the given parameter (see SynthSample).
[[nodiscard]] BinaryMask rasterize_shape(ShapeKind kind, std::size_t width, std::size_t height, double parameter);

/// Throws InfeasibleSpec if no shape parameter lands within the tolerance.
[[nodiscard]] SynthSample synth_generate(const SynthSpec& spec);

}  // namespace osc
