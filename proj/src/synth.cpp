#include "osc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "osc/geometry.hpp"

namespace osc {

namespace {

constexpr double kAnnulusInnerRatio = 0.5;
constexpr double kVesselPeriods = 1.5;

double vessel_centerline(double x, std::size_t width, std::size_t height) {
    const double amplitude = static_cast<double>(height) / 6.0;
    const double cy = (static_cast<double>(height) - 1.0) / 2.0;
    return cy + amplitude * std::sin(2.0 * std::numbers::pi * kVesselPeriods * x / static_cast<double>(width));
}

double parameter_limit(ShapeKind kind, std::size_t width, std::size_t height) {
    switch (kind) {
        case ShapeKind::Disc: return std::hypot(static_cast<double>(width), static_cast<double>(height));
        // Past the canvas the hole keeps growing while the rim is clipped, so
        // the count is only monotone while the outer circle fits.
        case ShapeKind::Annulus: return (static_cast<double>(std::min(width, height)) - 1.0) / 2.0;
        case ShapeKind::VesselCurve: return static_cast<double>(height);
    }
    return 0.0;
}

ScalarField box_blur3(const BinaryMask& mask) {
    const std::size_t w = mask.width();
    const std::size_t h = mask.height();
    ScalarField out(w, h);
    auto at = [&](std::ptrdiff_t x, std::ptrdiff_t y) {
        x = std::clamp<std::ptrdiff_t>(x, 0, static_cast<std::ptrdiff_t>(w) - 1);
        y = std::clamp<std::ptrdiff_t>(y, 0, static_cast<std::ptrdiff_t>(h) - 1);
        return mask(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) ? 1.0 : 0.0;
    };
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            double sum = 0.0;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    sum += at(static_cast<std::ptrdiff_t>(x) + dx, static_cast<std::ptrdiff_t>(y) + dy);
                }
            }
            out(x, y) = sum / 9.0;
        }
    }
    return out;
}

}  // namespace

std::string_view to_string(ShapeKind kind) noexcept {
    switch (kind) {
        case ShapeKind::Disc: return "disc";
        case ShapeKind::Annulus: return "annulus";
        case ShapeKind::VesselCurve: return "vessel-curve";
    }
    return "unknown";
}

ShapeKind shape_kind_from_string(std::string_view name) {
    if (name == "disc") return ShapeKind::Disc;
    if (name == "annulus") return ShapeKind::Annulus;
    if (name == "vessel-curve") return ShapeKind::VesselCurve;
    throw Error(ErrorKind::InvalidArgument, "unknown shape kind '" + std::string(name) + "'");
}

void SynthSpec::validate() const {
    if (width == 0 || height == 0) {
        throw Error(ErrorKind::InvalidArgument, "synthetic image needs positive dimensions");
    }
    if (!(fg_fraction > 0.0 && fg_fraction <= 0.5)) {
        throw Error(ErrorKind::InvalidArgument, "fg_fraction must lie in (0, 0.5]");
    }
    if (!(noise >= 0.0 && noise <= 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "noise must lie in [0, 1]");
    }
    if (!(noise_band > 0.0) || !std::isfinite(noise_band)) {
        throw Error(ErrorKind::InvalidArgument, "noise_band must be positive");
    }
}

BinaryMask rasterize_shape(ShapeKind kind, std::size_t width, std::size_t height, double parameter) {
    BinaryMask mask(width, height);
    const double cx = (static_cast<double>(width) - 1.0) / 2.0;
    const double cy = (static_cast<double>(height) - 1.0) / 2.0;
    for (std::size_t y = 0; y < height; ++y) {
        for (std::size_t x = 0; x < width; ++x) {
            const double dx = static_cast<double>(x) - cx;
            const double dy = static_cast<double>(y) - cy;
            const double r2 = dx * dx + dy * dy;
            bool inside = false;
            switch (kind) {
                case ShapeKind::Disc:
                    inside = r2 <= parameter * parameter;
                    break;
                case ShapeKind::Annulus: {
                    const double inner = kAnnulusInnerRatio * parameter;
                    inside = r2 <= parameter * parameter && r2 >= inner * inner;
                    break;
                }
                case ShapeKind::VesselCurve:
                    inside = std::abs(static_cast<double>(y) -
                                      vessel_centerline(static_cast<double>(x), width, height)) <= parameter;
                    break;
            }
            mask.set(x, y, inside);
        }
    }
    return mask;
}

SynthSample synth_generate(const SynthSpec& spec) {
    spec.validate();
    const std::size_t w = spec.width;
    const std::size_t h = spec.height;
    const double total = static_cast<double>(w * h);
    const double target = spec.fg_fraction * total;

    // Foreground count grows monotonically with the parameter; bracket the
    // jump across the target and keep whichever side lands closer.
    auto count = [&](double p) { return static_cast<double>(rasterize_shape(spec.kind, w, h, p).count()); };
    double lo = 0.0;
    double hi = parameter_limit(spec.kind, w, h);
    if (count(hi) < target) {
        throw Error(ErrorKind::InfeasibleSpec, "shape cannot cover the requested foreground fraction");
    }
    for (int iter = 0; iter < 100; ++iter) {
        const double mid = 0.5 * (lo + hi);
        (count(mid) >= target ? hi : lo) = mid;
    }
    const double below = count(lo);
    const double above = count(hi);
    const double parameter = (target - below) < (above - target) && below > 0.0 ? lo : hi;

    SynthSample sample;
    const auto truth_mask = rasterize_shape(spec.kind, w, h, parameter);
    sample.shape_parameter = parameter;
    sample.achieved_fraction = static_cast<double>(truth_mask.count()) / total;
    if (std::abs(sample.achieved_fraction - spec.fg_fraction) > kSynthFractionTolerance * spec.fg_fraction ||
        truth_mask.count() == 0 || truth_mask.count() == truth_mask.size()) {
        throw Error(ErrorKind::InfeasibleSpec, "closest " + std::string(to_string(spec.kind)) + " covers " +
                                                   std::to_string(sample.achieved_fraction) + " of the image, target " +
                                                   std::to_string(spec.fg_fraction));
    }

    std::vector<std::uint16_t> labels(truth_mask.size());
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = truth_mask[i] ? 1 : 0;
    sample.truth = LabelMask(w, h, 2, labels);

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> pixel_noise(0.0, kSynthPixelNoise);
    sample.image = box_blur3(truth_mask);
    for (auto& v : sample.image.values()) {
        v = std::clamp(v + pixel_noise(rng), 0.0, 1.0);
    }

    if (spec.noise > 0.0) {
        const auto sdf = signed_distance(truth_mask);
        std::bernoulli_distribution flip(spec.noise);
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (std::abs(sdf.phi[i]) <= spec.noise_band && flip(rng)) {
                labels[i] = labels[i] ? 0 : 1;
            }
        }
    }
    sample.noisy = LabelMask(w, h, 2, std::move(labels));
    return sample;
}

}  // namespace osc
