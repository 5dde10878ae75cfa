#include "osc/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace osc {

namespace {

void require_nonempty(std::size_t width, std::size_t height) {
    if (width == 0 || height == 0) {
        throw Error(ErrorKind::InvalidArgument, "grid dimensions must be at least 1x1");
    }
}

}  // namespace

void require_same_shape(const Shape& a, const Shape& b, const char* what) {
    if (a != b) {
        throw Error(ErrorKind::ShapeMismatch,
                    std::string(what) + ": " + std::to_string(a.width) + "x" + std::to_string(a.height) + " vs " +
                        std::to_string(b.width) + "x" + std::to_string(b.height));
    }
}

ScalarField::ScalarField(std::size_t width, std::size_t height, double fill) : shape_{width, height} {
    require_nonempty(width, height);
    if (!std::isfinite(fill)) {
        throw Error(ErrorKind::NonFiniteValue, "fill value is not finite");
    }
    values_.assign(shape_.size(), fill);
}

ScalarField::ScalarField(std::size_t width, std::size_t height, std::vector<double> values)
    : shape_{width, height}, values_(std::move(values)) {
    require_nonempty(width, height);
    if (values_.size() != shape_.size()) {
        throw Error(ErrorKind::ShapeMismatch, "value count " + std::to_string(values_.size()) +
                                                  " does not match " + std::to_string(width) + "x" +
                                                  std::to_string(height));
    }
    finite_check(values_, shape_);
}

BinaryMask::BinaryMask(std::size_t width, std::size_t height, bool fill) : shape_{width, height} {
    require_nonempty(width, height);
    bits_.assign(shape_.size(), fill ? 1 : 0);
}

BinaryMask::BinaryMask(std::size_t width, std::size_t height, std::vector<std::uint8_t> bits)
    : shape_{width, height}, bits_(std::move(bits)) {
    require_nonempty(width, height);
    if (bits_.size() != shape_.size()) {
        throw Error(ErrorKind::ShapeMismatch, "bit count does not match mask shape");
    }
    for (auto& b : bits_) {
        b = b != 0 ? 1 : 0;
    }
}

std::size_t BinaryMask::count() const noexcept {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

LabelMask::LabelMask(std::size_t width, std::size_t height, std::size_t num_classes)
    : LabelMask(width, height, num_classes, std::vector<std::uint16_t>(width * height, 0)) {}

LabelMask::LabelMask(std::size_t width, std::size_t height, std::size_t num_classes,
                     std::vector<std::uint16_t> labels)
    : shape_{width, height}, num_classes_(num_classes), labels_(std::move(labels)) {
    require_nonempty(width, height);
    if (num_classes < 2 || num_classes > 65536) {
        throw Error(ErrorKind::InvalidArgument, "label mask needs between 2 and 65536 classes");
    }
    if (labels_.size() != shape_.size()) {
        throw Error(ErrorKind::ShapeMismatch, "label count does not match mask shape");
    }
    for (auto label : labels_) {
        if (label >= num_classes_) {
            throw Error(ErrorKind::InvalidArgument,
                        "label " + std::to_string(label) + " >= num_classes " + std::to_string(num_classes_));
        }
    }
}

void LabelMask::set(std::size_t i, std::size_t label) {
    if (label >= num_classes_) {
        throw Error(ErrorKind::InvalidArgument, "label out of range");
    }
    labels_[i] = static_cast<std::uint16_t>(label);
}

BinaryMask LabelMask::class_mask(std::size_t c) const {
    std::vector<std::uint8_t> bits(labels_.size());
    std::transform(labels_.begin(), labels_.end(), bits.begin(),
                   [c](std::uint16_t label) { return static_cast<std::uint8_t>(label == c); });
    return {shape_.width, shape_.height, std::move(bits)};
}

ProbMap::ProbMap(std::size_t width, std::size_t height, std::size_t num_classes, double fill)
    : shape_{width, height}, num_classes_(num_classes) {
    require_nonempty(width, height);
    if (num_classes < 2) {
        throw Error(ErrorKind::InvalidArgument, "probability map needs at least 2 classes");
    }
    probs_.assign(shape_.size() * num_classes, fill);
}

ProbMap ProbMap::from_foreground(const ScalarField& foreground) {
    ProbMap probs(foreground.width(), foreground.height(), 2);
    for (std::size_t i = 0; i < foreground.size(); ++i) {
        const double p = foreground[i];
        if (p < 0.0 || p > 1.0) {
            throw Error(ErrorKind::InvalidArgument, "foreground probability outside [0, 1]");
        }
        probs(i, 0) = 1.0 - p;
        probs(i, 1) = p;
    }
    probs.set_normalized(true);
    return probs;
}

std::span<const double> ProbMap::plane(std::size_t c) const {
    return std::span<const double>(probs_).subspan(c * pixels(), pixels());
}

std::span<double> ProbMap::plane(std::size_t c) {
    return std::span<double>(probs_).subspan(c * pixels(), pixels());
}

ScalarField ProbMap::channel(std::size_t c) const {
    auto p = plane(c);
    return {shape_.width, shape_.height, std::vector<double>(p.begin(), p.end())};
}

bool ProbMap::check_normalized(double tolerance) const {
    for (std::size_t i = 0; i < pixels(); ++i) {
        double sum = 0.0;
        for (std::size_t c = 0; c < num_classes_; ++c) {
            const double p = (*this)(i, c);
            if (!(p >= 0.0 && p <= 1.0)) {
                return false;
            }
            sum += p;
        }
        if (std::abs(sum - 1.0) > tolerance) {
            return false;
        }
    }
    return true;
}

ProbMap one_hot(const LabelMask& mask) {
    ProbMap probs(mask.width(), mask.height(), mask.num_classes(), 0.0);
    for (std::size_t i = 0; i < mask.size(); ++i) {
        probs(i, mask[i]) = 1.0;
    }
    probs.set_normalized(true);
    return probs;
}

LabelMask argmax(const ProbMap& probs) {
    std::vector<std::uint16_t> labels(probs.pixels());
    for (std::size_t i = 0; i < probs.pixels(); ++i) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < probs.num_classes(); ++c) {
            if (probs(i, c) > probs(i, best)) {
                best = c;
            }
        }
        labels[i] = static_cast<std::uint16_t>(best);
    }
    return {probs.width(), probs.height(), probs.num_classes(), std::move(labels)};
}

BinaryMask threshold(std::span<const double> values, const Shape& shape, double t) {
    if (!std::isfinite(t)) {
        throw Error(ErrorKind::InvalidArgument, "threshold must be finite");
    }
    std::vector<std::uint8_t> bits(values.size());
    std::transform(values.begin(), values.end(), bits.begin(),
                   [t](double v) { return static_cast<std::uint8_t>(v >= t); });
    return {shape.width, shape.height, std::move(bits)};
}

BinaryMask threshold(const ScalarField& field, double t) {
    return threshold(field.values(), field.shape(), t);
}

BinaryMask complement(const BinaryMask& mask) {
    std::vector<std::uint8_t> bits(mask.size());
    for (std::size_t i = 0; i < mask.size(); ++i) {
        bits[i] = mask[i] ? 0 : 1;
    }
    return {mask.width(), mask.height(), std::move(bits)};
}

void finite_check(std::span<const double> values, const Shape& shape) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            const std::size_t x = shape.width ? i % shape.width : 0;
            const std::size_t y = shape.width ? i / shape.width : 0;
            Error err(ErrorKind::NonFiniteValue,
                      "non-finite value at (" + std::to_string(x) + ", " + std::to_string(y) + ")");
            err.where = PixelCoord{x, y};
            throw err;
        }
    }
}

void finite_check(const ScalarField& field) { finite_check(field.values(), field.shape()); }

}  // namespace osc
