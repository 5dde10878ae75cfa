#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "osc/error.hpp"

namespace osc {

/// Row-major 2D grid. Pixel (x, y) is column x, row y; pixel centers sit on
/// integer coordinates with unit spacing.
struct Shape {
    std::size_t width = 0;
    std::size_t height = 0;

    [[nodiscard]] std::size_t size() const noexcept { return width * height; }
    [[nodiscard]] std::size_t index(std::size_t x, std::size_t y) const noexcept { return y * width + x; }
    friend bool operator==(const Shape&, const Shape&) = default;
};

class ScalarField {
public:
    ScalarField() = default;
    ScalarField(std::size_t width, std::size_t height, double fill = 0.0);
    /// Throws NonFiniteValue if any value is NaN/Inf.
    ScalarField(std::size_t width, std::size_t height, std::vector<double> values);

    [[nodiscard]] const Shape& shape() const noexcept { return shape_; }
    [[nodiscard]] std::size_t width() const noexcept { return shape_.width; }
    [[nodiscard]] std::size_t height() const noexcept { return shape_.height; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }

    [[nodiscard]] double operator()(std::size_t x, std::size_t y) const { return values_[shape_.index(x, y)]; }
    [[nodiscard]] double& operator()(std::size_t x, std::size_t y) { return values_[shape_.index(x, y)]; }
    [[nodiscard]] double operator[](std::size_t i) const { return values_[i]; }
    [[nodiscard]] double& operator[](std::size_t i) { return values_[i]; }

    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] std::span<double> values() noexcept { return values_; }

private:
    Shape shape_;
    std::vector<double> values_;
};

class BinaryMask {
public:
    BinaryMask() = default;
    BinaryMask(std::size_t width, std::size_t height, bool fill = false);
    /// Any nonzero byte is stored as 1.
    BinaryMask(std::size_t width, std::size_t height, std::vector<std::uint8_t> bits);

    [[nodiscard]] const Shape& shape() const noexcept { return shape_; }
    [[nodiscard]] std::size_t width() const noexcept { return shape_.width; }
    [[nodiscard]] std::size_t height() const noexcept { return shape_.height; }
    [[nodiscard]] std::size_t size() const noexcept { return bits_.size(); }

    [[nodiscard]] bool operator()(std::size_t x, std::size_t y) const { return bits_[shape_.index(x, y)] != 0; }
    [[nodiscard]] bool operator[](std::size_t i) const { return bits_[i] != 0; }
    void set(std::size_t i, bool v) { bits_[i] = v ? 1 : 0; }
    void set(std::size_t x, std::size_t y, bool v) { set(shape_.index(x, y), v); }

    [[nodiscard]] std::size_t count() const noexcept;
    [[nodiscard]] std::span<const std::uint8_t> bits() const noexcept { return bits_; }

    friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

private:
    Shape shape_;
    std::vector<std::uint8_t> bits_;
};

class LabelMask {
public:
    LabelMask() = default;
    LabelMask(std::size_t width, std::size_t height, std::size_t num_classes);
    /// Throws InvalidArgument if num_classes < 2 or any label >= num_classes.
    LabelMask(std::size_t width, std::size_t height, std::size_t num_classes, std::vector<std::uint16_t> labels);

    [[nodiscard]] const Shape& shape() const noexcept { return shape_; }
    [[nodiscard]] std::size_t width() const noexcept { return shape_.width; }
    [[nodiscard]] std::size_t height() const noexcept { return shape_.height; }
    [[nodiscard]] std::size_t size() const noexcept { return labels_.size(); }
    [[nodiscard]] std::size_t num_classes() const noexcept { return num_classes_; }

    [[nodiscard]] std::size_t operator()(std::size_t x, std::size_t y) const { return labels_[shape_.index(x, y)]; }
    [[nodiscard]] std::size_t operator[](std::size_t i) const { return labels_[i]; }
    void set(std::size_t i, std::size_t label);

    [[nodiscard]] std::span<const std::uint16_t> labels() const noexcept { return labels_; }

    /// One-vs-rest indicator of class c.
    [[nodiscard]] BinaryMask class_mask(std::size_t c) const;

    friend bool operator==(const LabelMask&, const LabelMask&) = default;

private:
    Shape shape_;
    std::size_t num_classes_ = 2;
    std::vector<std::uint16_t> labels_;
};

/// Per-pixel class probabilities, stored class-major: plane c is a full
/// width x height grid.
class ProbMap {
public:
    static constexpr double kNormalizationTolerance = 1e-6;

    ProbMap() = default;
    ProbMap(std::size_t width, std::size_t height, std::size_t num_classes, double fill = 0.0);
    /// Builds a two-class map from a foreground probability field.
    static ProbMap from_foreground(const ScalarField& foreground);

    [[nodiscard]] const Shape& shape() const noexcept { return shape_; }
    [[nodiscard]] std::size_t width() const noexcept { return shape_.width; }
    [[nodiscard]] std::size_t height() const noexcept { return shape_.height; }
    [[nodiscard]] std::size_t pixels() const noexcept { return shape_.size(); }
    [[nodiscard]] std::size_t num_classes() const noexcept { return num_classes_; }

    [[nodiscard]] double operator()(std::size_t pixel, std::size_t c) const { return probs_[c * pixels() + pixel]; }
    [[nodiscard]] double& operator()(std::size_t pixel, std::size_t c) { return probs_[c * pixels() + pixel]; }

    [[nodiscard]] std::span<const double> plane(std::size_t c) const;
    [[nodiscard]] std::span<double> plane(std::size_t c);
    [[nodiscard]] ScalarField channel(std::size_t c) const;
    [[nodiscard]] std::span<const double> data() const noexcept { return probs_; }
    [[nodiscard]] std::span<double> data() noexcept { return probs_; }

    /// Claimed by producers that guarantee per-pixel sums of one (one_hot, softmax).
    [[nodiscard]] bool normalized() const noexcept { return normalized_; }
    void set_normalized(bool flag) noexcept { normalized_ = flag; }

    /// Recomputes the per-pixel sums; true when all are within tolerance of 1.
    [[nodiscard]] bool check_normalized(double tolerance = kNormalizationTolerance) const;

private:
    Shape shape_;
    std::size_t num_classes_ = 0;
    bool normalized_ = false;
    std::vector<double> probs_;
};

[[nodiscard]] ProbMap one_hot(const LabelMask& mask);
/// Lowest class index wins ties.
[[nodiscard]] LabelMask argmax(const ProbMap& probs);
/// bit = value >= t
[[nodiscard]] BinaryMask threshold(const ScalarField& field, double t);
[[nodiscard]] BinaryMask threshold(std::span<const double> values, const Shape& shape, double t);
[[nodiscard]] BinaryMask complement(const BinaryMask& mask);
/// Throws NonFiniteValue carrying the first offending coordinate in row-major order.
void finite_check(const ScalarField& field);
void finite_check(std::span<const double> values, const Shape& shape);

void require_same_shape(const Shape& a, const Shape& b, const char* what);

}  // namespace osc
