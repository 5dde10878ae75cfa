#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace osc {

enum class ErrorKind {
    InvalidArgument,
    ShapeMismatch,
    NonFiniteValue,
    NotNormalized,
    EmptyMask,
    DegenerateMask,
    InvalidEpsilon,
    DegenerateCurve,
    UndefinedMetric,
    DivergenceDetected,
    UnsupportedFormat,
    CorruptFile,
    IoFailure,
    InfeasibleSpec,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Pixel coordinate attached to errors that point at a location in a grid.
struct PixelCoord {
    std::size_t x = 0;
    std::size_t y = 0;
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

    /// Set for NonFiniteValue.
    std::optional<PixelCoord> where;
    /// Set for CorruptFile.
    std::optional<std::size_t> byte_offset;
    /// Set for DivergenceDetected.
    std::optional<std::size_t> step;

private:
    ErrorKind kind_;
};

/// True for failures caused by floating point blow-up rather than bad input.
[[nodiscard]] bool is_numerical(ErrorKind kind) noexcept;

}  // namespace osc
