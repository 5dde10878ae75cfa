#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "osc/grid.hpp"

namespace osc {

/// 8-bit grayscale raster as stored on disk.
struct Gray8Image {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> pixels;
};

/// Reads binary PGM (P5, maxval <= 255) or 8-bit grayscale PNG, detected by
/// magic bytes. Throws UnsupportedFormat, CorruptFile (with byte offset for
/// PGM) or IoFailure.
[[nodiscard]] Gray8Image read_gray8(const std::filesystem::path& path);
/// Format chosen by extension: .png writes PNG, anything else PGM P5.
void write_gray8(const Gray8Image& image, const std::filesystem::path& path);

/// Pixel values scaled to [0, 1] by maxval (255 for PNG).
[[nodiscard]] ScalarField load_image(const std::filesystem::path& path);
/// Distinct gray levels enumerated ascending become class ids 0, 1, ...
[[nodiscard]] LabelMask load_mask(const std::filesystem::path& path);

/// Values clipped to [0, 1] and quantized to round(v * 255).
void save_field(const ScalarField& field, const std::filesystem::path& path);
/// Class k of K is written as gray round(k * 255 / (K - 1)), so the ascending
/// enumeration in load_mask restores the labels whenever every class occurs.
void save_mask(const LabelMask& mask, const std::filesystem::path& path);

/// Signed distance fields as 16-bit PGM (maxval 65535, big-endian) tagged with
/// the header comment "# osc-sdf16 scale=256 offset=32768". Stored value is
/// round(phi * 256) + 32768, covering phi in [-128, 128) px at 1/256 px steps.
void save_sdf16(const ScalarField& phi, const std::filesystem::path& path);
[[nodiscard]] ScalarField load_sdf16(const std::filesystem::path& path);

inline constexpr double kSdf16Scale = 256.0;
inline constexpr int kSdf16Offset = 32768;

}  // namespace osc
