#include "osc/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <string>

namespace osc {

namespace {

constexpr std::string_view kSdfTag = "osc-sdf16";

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::IoFailure, "cannot open '" + path.string() + "' for reading");
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::vector<std::uint8_t>& bytes, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorKind::IoFailure, "cannot open '" + path.string() + "' for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw Error(ErrorKind::IoFailure, "write to '" + path.string() + "' failed");
    }
}

[[noreturn]] void corrupt(const std::string& what, std::size_t offset) {
    Error err(ErrorKind::CorruptFile, what + " at byte " + std::to_string(offset));
    err.byte_offset = offset;
    throw err;
}

struct PgmHeader {
    std::size_t width = 0;
    std::size_t height = 0;
    std::size_t maxval = 0;
    std::size_t data_offset = 0;
    std::vector<std::string> comments;
};

// Netpbm header: magic, then whitespace-separated width, height, maxval with
// '#' comments running to end of line, then exactly one whitespace byte.
PgmHeader parse_pgm_header(const std::vector<std::uint8_t>& bytes) {
    PgmHeader header;
    std::size_t pos = 2;
    auto skip_space_and_comments = [&]() {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                const std::size_t start = pos + 1;
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
                header.comments.emplace_back(bytes.begin() + static_cast<std::ptrdiff_t>(start),
                                             bytes.begin() + static_cast<std::ptrdiff_t>(pos));
            } else if (std::isspace(bytes[pos])) {
                ++pos;
            } else {
                break;
            }
        }
    };
    auto read_number = [&](const char* what) {
        skip_space_and_comments();
        if (pos >= bytes.size()) corrupt(std::string("missing ") + what, pos);
        if (!std::isdigit(bytes[pos])) corrupt(std::string("bad ") + what, pos);
        std::size_t value = 0;
        while (pos < bytes.size() && std::isdigit(bytes[pos])) {
            value = value * 10 + static_cast<std::size_t>(bytes[pos] - '0');
            if (value > (1u << 24)) corrupt(std::string(what) + " too large", pos);
            ++pos;
        }
        return value;
    };
    header.width = read_number("width");
    header.height = read_number("height");
    header.maxval = read_number("maxval");
    if (header.width == 0 || header.height == 0) corrupt("zero image dimension", pos);
    if (header.maxval == 0 || header.maxval > 65535) corrupt("maxval out of range", pos);
    if (pos >= bytes.size() || !std::isspace(bytes[pos])) corrupt("missing whitespace after header", pos);
    header.data_offset = pos + 1;
    return header;
}

bool is_png(const std::vector<std::uint8_t>& bytes) {
    return bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0;
}

bool is_pgm(const std::vector<std::uint8_t>& bytes) {
    return bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5';
}

Gray8Image decode_png(const std::vector<std::uint8_t>& bytes, const std::filesystem::path& path) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
        Error err(ErrorKind::CorruptFile, "'" + path.string() + "': " + image.message);
        throw err;
    }
    if ((image.format & (PNG_FORMAT_FLAG_COLOR | PNG_FORMAT_FLAG_ALPHA | PNG_FORMAT_FLAG_LINEAR)) != 0) {
        png_image_free(&image);
        throw Error(ErrorKind::UnsupportedFormat, "'" + path.string() + "' is not an 8-bit grayscale PNG");
    }
    image.format = PNG_FORMAT_GRAY;
    Gray8Image out;
    out.width = image.width;
    out.height = image.height;
    out.pixels.resize(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, out.pixels.data(), 0, nullptr)) {
        Error err(ErrorKind::CorruptFile, "'" + path.string() + "': " + image.message);
        png_image_free(&image);
        throw err;
    }
    return out;
}

void encode_png(const Gray8Image& img, const std::filesystem::path& path) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width);
    image.height = static_cast<png_uint_32>(img.height);
    image.format = PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&image, path.string().c_str(), 0, img.pixels.data(), 0, nullptr)) {
        throw Error(ErrorKind::IoFailure, "cannot write '" + path.string() + "': " + image.message);
    }
}

std::vector<std::uint8_t> pgm_header_bytes(std::size_t w, std::size_t h, std::size_t maxval,
                                           const std::optional<std::string>& comment) {
    std::string text = "P5\n";
    if (comment) text += "# " + *comment + "\n";
    text += std::to_string(w) + " " + std::to_string(h) + "\n" + std::to_string(maxval) + "\n";
    return {text.begin(), text.end()};
}

}  // namespace

Gray8Image read_gray8(const std::filesystem::path& path) {
    const auto bytes = read_bytes(path);
    if (is_png(bytes)) {
        return decode_png(bytes, path);
    }
    if (!is_pgm(bytes)) {
        throw Error(ErrorKind::UnsupportedFormat, "'" + path.string() + "' is neither binary PGM nor PNG");
    }
    const auto header = parse_pgm_header(bytes);
    if (header.maxval > 255) {
        throw Error(ErrorKind::UnsupportedFormat, "'" + path.string() + "' is a 16-bit PGM");
    }
    const std::size_t needed = header.width * header.height;
    if (bytes.size() < header.data_offset + needed) {
        corrupt("truncated pixel data (expected " + std::to_string(needed) + " bytes)", bytes.size());
    }
    Gray8Image out;
    out.width = header.width;
    out.height = header.height;
    out.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(header.data_offset),
                      bytes.begin() + static_cast<std::ptrdiff_t>(header.data_offset + needed));
    for (std::size_t i = 0; i < needed; ++i) {
        if (out.pixels[i] > header.maxval) corrupt("pixel exceeds maxval", header.data_offset + i);
    }
    if (header.maxval != 255) {
        for (auto& p : out.pixels) {
            p = static_cast<std::uint8_t>(std::lround(255.0 * p / static_cast<double>(header.maxval)));
        }
    }
    return out;
}

void write_gray8(const Gray8Image& image, const std::filesystem::path& path) {
    if (image.pixels.size() != image.width * image.height || image.pixels.empty()) {
        throw Error(ErrorKind::InvalidArgument, "gray image buffer does not match its dimensions");
    }
    if (path.extension() == ".png") {
        encode_png(image, path);
        return;
    }
    auto bytes = pgm_header_bytes(image.width, image.height, 255, std::nullopt);
    bytes.insert(bytes.end(), image.pixels.begin(), image.pixels.end());
    write_bytes(bytes, path);
}

ScalarField load_image(const std::filesystem::path& path) {
    const auto img = read_gray8(path);
    std::vector<double> values(img.pixels.size());
    std::transform(img.pixels.begin(), img.pixels.end(), values.begin(),
                   [](std::uint8_t v) { return static_cast<double>(v) / 255.0; });
    return {img.width, img.height, std::move(values)};
}

LabelMask load_mask(const std::filesystem::path& path) {
    const auto img = read_gray8(path);
    std::array<int, 256> class_of{};
    class_of.fill(-1);
    for (auto p : img.pixels) class_of[p] = 0;
    int next = 0;
    for (auto& c : class_of) {
        if (c == 0) c = next++;
    }
    std::vector<std::uint16_t> labels(img.pixels.size());
    std::transform(img.pixels.begin(), img.pixels.end(), labels.begin(),
                   [&](std::uint8_t v) { return static_cast<std::uint16_t>(class_of[v]); });
    return {img.width, img.height, static_cast<std::size_t>(std::max(next, 2)), std::move(labels)};
}

void save_field(const ScalarField& field, const std::filesystem::path& path) {
    Gray8Image img{field.width(), field.height(), std::vector<std::uint8_t>(field.size())};
    for (std::size_t i = 0; i < field.size(); ++i) {
        img.pixels[i] = static_cast<std::uint8_t>(std::lround(std::clamp(field[i], 0.0, 1.0) * 255.0));
    }
    write_gray8(img, path);
}

void save_mask(const LabelMask& mask, const std::filesystem::path& path) {
    const std::size_t k = mask.num_classes();
    if (k > 256) {
        throw Error(ErrorKind::IoFailure, "8-bit mask files hold at most 256 classes");
    }
    Gray8Image img{mask.width(), mask.height(), std::vector<std::uint8_t>(mask.size())};
    for (std::size_t i = 0; i < mask.size(); ++i) {
        img.pixels[i] = static_cast<std::uint8_t>(
            std::lround(static_cast<double>(mask[i]) * 255.0 / static_cast<double>(k - 1)));
    }
    write_gray8(img, path);
}

void save_sdf16(const ScalarField& phi, const std::filesystem::path& path) {
    auto bytes = pgm_header_bytes(phi.width(), phi.height(), 65535,
                                  std::string(kSdfTag) + " scale=256 offset=" + std::to_string(kSdf16Offset));
    bytes.reserve(bytes.size() + 2 * phi.size());
    for (std::size_t i = 0; i < phi.size(); ++i) {
        const long stored = std::lround(phi[i] * kSdf16Scale) + kSdf16Offset;
        if (stored < 0 || stored > 65535) {
            throw Error(ErrorKind::IoFailure, "distance " + std::to_string(phi[i]) + " outside the sdf16 range");
        }
        bytes.push_back(static_cast<std::uint8_t>(stored >> 8));
        bytes.push_back(static_cast<std::uint8_t>(stored & 0xff));
    }
    write_bytes(bytes, path);
}

ScalarField load_sdf16(const std::filesystem::path& path) {
    const auto bytes = read_bytes(path);
    if (!is_pgm(bytes)) {
        throw Error(ErrorKind::UnsupportedFormat, "'" + path.string() + "' is not a PGM file");
    }
    const auto header = parse_pgm_header(bytes);
    const bool tagged = std::any_of(header.comments.begin(), header.comments.end(), [](const std::string& c) {
        return c.find(kSdfTag) != std::string::npos;
    });
    if (!tagged || header.maxval != 65535) {
        throw Error(ErrorKind::UnsupportedFormat, "'" + path.string() + "' lacks the osc-sdf16 header");
    }
    const std::size_t n = header.width * header.height;
    if (bytes.size() < header.data_offset + 2 * n) {
        corrupt("truncated sdf16 data", bytes.size());
    }
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t at = header.data_offset + 2 * i;
        const int stored = (bytes[at] << 8) | bytes[at + 1];
        values[i] = static_cast<double>(stored - kSdf16Offset) / kSdf16Scale;
    }
    return {header.width, header.height, std::move(values)};
}

}  // namespace osc
