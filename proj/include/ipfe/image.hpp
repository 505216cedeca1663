#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ipfe {

/// 8-bit grayscale image, row-major.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;

    GrayImage() = default;
    GrayImage(int w, int h, std::uint8_t fill = 0);
    GrayImage(int w, int h, std::vector<std::uint8_t> pixels);

    std::size_t size() const { return data.size(); }
    std::uint8_t at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }

    bool operator==(const GrayImage&) const = default;
};

using Lut = std::array<std::uint8_t, 256>;

/// Converts a 256-entry code table (e.g. TransferCurve::lut); throws
/// SimError(InvalidParamValue) on wrong length or out-of-range codes.
Lut make_lut(std::span<const int> codes);
Lut identity_lut();

struct Histogram {
    std::array<std::uint64_t, 256> bins{};
    int l_min = 0;
    int l_max = 0;
};

struct ContrastReport {
    double cr_before = 0.0;
    double cr_after = 0.0;
    double improvement = 0.0;
    int l_min_before = 0, l_max_before = 0;
    int l_min_after = 0, l_max_after = 0;
};

// --- PGM ------------------------------------------------------------------

enum class PgmErrorKind { BadMagic, BadHeader, TruncatedData, MaxvalTooLarge };

const char* to_string(PgmErrorKind kind);

class PgmError : public std::runtime_error {
public:
    PgmError(PgmErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
    PgmErrorKind kind() const noexcept { return kind_; }

private:
    PgmErrorKind kind_;
};

enum class PgmVariant { P2, P5 };

/// Parses P2 or P5 with maxval <= 255. Samples are rescaled to 0..255 when
/// maxval is below 255.
GrayImage read_pgm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> write_pgm(const GrayImage& image, PgmVariant variant = PgmVariant::P5);

GrayImage read_pgm_file(const std::filesystem::path& path);
void write_pgm_file(const std::filesystem::path& path, const GrayImage& image,
                    PgmVariant variant = PgmVariant::P5);

// --- processing -------------------------------------------------------------

GrayImage apply_lut(const GrayImage& image, const Lut& lut);

Histogram histogram(const GrayImage& image);

/// (l_max - l_min) / (l_max + l_min); 0 for an all-black image.
double michelson_cr(int l_min, int l_max);
double michelson_cr(const Histogram& hist);
double michelson_cr(const GrayImage& image);

/// Throws SimError(ZeroBaseContrast) when the source image has CR 0.
ContrastReport enhancement_report(const GrayImage& before, const GrayImage& after);

/// Uniform codes in [l_min, l_max] from a seeded generator; the first two
/// pixels are pinned to l_min and l_max.
GrayImage synth_low_contrast(int width, int height, int l_min, int l_max, std::uint64_t seed);

std::string histogram_json(const Histogram& hist);
std::string report_json(const ContrastReport& report);

}  // namespace ipfe
