#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ipfe/circuit.hpp"
#include "ipfe/curve.hpp"
#include "ipfe/image.hpp"

namespace ipfe {

/// Gaussian spread around the nominal value, truncated at +-3 sigma by
/// redrawing. PTM sigmas are relative fractions; the X2 threshold sigma is
/// absolute volts.
struct VariationSpec {
    double sigma_r_hrs = 0.05;
    double sigma_r_lrs = 0.05;
    double sigma_i_c_hlt = 0.05;
    double sigma_vth_x2 = 0.030;

    void validate() const;

    bool operator==(const VariationSpec&) const = default;
};

inline constexpr double kTruncationSigmas = 3.0;
inline constexpr int kMaxRedraws = 100;

/// Deterministic in (seed, index): every index owns its own generator
/// substream, so rows can be produced in any order.
PixelConfig sample_variant(const PixelConfig& nominal, const VariationSpec& spec, std::uint64_t index,
                           std::uint64_t seed);

struct McRow {
    std::uint64_t index = 0;
    double r_hrs = 0.0;
    double r_lrs = 0.0;
    double i_c_hlt = 0.0;
    double vth_x2 = 0.0;
    double cr = 0.0;
    bool ok = false;
    std::string status;  // "ok" or the error kind of a failed row
};

struct McSummary {
    std::size_t n = 0;
    double cr_min = 0.0;
    double cr_max = 0.0;
    double cr_mean = 0.0;
    double cr_std = 0.0;  // population
};

struct McOptions {
    int curve_points = 256;
    NormalizationMode norm = NormalizationMode::per_curve();
    unsigned workers = 1;
};

/// sample_variant -> extract_curve -> apply_lut -> michelson_cr per index.
/// Failing rows are reported with a status instead of aborting the batch.
std::vector<McRow> run_monte_carlo(const PixelConfig& nominal, const VariationSpec& spec, std::size_t n,
                                   std::uint64_t seed, const GrayImage& image, const McOptions& opts = {});

/// Statistics over successful rows; throws SimError(NoSuccessfulRows).
McSummary mc_summary(std::span<const McRow> rows);

void write_mc_csv(std::ostream& os, std::span<const McRow> rows);
std::string summary_json(const McSummary& summary);

}  // namespace ipfe
