#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "ipfe/circuit.hpp"

namespace ipfe {

struct NormalizationMode {
    enum class Kind { PerCurveMinMax, FixedRange };
    Kind kind = Kind::PerCurveMinMax;
    double lo = 0.0;  // FixedRange only
    double hi = 0.0;

    static NormalizationMode per_curve() { return {}; }
    static NormalizationMode fixed(double lo, double hi);

    bool operator==(const NormalizationMode&) const = default;
};

/// Pixel transfer curve sampled at n equally spaced PD-node voltage drops.
struct TransferCurve {
    int n = 0;
    std::vector<int> input_codes;
    std::vector<double> v_drop;
    std::vector<double> v_out_raw;
    std::vector<int> lut;
    std::vector<PtmState> state_seq;
};

struct CurveFeatures {
    int threshold_code = 0;
    int ax = 0, ay = 0;  // top of stage 1
    int bx = 0, by = 0;  // landing point of the jump
    int stage1_max = 0;
    std::pair<int, int> stage2_span{0, 0};
};

/// Smallest LUT step that counts as the abrupt resistance transition.
inline constexpr int kMinJumpCodes = 8;

/// Codes 0..255, rounded half away from zero. A degenerate per-curve range
/// maps everything to 0.
std::vector<int> normalize_curve(std::span<const double> v_out_raw, const NormalizationMode& norm);

/// Ascending sweep of the PD-node drop from 0 to vdd with persistent PTM state,
/// starting in HRS.
TransferCurve extract_curve(const PixelConfig& config, int n = 256,
                            const NormalizationMode& norm = NormalizationMode::per_curve());

/// Throws SimError(NoTransition) when no LUT step reaches kMinJumpCodes.
CurveFeatures curve_features(const TransferCurve& curve);

enum class SweepParam { RLrs, RHrs, IcHlt };

const char* to_string(SweepParam p);

/// Copy of `config` with one PTM parameter replaced; validates the result.
PixelConfig with_param(const PixelConfig& config, SweepParam param, double value);

std::vector<TransferCurve> sweep_parameter(const PixelConfig& config, SweepParam param,
                                           std::span<const double> values, int n = 256,
                                           const NormalizationMode& norm = NormalizationMode::per_curve());

/// Free parameter for inverse design. Only I_C-HLT and R_HRS move the threshold.
enum class DesignParam { IcHlt, RHrs };

/// Bisects the free parameter over [0.1x, 10x] of its nominal value until the
/// extracted threshold code is within +-1 of target_code.
/// Throws SimError(Unreachable) when the bracket cannot reach the target.
double design_threshold(const PixelConfig& config, int target_code, DesignParam free_param, int n = 256,
                        const NormalizationMode& norm = NormalizationMode::per_curve());

/// One curve per T_c gate voltage; requires config.tc.
std::vector<TransferCurve> vgt_family(const PixelConfig& config, std::span<const double> vgt_values,
                                      int n = 256,
                                      const NormalizationMode& norm = NormalizationMode::per_curve());

void write_curve_csv(std::ostream& os, const TransferCurve& curve);

}  // namespace ipfe
