#include "ipfe/curve.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "ipfe/error.hpp"

namespace ipfe {

NormalizationMode NormalizationMode::fixed(double lo, double hi) {
    if (!(hi > lo)) throw SimError(ErrorKind::InvalidParamValue, "FixedRange requires hi > lo");
    return {Kind::FixedRange, lo, hi};
}

std::vector<int> normalize_curve(std::span<const double> v_out_raw, const NormalizationMode& norm) {
    std::vector<int> codes(v_out_raw.size(), 0);
    if (v_out_raw.empty()) return codes;

    double lo = norm.lo;
    double hi = norm.hi;
    if (norm.kind == NormalizationMode::Kind::PerCurveMinMax) {
        const auto [mn, mx] = std::minmax_element(v_out_raw.begin(), v_out_raw.end());
        lo = *mn;
        hi = *mx;
        if (!(hi > lo)) return codes;
    } else if (!(hi > lo)) {
        throw SimError(ErrorKind::InvalidParamValue, "FixedRange requires hi > lo");
    }

    const double span = hi - lo;
    for (std::size_t i = 0; i < v_out_raw.size(); ++i) {
        const double code = std::round(255.0 * ((v_out_raw[i] - lo) / span));
        codes[i] = static_cast<int>(std::clamp(code, 0.0, 255.0));
    }
    return codes;
}

TransferCurve extract_curve(const PixelConfig& config, int n, const NormalizationMode& norm) {
    if (n < 2) throw SimError(ErrorKind::Domain, "curve needs n >= 2 points");
    config.validate();

    TransferCurve curve;
    curve.n = n;
    curve.input_codes.resize(n);
    curve.v_drop.resize(n);
    curve.v_out_raw.resize(n);
    curve.state_seq.resize(n);

    PtmState state = PtmState::HRS;
    for (int k = 0; k < n; ++k) {
        const double v_drop = static_cast<double>(k) / (n - 1) * config.vdd;
        const double v_pd = std::clamp(config.vdd - v_drop, 0.0, config.vdd);
        const OperatingPoint op = solve_stack_dc(config, v_pd, state);
        state = op.ptm_state;
        curve.input_codes[k] = k;
        curve.v_drop[k] = v_drop;
        curve.v_out_raw[k] = op.v_out;
        curve.state_seq[k] = state;
    }
    curve.lut = normalize_curve(curve.v_out_raw, norm);
    return curve;
}

CurveFeatures curve_features(const TransferCurve& curve) {
    const auto& lut = curve.lut;
    if (lut.size() < 2) throw SimError(ErrorKind::NoTransition, "curve has fewer than two points");

    int best_k = 0;
    int best_step = lut[1] - lut[0];
    for (std::size_t k = 1; k + 1 < lut.size(); ++k) {
        const int step = lut[k + 1] - lut[k];
        if (step > best_step) {
            best_step = step;
            best_k = static_cast<int>(k);
        }
    }
    if (best_step < kMinJumpCodes) {
        throw SimError(ErrorKind::NoTransition,
                       "largest LUT step is " + std::to_string(best_step) + " codes");
    }

    // Stage split: from the recorded PTM states when present, otherwise at
    // the detected jump. A recorded sweep without an HRS -> LRS flip has no
    // transition however steep its normalized curve is.
    std::size_t first_stage2 = static_cast<std::size_t>(best_k) + 1;
    if (curve.state_seq.size() == lut.size()) {
        const auto it = std::find(curve.state_seq.begin(), curve.state_seq.end(), PtmState::LRS);
        if (it == curve.state_seq.end() || it == curve.state_seq.begin())
            throw SimError(ErrorKind::NoTransition, "the PTM never switches during the sweep");
        first_stage2 = static_cast<std::size_t>(it - curve.state_seq.begin());
    }

    CurveFeatures f;
    f.threshold_code = best_k;
    f.ax = f.bx = best_k;
    f.ay = lut[best_k];
    f.by = lut[best_k + 1];
    f.stage1_max = *std::max_element(lut.begin(), lut.begin() + static_cast<std::ptrdiff_t>(first_stage2));
    const auto [mn, mx] = std::minmax_element(lut.begin() + static_cast<std::ptrdiff_t>(first_stage2), lut.end());
    f.stage2_span = {*mn, *mx};
    return f;
}

const char* to_string(SweepParam p) {
    switch (p) {
        case SweepParam::RLrs: return "r_lrs";
        case SweepParam::RHrs: return "r_hrs";
        case SweepParam::IcHlt: return "ic_hlt";
    }
    return "?";
}

PixelConfig with_param(const PixelConfig& config, SweepParam param, double value) {
    if (!(std::isfinite(value) && value > 0.0))
        throw SimError(ErrorKind::InvalidParamValue, std::string(to_string(param)) + " values must be > 0");
    PixelConfig c = config;
    switch (param) {
        case SweepParam::RLrs: c.ptm.r_lrs = value; break;
        case SweepParam::RHrs: c.ptm.r_hrs = value; break;
        case SweepParam::IcHlt: c.ptm.i_c_hlt = value; break;
    }
    c.ptm.validate();
    return c;
}

std::vector<TransferCurve> sweep_parameter(const PixelConfig& config, SweepParam param,
                                           std::span<const double> values, int n,
                                           const NormalizationMode& norm) {
    std::vector<PixelConfig> configs;
    configs.reserve(values.size());
    for (double v : values) configs.push_back(with_param(config, param, v));

    std::vector<TransferCurve> curves;
    curves.reserve(configs.size());
    for (const auto& c : configs) curves.push_back(extract_curve(c, n, norm));
    return curves;
}

namespace {

// Threshold code, or n when the curve shows no transition.
int threshold_or_end(const PixelConfig& config, int n, const NormalizationMode& norm) {
    try {
        return curve_features(extract_curve(config, n, norm)).threshold_code;
    } catch (const SimError& e) {
        if (e.kind() == ErrorKind::NoTransition) return n;
        throw;
    }
}

}  // namespace

double design_threshold(const PixelConfig& config, int target_code, DesignParam free_param, int n,
                        const NormalizationMode& norm) {
    const SweepParam param = free_param == DesignParam::IcHlt ? SweepParam::IcHlt : SweepParam::RHrs;
    const double nominal = free_param == DesignParam::IcHlt ? config.ptm.i_c_hlt : config.ptm.r_hrs;

    double lo = 0.1 * nominal;
    double hi = 10.0 * nominal;
    if (free_param == DesignParam::RHrs) lo = std::max(lo, config.ptm.r_lrs * (1.0 + 1e-9));
    if (!(lo < hi)) throw SimError(ErrorKind::Unreachable, "empty design bracket");

    auto eval = [&](double p) { return threshold_or_end(with_param(config, param, p), n, norm); };
    auto hit = [&](int code) { return code < n && std::abs(code - target_code) <= 1; };

    char buf[160];
    const int code_lo = eval(lo);
    if (hit(code_lo)) return lo;
    if (target_code < code_lo) {
        std::snprintf(buf, sizeof buf, "target %d is below the lowest reachable threshold %d", target_code, code_lo);
        throw SimError(ErrorKind::Unreachable, buf);
    }
    const int code_hi = eval(hi);
    if (hit(code_hi)) return hi;
    if (code_hi < n && target_code > code_hi) {
        std::snprintf(buf, sizeof buf, "target %d is above the highest reachable threshold %d", target_code, code_hi);
        throw SimError(ErrorKind::Unreachable, buf);
    }

    // The threshold code is non-decreasing in either free parameter; bisect
    // geometrically since the bracket spans two decades.
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = std::sqrt(lo * hi);
        if (!(mid > lo && mid < hi)) break;
        const int code = eval(mid);
        if (hit(code)) return mid;
        if (code < target_code) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    std::snprintf(buf, sizeof buf, "no %s in the bracket places the threshold at code %d", to_string(param),
                  target_code);
    throw SimError(ErrorKind::Unreachable, buf);
}

std::vector<TransferCurve> vgt_family(const PixelConfig& config, std::span<const double> vgt_values, int n,
                                      const NormalizationMode& norm) {
    if (!config.tc) throw SimError(ErrorKind::InvalidParamValue, "vgt_family requires the tuning transistor");
    std::vector<TransferCurve> curves;
    curves.reserve(vgt_values.size());
    for (double vgt : vgt_values) {
        if (!(vgt >= 0.0 && vgt <= config.vdd))
            throw SimError(ErrorKind::InvalidParamValue, "v_gt must lie in [0, vdd]");
        PixelConfig c = config;
        c.tc->v_gt = vgt;
        curves.push_back(extract_curve(c, n, norm));
    }
    return curves;
}

void write_curve_csv(std::ostream& os, const TransferCurve& curve) {
    os << "input_code,v_drop_v,v_out_raw_v,output_code,ptm_state\n";
    char buf[160];
    for (int k = 0; k < curve.n; ++k) {
        std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g,%d,%s\n", curve.input_codes[k], curve.v_drop[k],
                      curve.v_out_raw[k], curve.lut[k], to_string(curve.state_seq[k]));
        os << buf;
    }
}

}  // namespace ipfe
