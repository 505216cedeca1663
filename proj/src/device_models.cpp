#include "ipfe/device_models.hpp"

#include <cmath>
#include <string>

#include "ipfe/error.hpp"

namespace ipfe {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Domain: return "DomainError";
        case ErrorKind::NoConvergence: return "NoConvergence";
        case ErrorKind::AstableConfiguration: return "AstableConfiguration";
        case ErrorKind::NoTransition: return "NoTransition";
        case ErrorKind::InvalidParamValue: return "InvalidParamValue";
        case ErrorKind::Unreachable: return "Unreachable";
        case ErrorKind::ZeroBaseContrast: return "ZeroBaseContrast";
        case ErrorKind::ResampleExhausted: return "ResampleExhausted";
        case ErrorKind::NoSuccessfulRows: return "NoSuccessfulRows";
        case ErrorKind::InvalidConfig: return "InvalidConfig";
    }
    return "UnknownError";
}

const char* to_string(PtmState s) { return s == PtmState::HRS ? "HRS" : "LRS"; }

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw SimError(ErrorKind::InvalidParamValue, what);
}

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

void PtmParams::validate() const {
    require(finite_positive(r_lrs), "ptm.r_lrs must be > 0");
    require(std::isfinite(r_hrs) && r_hrs > r_lrs, "ptm.r_hrs must exceed ptm.r_lrs");
    require(finite_positive(i_c_hlt), "ptm.i_c_hlt must be > 0");
    require(finite_positive(i_c_lht), "ptm.i_c_lht must be > 0");
}

PtmParams ptm_table1() {
    PtmParams p;
    p.r_hrs = 120.5e3;
    p.r_lrs = 6.5e3;
    p.i_c_hlt = 7.4e-6;
    p.i_c_lht = 100e-6;
    return p;
}

PtmParams ptm_contrast_enhancement() {
    PtmParams p;
    p.r_hrs = 80e3;
    p.r_lrs = 40e3;
    p.i_c_hlt = 4e-6;
    p.i_c_lht = 6.8e-6;
    return p;
}

void MosfetParams::validate() const {
    require(std::isfinite(vth) && vth >= 0.0, "mosfet.vth must be >= 0");
    require(finite_positive(kp), "mosfet.kp must be > 0");
}

void PhotodiodeParams::validate() const {
    require(finite_positive(c_pd), "pd.c_pd must be > 0");
    require(finite_positive(t_int), "pd.t_int must be > 0");
    require(finite_positive(i_pd_max), "pd.i_pd_max must be > 0");
}

double ptm_resistance(PtmState state, const PtmParams& params) {
    return state == PtmState::HRS ? params.r_hrs : params.r_lrs;
}

PtmState ptm_transition(PtmState state, const PtmParams& params, double branch_current) {
    if (state == PtmState::HRS && branch_current > params.i_c_hlt) return PtmState::LRS;
    if (state == PtmState::LRS && branch_current < params.i_c_lht) return PtmState::HRS;
    return state;
}

double mosfet_drain_current(const MosfetParams& params, double v_gs_eff, double v_ds_eff) {
    const double vov = v_gs_eff - params.vth;
    if (vov <= 0.0) return 0.0;
    if (v_ds_eff < vov) return params.kp * (vov * v_ds_eff - 0.5 * v_ds_eff * v_ds_eff);
    return 0.5 * params.kp * vov * vov;
}

double photocurrent(double illum, const PhotodiodeParams& pd) {
    if (!(illum >= 0.0 && illum <= 1.0))
        throw SimError(ErrorKind::Domain, "illumination must lie in [0, 1]");
    return illum * pd.i_pd_max;
}

HysteresisSweep ptm_hysteresis_sweep(const PtmParams& params, double v_max, double dv) {
    params.validate();
    if (!(dv > 0.0 && v_max > 0.0)) throw SimError(ErrorKind::Domain, "sweep needs v_max > 0 and dv > 0");

    HysteresisSweep sweep;
    sweep.v_hlt = sweep.v_lht = std::nan("");
    const auto steps = static_cast<long>(std::floor(v_max / dv + 1e-9));
    PtmState state = PtmState::HRS;

    auto visit = [&](double v, std::vector<HysteresisPoint>& out, double& corner) {
        const PtmState next = ptm_transition(state, params, v / ptm_resistance(state, params));
        if (next != state && std::isnan(corner)) corner = v;
        state = next;
        out.push_back({v, v / ptm_resistance(state, params), state});
    };
    for (long k = 0; k <= steps; ++k) visit(static_cast<double>(k) * dv, sweep.up, sweep.v_hlt);
    for (long k = steps; k >= 0; --k) visit(static_cast<double>(k) * dv, sweep.down, sweep.v_lht);
    return sweep;
}

}  // namespace ipfe
