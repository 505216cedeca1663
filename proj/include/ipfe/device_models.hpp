#pragma once

// Behavioral device laws for the pixel stack: the two-state phase-transition
// resistor, a level-1 square-law MOSFET and a linear photodiode current source.

#include <vector>

namespace ipfe {

enum class PtmState { HRS, LRS };

const char* to_string(PtmState s);

struct PtmParams {
    double r_hrs = 80e3;     // ohm
    double r_lrs = 40e3;     // ohm
    double i_c_hlt = 4e-6;   // A, HRS -> LRS above this current
    double i_c_lht = 6.8e-6; // A, LRS -> HRS below this current
    double l_ptm = 5e-9;     // m, metadata only
    double a_ptm = 27.5e-9 * 27.5e-9;  // m^2, metadata only

    /// Throws SimError(InvalidParamValue) unless r_hrs > r_lrs > 0 and both
    /// critical currents are strictly positive.
    void validate() const;

    bool operator==(const PtmParams&) const = default;
};

/// Pt/NbO2/Pt device parameters used for the foreground-enhancement circuit.
PtmParams ptm_table1();
/// Hypothetical device tuned for contrast-enhancement mode.
PtmParams ptm_contrast_enhancement();

enum class Polarity { N, P };

struct MosfetParams {
    Polarity polarity = Polarity::P;
    double vth = 0.4;   // V, magnitude
    double kp = 3e-3;   // A/V^2, includes W/L

    void validate() const;

    bool operator==(const MosfetParams&) const = default;
};

struct PhotodiodeParams {
    double c_pd = 10e-15;     // F
    double t_int = 10e-6;     // s
    double i_pd_max = 1.2e-9; // A at illum = 1

    void validate() const;

    bool operator==(const PhotodiodeParams&) const = default;
};

double ptm_resistance(PtmState state, const PtmParams& params);

/// Pure current-triggered transition rule. Latching policy is applied by the
/// circuit solver, not here.
PtmState ptm_transition(PtmState state, const PtmParams& params, double branch_current);

/// Square-law drain current with hard cutoff. Both voltages are
/// polarity-normalized magnitudes; v_ds_eff must be >= 0.
double mosfet_drain_current(const MosfetParams& params, double v_gs_eff, double v_ds_eff);

/// Linear illumination map; throws SimError(Domain) outside [0, 1].
double photocurrent(double illum, const PhotodiodeParams& pd);

struct HysteresisPoint {
    double voltage = 0.0;
    double current = 0.0;
    PtmState state = PtmState::HRS;
};

/// Result of driving a lone PTM with a voltage ramp 0 -> v_max -> 0.
/// Corner voltages are NaN when the corresponding transition never fires.
struct HysteresisSweep {
    std::vector<HysteresisPoint> up;
    std::vector<HysteresisPoint> down;
    double v_hlt = 0.0;  // first up-ramp voltage that switched HRS -> LRS
    double v_lht = 0.0;  // first down-ramp voltage that switched LRS -> HRS
};

HysteresisSweep ptm_hysteresis_sweep(const PtmParams& params, double v_max, double dv);

}  // namespace ipfe
