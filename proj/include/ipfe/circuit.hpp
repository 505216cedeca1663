#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ipfe/device_models.hpp"

namespace ipfe {

enum class LatchMode { Latching, BistableStrict };

/// Series P-type transistor between the HyperFET and the selector, used for
/// real-time curve tuning through its gate voltage.
struct TuningTransistor {
    MosfetParams params;
    double v_gt = 0.0;

    bool operator==(const TuningTransistor&) const = default;
};

/// Full description of the pixel stack:
///   vdd -> PTM -> X2 (gate = PD node) -> [T_c] -> selector R_on -> out -> r_load -> gnd
struct PixelConfig {
    double vdd = 1.2;
    PtmParams ptm;
    MosfetParams x2;
    std::optional<TuningTransistor> tc;
    double selector_r_on = 500.0;
    double r_load = 25e3;
    PhotodiodeParams pd;
    LatchMode latch_mode = LatchMode::Latching;

    void validate() const;

    bool operator==(const PixelConfig&) const = default;
};

/// Reference configuration shipped as configs/ref-A.json.
PixelConfig ref_a_config();

// Node names used in OperatingPoint::node_voltages.
inline constexpr const char* kNodeVdd = "vdd";
inline constexpr const char* kNodePd = "pd";
inline constexpr const char* kNodeX2Source = "x2_source";
inline constexpr const char* kNodeX2Drain = "x2_drain";
inline constexpr const char* kNodeTcDrain = "tc_drain";
inline constexpr const char* kNodeOut = "out";

struct OperatingPoint {
    double branch_current = 0.0;
    double v_out = 0.0;
    std::map<std::string, double> node_voltages;
    PtmState ptm_state = PtmState::HRS;
    bool transitioned = false;
};

/// Bisection on the branch current. The mismatch is the voltage left at the
/// output node after every device takes its minimum drop for that current;
/// it is strictly decreasing, and currents a saturated device cannot carry
/// count as negative.
struct SolverOptions {
    double current_tol = 1e-15;  // A, bracket width at convergence
    int max_iterations = 200;
};

/// Operating point with the PTM held in `state`; no transition is applied.
OperatingPoint solve_stack_fixed(const PixelConfig& config, double v_pd, PtmState state,
                                 const SolverOptions& opts = {});

/// Operating point including the PTM transition rule and latch policy.
/// Throws SimError(NoConvergence | AstableConfiguration | Domain).
OperatingPoint solve_stack_dc(const PixelConfig& config, double v_pd, PtmState state_in,
                              const SolverOptions& opts = {});

/// Linear discharge of the PD node, clamped at ground.
double integrate_pd(double v0, double i_pd, double c_pd, double dt);

struct TraceSample {
    double time = 0.0;
    double v_pd = 0.0;
    double branch_current = 0.0;
    PtmState ptm_state = PtmState::HRS;
    double v_out = 0.0;
};

struct FrameTrace {
    std::vector<TraceSample> samples;
    double readout_v_out = 0.0;
    PtmState final_state = PtmState::HRS;
};

/// Reset, integrate over t_int in n_steps equal steps, read out, then reset
/// again for the next cycle. Sample 0 is the post-reset point at t = 0.
FrameTrace simulate_frame(const PixelConfig& config, double illum, int n_steps);

void write_trace_csv(std::ostream& os, const FrameTrace& trace);

enum class ResetMode { Soft, Hard };

struct ThreeTConfig {
    double vdd = 1.2;
    ResetMode reset_mode = ResetMode::Soft;
    double vth_x1 = 0.4;
    MosfetParams sf{Polarity::N, 0.4, 3e-3};
    PhotodiodeParams pd;

    void validate() const;

    bool operator==(const ThreeTConfig&) const = default;
};

double three_t_reset_level(const ThreeTConfig& config);

/// Conventional 3-T pixel: source-follower output after integration.
double simulate_3t_frame(const ThreeTConfig& config, double illum);

}  // namespace ipfe
