#include "ipfe/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>

#include "ipfe/error.hpp"

namespace ipfe {

void PixelConfig::validate() const {
    if (!(std::isfinite(vdd) && vdd > 0.0))
        throw SimError(ErrorKind::InvalidParamValue, "vdd must be > 0");
    ptm.validate();
    x2.validate();
    if (tc) {
        tc->params.validate();
        if (!std::isfinite(tc->v_gt))
            throw SimError(ErrorKind::InvalidParamValue, "tc.v_gt must be finite");
    }
    if (!(std::isfinite(selector_r_on) && selector_r_on >= 0.0))
        throw SimError(ErrorKind::InvalidParamValue, "selector_r_on must be >= 0");
    if (!(std::isfinite(r_load) && r_load > 0.0))
        throw SimError(ErrorKind::InvalidParamValue, "r_load must be > 0");
    pd.validate();
}

PixelConfig ref_a_config() {
    PixelConfig c;
    c.vdd = 1.2;
    c.ptm = ptm_contrast_enhancement();
    c.ptm.r_lrs = 5e3;
    c.x2 = MosfetParams{Polarity::P, 0.4, 0.1};
    c.tc.reset();
    c.selector_r_on = 500.0;
    c.r_load = 25e3;
    c.pd = PhotodiodeParams{10e-15, 10e-6, 1.2e-9};
    c.latch_mode = LatchMode::Latching;
    return c;
}

namespace {

enum class Stage { None, X2, Tc };

// Minimum drain-source drop of a conducting device carrying `current` with
// the given overdrive; nullopt when the current exceeds saturation.
std::optional<double> min_drop(const MosfetParams& m, double vov, double current) {
    if (current <= 0.0) return 0.0;
    if (vov <= 0.0) return std::nullopt;
    const double q = 2.0 * current / m.kp;
    const double disc = vov * vov - q;
    if (disc < 0.0) return std::nullopt;
    // vov - sqrt(disc), written without cancellation
    return q / (vov + std::sqrt(disc));
}

struct ChainEval {
    Stage failed = Stage::None;
    double v_source = 0.0;
    double v_x2_drain = 0.0;
    double v_tc_drain = 0.0;
    double mismatch = 0.0;

    bool accepted() const { return failed == Stage::None && mismatch >= 0.0; }
};

ChainEval eval_chain(const PixelConfig& c, double v_pd, double r_ptm, double current) {
    ChainEval e;
    e.v_source = c.vdd - current * r_ptm;
    const auto x2_drop = min_drop(c.x2, e.v_source - v_pd - c.x2.vth, current);
    if (!x2_drop) {
        e.failed = Stage::X2;
        return e;
    }
    e.v_x2_drain = e.v_source - *x2_drop;
    e.v_tc_drain = e.v_x2_drain;
    if (c.tc) {
        const auto& t = *c.tc;
        const auto tc_drop = min_drop(t.params, e.v_x2_drain - t.v_gt - t.params.vth, current);
        if (!tc_drop) {
            e.failed = Stage::Tc;
            return e;
        }
        e.v_tc_drain = e.v_x2_drain - *tc_drop;
    }
    e.mismatch = e.v_tc_drain - current * (c.selector_r_on + c.r_load);
    return e;
}

}  // namespace

OperatingPoint solve_stack_fixed(const PixelConfig& config, double v_pd, PtmState state,
                                 const SolverOptions& opts) {
    config.validate();
    if (!(v_pd >= 0.0 && v_pd <= config.vdd))
        throw SimError(ErrorKind::Domain, "v_pd must lie in [0, vdd]");

    const double r_ptm = ptm_resistance(state, config.ptm);
    const double r_passive = config.selector_r_on + config.r_load;

    // With every transistor shorted the divider current is an upper bound.
    double lo = 0.0;
    double hi = config.vdd / (r_ptm + r_passive);
    Stage hi_failed = Stage::None;
    {
        const ChainEval e = eval_chain(config, v_pd, r_ptm, hi);
        if (e.accepted()) {
            lo = hi;  // only reachable when both transistors act as shorts
        } else {
            hi_failed = e.failed;
        }
    }

    int iter = 0;
    while (hi - lo > opts.current_tol) {
        if (++iter > opts.max_iterations)
            throw SimError(ErrorKind::NoConvergence, "branch-current bisection hit the iteration cap");
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi) break;
        const ChainEval e = eval_chain(config, v_pd, r_ptm, mid);
        if (e.accepted()) {
            lo = mid;
        } else {
            hi = mid;
            hi_failed = e.failed;
        }
    }

    const double current = lo;
    const ChainEval e = eval_chain(config, v_pd, r_ptm, current);
    const double v_out = current * config.r_load;
    const double v_sel_top = current * r_passive;

    double v_source = e.v_source;
    double v_x2_drain = e.v_x2_drain;
    double v_tc_drain = e.v_tc_drain;
    if (hi_failed == Stage::X2) {
        // X2 saturated: it absorbs whatever the lower devices leave over.
        v_tc_drain = v_sel_top;
        if (config.tc) {
            const auto& t = *config.tc;
            const double q = 2.0 * current / t.params.kp;
            const double c = v_sel_top - t.v_gt - t.params.vth;
            if (c > 0.0) {
                v_x2_drain = v_sel_top + q / (c + std::sqrt(c * c + q));
            } else {
                v_x2_drain = t.v_gt + t.params.vth + std::sqrt(q);
            }
        } else {
            v_x2_drain = v_sel_top;
        }
    } else if (hi_failed == Stage::Tc) {
        v_tc_drain = v_sel_top;
    }
    if (!config.tc) v_tc_drain = v_x2_drain;

    OperatingPoint op;
    op.branch_current = current;
    op.v_out = v_out;
    op.ptm_state = state;
    op.node_voltages = {
        {kNodeVdd, config.vdd},
        {kNodePd, v_pd},
        {kNodeX2Source, v_source},
        {kNodeX2Drain, v_x2_drain},
        {kNodeOut, v_out},
    };
    if (config.tc) op.node_voltages[kNodeTcDrain] = v_tc_drain;
    return op;
}

OperatingPoint solve_stack_dc(const PixelConfig& config, double v_pd, PtmState state_in,
                              const SolverOptions& opts) {
    OperatingPoint op = solve_stack_fixed(config, v_pd, state_in, opts);

    PtmState next = state_in;
    if (config.latch_mode == LatchMode::Latching) {
        if (state_in == PtmState::HRS) next = ptm_transition(state_in, config.ptm, op.branch_current);
    } else {
        next = ptm_transition(state_in, config.ptm, op.branch_current);
    }
    if (next == state_in) return op;

    op = solve_stack_fixed(config, v_pd, next, opts);
    op.transitioned = true;
    if (config.latch_mode == LatchMode::BistableStrict &&
        ptm_transition(next, config.ptm, op.branch_current) != next) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "%s -> %s flip re-triggers the reverse transition at v_pd = %.6g V (I = %.6g A)",
                      to_string(state_in), to_string(next), v_pd, op.branch_current);
        throw SimError(ErrorKind::AstableConfiguration, buf);
    }
    return op;
}

double integrate_pd(double v0, double i_pd, double c_pd, double dt) {
    return std::max(0.0, v0 - i_pd * dt / c_pd);
}

FrameTrace simulate_frame(const PixelConfig& config, double illum, int n_steps) {
    if (n_steps < 2) throw SimError(ErrorKind::Domain, "n_steps must be >= 2");
    config.validate();
    const double i_pd = photocurrent(illum, config.pd);
    const double dt = config.pd.t_int / n_steps;

    FrameTrace trace;
    trace.samples.reserve(static_cast<std::size_t>(n_steps) + 1);

    // reset: PD node at vdd, X2 off, the PTM relaxes to HRS
    double v_pd = config.vdd;
    PtmState state = PtmState::HRS;
    {
        const OperatingPoint reset = solve_stack_fixed(config, v_pd, state);
        state = ptm_transition(state, config.ptm, reset.branch_current);
        const OperatingPoint op = solve_stack_dc(config, v_pd, state);
        state = op.ptm_state;
        trace.samples.push_back({0.0, v_pd, op.branch_current, state, op.v_out});
    }

    for (int k = 1; k <= n_steps; ++k) {
        v_pd = integrate_pd(v_pd, i_pd, config.pd.c_pd, dt);
        const OperatingPoint op = solve_stack_dc(config, v_pd, state);
        state = op.ptm_state;
        trace.samples.push_back({k * dt, v_pd, op.branch_current, state, op.v_out});
    }
    trace.readout_v_out = trace.samples.back().v_out;

    // next cycle's reset
    const OperatingPoint reset = solve_stack_fixed(config, config.vdd, state);
    trace.final_state = ptm_transition(state, config.ptm, reset.branch_current);
    return trace;
}

void write_trace_csv(std::ostream& os, const FrameTrace& trace) {
    os << "time_s,v_pd_v,i_branch_a,ptm_state,v_out_v\n";
    char buf[160];
    for (const auto& s : trace.samples) {
        std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g,%s,%.9g\n", s.time, s.v_pd, s.branch_current,
                      to_string(s.ptm_state), s.v_out);
        os << buf;
    }
}

void ThreeTConfig::validate() const {
    if (!(std::isfinite(vdd) && vdd > 0.0))
        throw SimError(ErrorKind::InvalidParamValue, "baseline.vdd must be > 0");
    if (!(vth_x1 >= 0.0 && vth_x1 < vdd))
        throw SimError(ErrorKind::InvalidParamValue, "baseline.vth_x1 must lie in [0, vdd)");
    sf.validate();
    pd.validate();
}

double three_t_reset_level(const ThreeTConfig& config) {
    return config.reset_mode == ResetMode::Soft ? config.vdd - config.vth_x1 : config.vdd;
}

double simulate_3t_frame(const ThreeTConfig& config, double illum) {
    config.validate();
    const double v0 = three_t_reset_level(config);
    const double v_pd = integrate_pd(v0, photocurrent(illum, config.pd), config.pd.c_pd, config.pd.t_int);
    return std::max(0.0, v_pd - config.sf.vth);
}

}  // namespace ipfe
