#include <ipfe/circuit.hpp>
#include <ipfe/error.hpp>

#include <gtest/gtest.h>

#include "oracle.hpp"

#include <cmath>
#include <random>
#include <sstream>

using namespace ipfe;

namespace {

// X2 as a near-ideal switch: no threshold, enormous gain
PixelConfig shorted_stack() {
    PixelConfig c = ref_a_config();
    c.ptm = ptm_contrast_enhancement();
    c.x2 = MosfetParams{Polarity::P, 0.0, 1e9};
    c.selector_r_on = 500.0;
    c.r_load = 3e3;
    return c;
}

void expect_kvl(const PixelConfig& c, const OperatingPoint& op) {
    const auto& nv = op.node_voltages;
    const double i = op.branch_current;
    const double r = ptm_resistance(op.ptm_state, c.ptm);
    const double low = c.tc ? nv.at(kNodeTcDrain) : nv.at(kNodeX2Drain);
    EXPECT_NEAR(c.vdd - nv.at(kNodeX2Source), i * r, 1e-6);
    EXPECT_NEAR(low - nv.at(kNodeOut), i * c.selector_r_on, 1e-6);
    EXPECT_NEAR(nv.at(kNodeOut), i * c.r_load, 1e-6);
    EXPECT_DOUBLE_EQ(op.v_out, nv.at(kNodeOut));
    EXPECT_GE(nv.at(kNodeX2Source), nv.at(kNodeX2Drain) - 1e-9);
}

void expect_series_current(const PixelConfig& c, double v_pd, const OperatingPoint& op) {
    const auto& nv = op.node_voltages;
    const double vs = nv.at(kNodeX2Source), vd = nv.at(kNodeX2Drain);
    EXPECT_NEAR(mosfet_drain_current(c.x2, vs - v_pd, vs - vd), op.branch_current, 1e-12);
    if (c.tc) {
        const double vtd = nv.at(kNodeTcDrain);
        EXPECT_NEAR(mosfet_drain_current(c.tc->params, vd - c.tc->v_gt, vd - vtd), op.branch_current, 1e-12);
    }
}

}  // namespace

TEST(SolveStack, ResetIsCutoff) {
    const auto c = ref_a_config();
    const auto op = solve_stack_dc(c, c.vdd, PtmState::HRS);
    EXPECT_EQ(op.branch_current, 0.0);
    EXPECT_EQ(op.v_out, 0.0);
    EXPECT_EQ(op.ptm_state, PtmState::HRS);
    EXPECT_FALSE(op.transitioned);
}

TEST(SolveStack, DegenerateDivider) {
    const auto c = shorted_stack();
    const auto op = solve_stack_fixed(c, 0.0, PtmState::HRS);
    EXPECT_NEAR(op.v_out, 1.2 * 3000.0 / 83500.0, 1e-6);
    EXPECT_NEAR(op.v_out, 43.11e-3, 1e-5);
}

TEST(SolveStack, FullDropFlipsAndMatchesOracle) {
    const auto c = ref_a_config();
    const auto op = solve_stack_dc(c, 0.0, PtmState::HRS);
    EXPECT_TRUE(op.transitioned);
    EXPECT_EQ(op.ptm_state, PtmState::LRS);
    const double i_ref = oracle::branch_current(c, PtmState::LRS, 0.0);
    EXPECT_NEAR(op.branch_current, i_ref, 2e-12);
    EXPECT_NEAR(op.v_out, i_ref * c.r_load, 1e-6);
    expect_kvl(c, op);
    expect_series_current(c, 0.0, op);
}

TEST(SolveStack, OracleSweepOverPdVoltage) {
    auto c = ref_a_config();
    for (int k = 0; k <= 24; ++k) {
        const double v_pd = c.vdd * k / 24.0;
        for (auto s : {PtmState::HRS, PtmState::LRS}) {
            const auto op = solve_stack_fixed(c, v_pd, s);
            EXPECT_NEAR(op.branch_current, oracle::branch_current(c, s, v_pd), 2e-12) << v_pd;
            expect_kvl(c, op);
            expect_series_current(c, v_pd, op);
        }
    }
}

TEST(SolveStack, OracleWithTuningTransistor) {
    auto c = ref_a_config();
    c.tc = TuningTransistor{MosfetParams{Polarity::P, 0.4, 1e-3}, 0.38};
    for (int k = 0; k <= 12; ++k) {
        const double v_pd = c.vdd * k / 12.0;
        const auto op = solve_stack_fixed(c, v_pd, PtmState::HRS);
        EXPECT_NEAR(op.branch_current, oracle::branch_current(c, PtmState::HRS, v_pd), 2e-12) << v_pd;
        expect_kvl(c, op);
        expect_series_current(c, v_pd, op);
    }
}

TEST(SolveStack, CurrentMonotoneInPdDrop) {
    const auto c = ref_a_config();
    double prev = -1.0;
    for (int k = 0; k <= 100; ++k) {
        const double i = solve_stack_fixed(c, c.vdd * (1.0 - k / 100.0), PtmState::HRS).branch_current;
        EXPECT_GE(i, prev);
        prev = i;
    }
}

TEST(SolveStack, RandomConfigsAgainstOracle) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int n = 0; n < 20; ++n) {
        PixelConfig c = ref_a_config();
        c.ptm.r_lrs = 2e3 + 20e3 * u(rng);
        c.ptm.r_hrs = c.ptm.r_lrs * (1.5 + 5.0 * u(rng));
        c.x2.vth = 0.2 + 0.3 * u(rng);
        c.x2.kp = std::pow(10.0, -4.0 + 3.0 * u(rng));
        c.r_load = 5e3 + 45e3 * u(rng);
        if (n % 2) c.tc = TuningTransistor{MosfetParams{Polarity::P, 0.3, 1e-3 * (1 + 9 * u(rng))}, 0.5 * u(rng)};
        const double v_pd = c.vdd * u(rng);
        const auto s = u(rng) < 0.5 ? PtmState::HRS : PtmState::LRS;
        const auto op = solve_stack_fixed(c, v_pd, s);
        EXPECT_NEAR(op.branch_current, oracle::branch_current(c, s, v_pd), 2e-12) << n;
        expect_kvl(c, op);
    }
}

TEST(SolveStack, LatchingNeverRevertsLrs) {
    auto c = ref_a_config();
    c.ptm = ptm_table1();
    c.x2 = MosfetParams{Polarity::P, 0.1, 1e-3};
    const auto op = solve_stack_dc(c, 0.6, PtmState::LRS);
    EXPECT_LT(op.branch_current, c.ptm.i_c_lht);
    EXPECT_EQ(op.ptm_state, PtmState::LRS);
    EXPECT_FALSE(op.transitioned);
}

TEST(SolveStack, StrictModeDetectsAstable) {
    auto c = ref_a_config();
    c.ptm = ptm_table1();
    c.x2 = MosfetParams{Polarity::P, 0.1, 1e-3};
    c.latch_mode = LatchMode::BistableStrict;
    try {
        solve_stack_dc(c, 0.0, PtmState::HRS);
        FAIL() << "expected AstableConfiguration";
    } catch (const SimError& e) {
        EXPECT_EQ(e.kind(), ErrorKind::AstableConfiguration);
    }
}

TEST(SolveStack, StrictModeReleasesLrs) {
    auto c = ref_a_config();
    c.latch_mode = LatchMode::BistableStrict;
    // at reset the LRS current is zero, below i_c_lht
    const auto op = solve_stack_dc(c, c.vdd, PtmState::LRS);
    EXPECT_EQ(op.ptm_state, PtmState::HRS);
    EXPECT_TRUE(op.transitioned);
}

TEST(SolveStack, RejectsBadInputs) {
    auto c = ref_a_config();
    EXPECT_THROW(solve_stack_dc(c, -0.1, PtmState::HRS), SimError);
    EXPECT_THROW(solve_stack_dc(c, c.vdd + 0.1, PtmState::HRS), SimError);
    c.r_load = 0.0;
    EXPECT_THROW(solve_stack_dc(c, 0.5, PtmState::HRS), SimError);
}

TEST(IntegratePd, LinearDischargeAndClamp) {
    EXPECT_DOUBLE_EQ(integrate_pd(1.2, 0.0, 10e-15, 10e-6), 1.2);
    EXPECT_NEAR(integrate_pd(1.2, 0.6e-9, 10e-15, 10e-6), 0.6, 1e-12);
    EXPECT_NEAR(integrate_pd(1.2, 1.2e-9, 10e-15, 10e-6), 0.0, 1e-12);
    EXPECT_EQ(integrate_pd(1.2, 2.4e-9, 10e-15, 10e-6), 0.0);
}

TEST(SimulateFrame, DarkPixelStaysOff) {
    const auto t = simulate_frame(ref_a_config(), 0.0, 64);
    EXPECT_EQ(t.readout_v_out, 0.0);
    EXPECT_EQ(t.final_state, PtmState::HRS);
    for (const auto& s : t.samples) EXPECT_EQ(s.ptm_state, PtmState::HRS);
}

TEST(SimulateFrame, BrightPixelSwitchesOnceAndResets) {
    const auto c = ref_a_config();
    const auto t = simulate_frame(c, 1.0, 256);
    ASSERT_EQ(t.samples.size(), 257u);
    int flips = 0;
    for (std::size_t k = 1; k < t.samples.size(); ++k) {
        if (t.samples[k].ptm_state != t.samples[k - 1].ptm_state) {
            ++flips;
            EXPECT_EQ(t.samples[k].ptm_state, PtmState::LRS);
            // the previous step was still sub-critical in HRS
            EXPECT_LE(solve_stack_fixed(c, t.samples[k - 1].v_pd, PtmState::HRS).branch_current, c.ptm.i_c_hlt);
            EXPECT_GT(solve_stack_fixed(c, t.samples[k].v_pd, PtmState::HRS).branch_current, c.ptm.i_c_hlt);
        }
    }
    EXPECT_EQ(flips, 1);
    EXPECT_EQ(t.samples.back().ptm_state, PtmState::LRS);
    EXPECT_EQ(t.final_state, PtmState::HRS);
}

TEST(SimulateFrame, StepRefinementConverges) {
    const auto c = ref_a_config();
    EXPECT_NEAR(simulate_frame(c, 1.0, 64).readout_v_out, simulate_frame(c, 1.0, 4096).readout_v_out, 1e-3);
}

TEST(SimulateFrame, MatchesClosedFormDischarge) {
    const auto c = ref_a_config();
    for (double illum : {0.25, 0.5, 1.0}) {
        for (int n : {64, 100, 1000}) {
            const auto t = simulate_frame(c, illum, n);
            const double expected = std::max(0.0, c.vdd - photocurrent(illum, c.pd) * c.pd.t_int / c.pd.c_pd);
            EXPECT_NEAR(t.samples.back().v_pd, expected, 1e-3 * std::max(expected, 1e-3)) << illum << " " << n;
            EXPECT_NEAR(t.samples.back().time, c.pd.t_int, 1e-18);
        }
    }
}

TEST(SimulateFrame, TraceCsvHeader) {
    std::ostringstream os;
    write_trace_csv(os, simulate_frame(ref_a_config(), 0.5, 8));
    const auto text = os.str();
    EXPECT_EQ(text.substr(0, text.find('\n')), "time_s,v_pd_v,i_branch_a,ptm_state,v_out_v");
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 10);
}

TEST(ThreeT, ResetLevelsAndReadout) {
    ThreeTConfig c;
    EXPECT_NEAR(three_t_reset_level(c), 0.8, 1e-12);
    EXPECT_NEAR(simulate_3t_frame(c, 0.0), 0.4, 1e-12);
    c.reset_mode = ResetMode::Hard;
    EXPECT_NEAR(simulate_3t_frame(c, 0.0), 0.8, 1e-12);
    double prev = 10.0;
    for (int k = 0; k <= 10; ++k) {
        const double r = simulate_3t_frame(c, k / 10.0);
        EXPECT_LE(r, prev);
        prev = r;
    }
}
