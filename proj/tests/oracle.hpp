#pragma once

// Brute-force reference for the series stack. Works forward from a trial
// current I: the resistors fix every node except the transistor drains, T_c's
// source is found by bisection, and X2 must then carry exactly I. The root is
// located by a coarse current scan followed by a 1 pA walk.
// Deliberately shares no code with the library solver.

#include <ipfe/circuit.hpp>

#include <algorithm>
#include <cmath>
#include <optional>

namespace oracle {

inline double square_law(double kp, double vth, double vgs, double vds) {
    const double vov = vgs - vth;
    if (vov <= 0.0 || vds <= 0.0) return 0.0;
    if (vds < vov) return kp * (vov * vds - 0.5 * vds * vds);
    return 0.5 * kp * vov * vov;
}

struct Nodes {
    double x2_source = 0.0;
    double x2_drain = 0.0;
    double low = 0.0;  // node feeding the selector
    double out = 0.0;
};

inline double r_ptm(const ipfe::PixelConfig& c, ipfe::PtmState s) {
    return s == ipfe::PtmState::HRS ? c.ptm.r_hrs : c.ptm.r_lrs;
}

// Node voltages implied by I, or nullopt when T_c cannot pass I at all.
inline std::optional<Nodes> nodes_for(const ipfe::PixelConfig& c, ipfe::PtmState s, double i) {
    Nodes n;
    n.x2_source = c.vdd - i * r_ptm(c, s);
    n.out = i * c.r_load;
    n.low = n.out + i * c.selector_r_on;
    if (!c.tc) {
        n.x2_drain = n.low;
        return n;
    }
    const auto& t = *c.tc;
    auto itc = [&](double vd) { return square_law(t.params.kp, t.params.vth, vd - t.v_gt, vd - n.low); };
    if (n.x2_source < n.low || itc(n.x2_source) < i) return std::nullopt;
    double lo = n.low, hi = n.x2_source;
    for (int k = 0; k < 200 && hi - lo > 1e-13; ++k) {
        const double mid = 0.5 * (lo + hi);
        (itc(mid) < i ? lo : hi) = mid;
    }
    n.x2_drain = hi;
    return n;
}

// X2 capability minus demanded current; positive below the operating point.
inline double excess(const ipfe::PixelConfig& c, ipfe::PtmState s, double v_pd, double i) {
    const auto n = nodes_for(c, s, i);
    if (!n || n->x2_drain > n->x2_source) return -1.0;
    return square_law(c.x2.kp, c.x2.vth, n->x2_source - v_pd, n->x2_source - n->x2_drain) - i;
}

// Midpoint of the 1 pA cell where X2 runs out of headroom.
inline double branch_current(const ipfe::PixelConfig& c, ipfe::PtmState s, double v_pd) {
    constexpr double coarse = 10e-9, fine = 1e-12;
    const double i_cap = c.vdd / (c.r_load + c.selector_r_on + r_ptm(c, s));
    double lo = 0.0;
    while (lo + coarse <= i_cap && excess(c, s, v_pd, lo + coarse) > 0.0) lo += coarse;
    const long steps = std::lround(coarse / fine);
    long k = 0;
    while (k < steps && excess(c, s, v_pd, lo + static_cast<double>(k + 1) * fine) > 0.0) ++k;
    return lo + (static_cast<double>(k) + 0.5) * fine;
}

}  // namespace oracle
