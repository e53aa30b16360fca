#pragma once

// Shared constructed instances.  The degenerate net stages a genuine
// near-critical zero: three collinear peaks with spacing a at k = 4 log2/a^2
// put exact 1:2:1 weight ratios on the mid-axis, and the phase choice
// arg(a_0) + arg(a_2) - 2 arg(a_1) = 0 turns the triple into a squared
// two-term sum ((e^u + e^-u)^2 form), which has honest double zeros.  The
// remaining phase freedom places one of them at (0.5, 0.75), close enough to
// the triple that the filler peaks only contribute an O(e^-1.5) tail.

#include <cmath>

#include "expskel/section.hpp"

namespace fixtures {

struct DegenerateInstance {
    expskel::Net net;
    std::vector<expskel::Complex> amps;
    double k = 0.0;
    double C3 = 0.15;
    double R1 = 0.8;
    expskel::Complex critical_zero;  // of the bare triple
};

inline DegenerateInstance degenerate_instance() {
    using expskel::Complex;
    DegenerateInstance inst;
    double a = 0.2;                          // triple spacing
    inst.k = 4.0 * std::log(2.0) / (a * a);  // 1:2:1 weights on the axis
    double D = inst.k * a / 2.0;             // adjacent exponent gap (real)

    std::vector<Complex> pts = {
        {0.3, 0.8}, {0.5, 0.8}, {0.7, 0.8},                      // the triple
        {0.18, 0.3}, {0.5, 0.28}, {0.82, 0.3},                   // fillers
        {0.08, 0.95}, {0.92, 0.95},
    };
    inst.net = expskel::make_net(pts, 0.36, {0, 0, 1, 1}, false, 0.45);

    // Double zero of the triple at (0.5, y*): arg u = psi1 - psi0 + D y = pi.
    double ystar = 0.75;
    double delta = ystar * D - M_PI;
    inst.critical_zero = Complex(0.5, ystar);
    inst.amps = {std::polar(1.0, delta), Complex(1, 0), std::polar(1.0, -delta),
                 Complex(1, 0),          Complex(1, 0), Complex(1, 0),
                 Complex(1, 0),          Complex(1, 0)};
    return inst;
}

}  // namespace fixtures
