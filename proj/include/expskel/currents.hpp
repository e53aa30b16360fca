#pragma once

#include <functional>
#include <string>
#include <vector>

#include "expskel/section.hpp"

namespace expskel {

/*
 * Current pairings.  The skeleton current beta_Gamma has density
 * (1/2)|p_i - p_j| along the Voronoi edge between cells i and j (from
 * beta = (1/2) J d(log h_i - log h_j) with Gaussian weights h), so
 *
 *   <[beta_Gamma], psi> = sum_edges (1/2)|p_i - p_j| Int_edge psi ds,
 *
 * while the zero-set pairing is the plain point sum <[X], psi> =
 * sum mult psi(zero).  A simple twoterm count shows the zero density along
 * an edge is k |p_i - p_j| / (4 pi) per unit length, so the normalized zero
 * pairing comparable to beta is (2 pi / k) <[X], psi>; the table's
 * gap_over_k column records |2 pi zero_pairing / k - target|.
 */

struct TestFunction {
    std::string name;
    std::function<double(Complex)> f;
    double c0 = 1.0, c1 = 0.0, c2 = 0.0;          // sup-norm bounds of psi, dpsi, d2psi
    std::function<double(const Box&)> integral;    // exact integral over a box

    double operator()(Complex z) const { return f(z); }
};

// The fixed catalog on the unit torus: constant, trigonometric, bump.
std::vector<TestFunction> psi_catalog();
TestFunction psi_const();

double beta_pairing(const Net& net, const TestFunction& psi);

// Sum of mult * psi over the zeros of the section in the window (for
// periodic sections: the half-open fundamental domain, wrapped duplicates
// merged).  Boundary-flagged zeros are counted and reported via *flagged.
double zero_pairing(const SectionSpec& spec, const TestFunction& psi, const Box& window,
                    int* flagged = nullptr, const FindOpts& opts = {});

// Same for a surgered field: zeros located by seeding from the raw section's
// roots plus a skeleton sweep, refined on the field itself.
double zero_pairing(const SurgeredSection& field, SectionMode mode, const SectionSpec& spec,
                    const TestFunction& psi, const Box& window, int* flagged = nullptr,
                    const FindOpts& opts = {});

struct PairingRow {
    double k = 0.0;
    double epsilon = 0.0;
    double zero_pairing = 0.0;
    double beta_pairing = 0.0;
    double gap_over_k = 0.0;  // |2 pi zero_pairing / k - target|
    double target = 0.0;      // beta (fixed-eps mode) or Int psi (schedule mode)
    std::string note;
};

struct PairingTable {
    std::string psi_name;
    std::vector<PairingRow> rows;
};

struct LimitStudyOpts {
    bool schedule = false;       // false: fixed epsilon; true: eps_k = k^{-pow}
    double epsilon = 0.3;        // fixed-eps mode
    double sched_pow = 1.0 / 3.0;
    bool periodic = true;
    double c1 = 0.2;
    double c2_target = 0.05;
    uint64_t seed = 0;
    int grid_density = 0;        // find_roots density override (0 = auto)
    double cluster_C3 = 0.05;    // per-row cluster check
    double cluster_R1 = 0.1;
};

std::vector<PairingTable> limit_study(const Box& domain, const std::vector<double>& k_list,
                                      const std::vector<TestFunction>& cat,
                                      const LimitStudyOpts& opts);

}  // namespace expskel
