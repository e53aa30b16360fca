#pragma once

#include <vector>

#include "expskel/expsum.hpp"
#include "expskel/skeleton.hpp"

namespace expskel {

/*
 * Zero / critical-point solving for exponential sums.  The zero set of a
 * planar sum lives within a dominance collar of the skeleton, so Newton
 * seeds are laid densely along the skeleton edges (with perpendicular
 * offset rows for derivative targets, whose zero lines sit on shifted
 * bisectors) on top of a uniform window grid.  Counts are certified by the
 * argument principle: the n = 1 residue count of a target g over a contour
 * is the winding number of g.
 */

enum class RootMode { Zeros, Critical, CriticalZeros };

struct Root {
    CVec z;
    int multiplicity = 1;
    double residual = 0.0;  // normalized |target|(z) e^{-b(z)}
    bool boundary = false;  // within merge_radius of the window boundary
};

struct RootSet {
    RootMode mode = RootMode::Zeros;
    std::vector<Root> points;
    int total_multiplicity() const;
};

struct FindOpts {
    int grid_density = 48;
    uint64_t seed = 0;
    double merge_radius = 1e-6;
    double tol_newton = 1e-10;
};

RootSet find_roots(const ExpSum& sum, const Box& window, RootMode mode,
                   const FindOpts& opts = {});

enum class WindTarget { Value, Derivative };

struct Contour {
    bool is_circle = true;
    Complex center;
    double radius = 1.0;
    Box box;

    static Contour circle(Complex c, double r) { return {true, c, r, {}}; }
    static Contour box_boundary(const Box& b) { return {false, {}, 0.0, b}; }
    Complex point(double s) const;  // s in [0,1)
};

// Total argument variation / 2pi of the target along the contour, with
// adaptive sample doubling until two successive estimates agree and every
// phase step stays below pi/2.  Throws when a root sits on the contour
// (normalized |target| < min_abs at a sample; multiplicity probes lower the
// threshold since an order-m zero at the center scales like r^m).
int count_winding(const ExpSum& sum, WindTarget target, const Contour& contour,
                  int min_samples = 256, double min_abs = 1e-9);

enum class BoundMode { ZeroContainment, C1Lower };

struct BoundReport {
    BoundMode mode = BoundMode::ZeroContainment;
    double c_used = 0.0;
    std::vector<CVec> violations;
    double min_margin = 0.0;  // containment: min (c - second gap); c1: empirical c_2
    int grid_nx = 0, grid_ny = 0;
    Box window;
};

// zero_containment: every zero lies in U_c(Gamma); requires c > log(l).
// c1_lower: empirical min of the normalized C^1 datum outside
// U_{c1}(Gamma^{(n-1)}).
BoundReport verify_bounds(const ExpSum& sum, const Box& window, double c, BoundMode mode,
                          double c1 = 0.0, int grid_density = 200,
                          const FindOpts& opts = {});

}  // namespace expskel
