#pragma once

#include <map>
#include <vector>

#include "expskel/expsum.hpp"
#include "expskel/geometry.hpp"

namespace expskel {

/*
 * Planar (n = 1) skeleton of an exponential sum: the max-plus arrangement of
 * the affine forms f_i(x, y) = Re(alpha_i) + Re(m_i) x - Im(m_i) y.  Cells
 * are the dominance regions U_i, edges the 1-strata of Gamma, vertices the
 * 0-strata.  Everything is clipped to a finite window.
 *
 * For general n the module provides dominance-based membership oracles
 * (locate) and a bisector distance proxy instead of an exact stratification.
 */

struct SkelCell {
    int term = 0;
    std::vector<Vec2> polygon;   // CCW
    bool touches_window = false; // clipped (the true cell is unbounded or larger)
};

struct SkelEdge {
    int cell_i = 0, cell_j = 0;  // the two cells sharing the edge
    Vec2 a, b;
    std::vector<int> active;     // I_z at the midpoint
    bool non_generic = false;    // more than two active terms
};

struct SkelVertex {
    Vec2 p;
    std::vector<int> active;
    int edge_degree = 0;
};

struct Skeleton2D {
    Box window;
    std::vector<SkelCell> cells;
    std::vector<SkelEdge> edges;
    std::vector<SkelVertex> vertices;

    double cell_area_sum() const;
    // Exact Euclidean distance to the union of edges (infinity if no edges).
    double distance(Vec2 p) const;
};

Skeleton2D build_skeleton_2d(const ExpSum& sum, const Box& window, double tol_tie = kTolTie);

// Same arrangement machinery for caller-supplied affine forms (used for the
// direct Voronoi cross-check of section skeletons).
Skeleton2D build_affine_diagram(const std::vector<Affine2>& f, const Box& window,
                                double eps_geo);

struct StratumLocation {
    int region = 0;                   // least index attaining b(z)
    int stratum_dim = 0;              // 2n - active_span_dim
    int active_span_dim = 0;          // affine rank of {m_i : i in I_{z,c}}
    std::map<int, bool> in_U_c;       // k -> (active_span_dim >= 2n - k)
};

StratumLocation locate(const ExpSum& sum, const CVec& z, double c, double tol_tie = kTolTie);

// Distance upper bound to Gamma for any n: exact distance to the bisector
// hyperplane between the dominant term and its nearest competitor.
double bisector_distance(const ExpSum& sum, const CVec& z);

}  // namespace expskel
