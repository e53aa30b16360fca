#pragma once

#include <vector>

#include "expskel/types.hpp"

namespace expskel {

/*
 * Convex cell machinery for planar upper-envelope diagrams.  Cells are built
 * by successive halfplane clipping of the window rectangle; every polygon
 * edge remembers which constraint produced it (a term index >= 0, or a
 * negative window-side label), which is what lets the skeleton assembly
 * recover shared boundaries without geometric matching heuristics.
 */

inline constexpr int kEdgeWindow = -1;

struct Affine2 {
    // f(x, y) = a x + b y + c
    double a = 0.0, b = 0.0, c = 0.0;
    double operator()(Vec2 p) const { return a * p.x + b * p.y + c; }
};

struct LabeledPolygon {
    std::vector<Vec2> pts;      // CCW
    std::vector<int> labels;    // edge i runs pts[i] -> pts[(i+1)%size]

    bool empty() const { return pts.size() < 3; }
    double area() const;
};

LabeledPolygon window_polygon(const Box& w);

// Clip to the halfplane {g >= 0}; new boundary pieces get `label`.
LabeledPolygon clip_halfplane(const LabeledPolygon& poly, const Affine2& g, int label,
                              double eps);

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b);

// Squared distance helpers for welding.
inline double dist2(Vec2 a, Vec2 b) {
    double dx = a.x - b.x, dy = a.y - b.y;
    return dx * dx + dy * dy;
}

}  // namespace expskel
