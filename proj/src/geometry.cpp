#include "expskel/geometry.hpp"

#include <cmath>

namespace expskel {

double LabeledPolygon::area() const {
    double s = 0.0;
    std::size_t n = pts.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& p = pts[i];
        const Vec2& q = pts[(i + 1) % n];
        s += cross(p, q);
    }
    return 0.5 * s;
}

LabeledPolygon window_polygon(const Box& w) {
    LabeledPolygon poly;
    poly.pts = {{w.x0, w.y0}, {w.x1, w.y0}, {w.x1, w.y1}, {w.x0, w.y1}};
    poly.labels = {kEdgeWindow, kEdgeWindow, kEdgeWindow, kEdgeWindow};
    return poly;
}

// Sutherland-Hodgman with label propagation.  Vertices within eps of the
// line count as inside, so bisectors that coincide (degenerate sums) do not
// erase each other's cells.
LabeledPolygon clip_halfplane(const LabeledPolygon& poly, const Affine2& g, int label,
                              double eps) {
    LabeledPolygon out;
    std::size_t n = poly.pts.size();
    if (n < 3) return out;
    for (std::size_t i = 0; i < n; ++i) {
        Vec2 cur = poly.pts[i];
        Vec2 nxt = poly.pts[(i + 1) % n];
        int lab = poly.labels[i];
        double gc = g(cur), gn = g(nxt);
        bool cin = gc >= -eps, nin = gn >= -eps;
        if (cin) {
            out.pts.push_back(cur);
            if (nin) {
                out.labels.push_back(lab);
            } else {
                double t = gc / (gc - gn);
                out.pts.push_back({cur.x + t * (nxt.x - cur.x), cur.y + t * (nxt.y - cur.y)});
                out.labels.push_back(lab);
                out.labels.push_back(label);  // runs along the new cut until re-entry
            }
        } else if (nin) {
            double t = gc / (gc - gn);
            out.pts.push_back({cur.x + t * (nxt.x - cur.x), cur.y + t * (nxt.y - cur.y)});
            out.labels.push_back(lab);
        }
    }
    // The label bookkeeping above can get out of sync when a vertex sits
    // exactly on the cut; rebuild defensively if counts disagree.
    if (out.labels.size() != out.pts.size()) out.labels.resize(out.pts.size(), label);
    if (out.pts.size() < 3) return LabeledPolygon{};
    return out;
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
    Vec2 ab = b - a;
    double len2 = dot(ab, ab);
    if (len2 <= 0.0) return norm(p - a);
    double t = dot(p - a, ab) / len2;
    t = std::clamp(t, 0.0, 1.0);
    return norm(p - (a + t * ab));
}

}  // namespace expskel
