#include "expskel/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/SVD>

namespace expskel {

namespace {

bool on_window_boundary(Vec2 p, const Box& w, double eps) {
    return std::abs(p.x - w.x0) < eps || std::abs(p.x - w.x1) < eps ||
           std::abs(p.y - w.y0) < eps || std::abs(p.y - w.y1) < eps;
}

// Drop repeated points and merge collinear runs with equal labels, so both
// sides of a shared boundary describe it with the same single segment.
void normalize_polygon(LabeledPolygon& poly, double tol) {
    auto remove_at = [&poly](std::size_t i) {
        poly.pts.erase(poly.pts.begin() + static_cast<std::ptrdiff_t>(i));
        poly.labels.erase(poly.labels.begin() + static_cast<std::ptrdiff_t>(i));
    };
    for (int pass = 0; pass < 64; ++pass) {
        bool changed = false;
        std::size_t n = poly.pts.size();
        if (n < 4) break;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t j = (i + 1) % n;
            // entry i owns the edge pts[i] -> pts[j]
            if (dist2(poly.pts[i], poly.pts[j]) < tol * tol) {
                remove_at(i);  // zero-length edge; predecessor label now reaches pts[j]
                changed = true;
                break;
            }
            std::size_t k = (i + 2) % n;
            if (poly.labels[i] == poly.labels[j]) {
                Vec2 u = poly.pts[j] - poly.pts[i];
                Vec2 v = poly.pts[k] - poly.pts[j];
                if (std::abs(cross(u, v)) < tol * (norm(u) + norm(v))) {
                    remove_at(j);  // middle vertex of a straight same-label run
                    changed = true;
                    break;
                }
            }
        }
        if (!changed) break;
    }
}

std::vector<int> active_at(const std::vector<Affine2>& f, Vec2 p, double tol_geo) {
    double best = -std::numeric_limits<double>::infinity();
    std::vector<double> vals(f.size());
    for (std::size_t t = 0; t < f.size(); ++t) {
        vals[t] = f[t](p);
        best = std::max(best, vals[t]);
    }
    std::vector<int> act;
    for (std::size_t t = 0; t < f.size(); ++t) {
        double slope = std::hypot(f[t].a, f[t].b) + 1.0;
        if (best - vals[t] <= tol_geo * slope) act.push_back(static_cast<int>(t));
    }
    return act;
}

Skeleton2D assemble(const std::vector<int>& owner, std::vector<LabeledPolygon> polys,
                    const std::vector<Affine2>& f, const Box& window, double eps_geo) {
    Skeleton2D skel;
    skel.window = window;

    double weld = std::max(1e-9 * (1.0 + window.diam()), 8.0 * eps_geo);
    double thin = 4.0 * weld * (window.width() + window.height());

    std::vector<int> kept_owner;
    std::vector<LabeledPolygon> kept;
    for (std::size_t c = 0; c < polys.size(); ++c) {
        if (polys[c].empty() || std::abs(polys[c].area()) < thin) continue;
        normalize_polygon(polys[c], weld);
        if (polys[c].pts.size() < 3) continue;
        kept.push_back(std::move(polys[c]));
        kept_owner.push_back(owner[c]);
    }

    for (std::size_t c = 0; c < kept.size(); ++c) {
        SkelCell cell;
        cell.term = kept_owner[c];
        cell.polygon = kept[c].pts;
        for (int lab : kept[c].labels)
            if (lab == kEdgeWindow) cell.touches_window = true;
        skel.cells.push_back(std::move(cell));
    }

    struct RawEdge {
        Vec2 a, b;
        int cell;
        bool used = false;
    };
    std::vector<RawEdge> raw;
    for (std::size_t c = 0; c < kept.size(); ++c) {
        const auto& poly = kept[c];
        std::size_t n = poly.pts.size();
        for (std::size_t i = 0; i < n; ++i) {
            if (poly.labels[i] == kEdgeWindow) continue;
            Vec2 a = poly.pts[i], b = poly.pts[(i + 1) % n];
            if (dist2(a, b) < weld * weld) continue;
            raw.push_back({a, b, static_cast<int>(c), false});
        }
    }

    auto close_pts = [weld](Vec2 p, Vec2 q) { return dist2(p, q) < weld * weld; };
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw[i].used) continue;
        raw[i].used = true;
        int partner = -1;
        for (std::size_t j = i + 1; j < raw.size(); ++j) {
            if (raw[j].used || raw[j].cell == raw[i].cell) continue;
            bool fwd = close_pts(raw[i].a, raw[j].a) && close_pts(raw[i].b, raw[j].b);
            bool rev = close_pts(raw[i].a, raw[j].b) && close_pts(raw[i].b, raw[j].a);
            if (fwd || rev) {
                partner = static_cast<int>(j);
                raw[j].used = true;
                break;
            }
        }
        SkelEdge e;
        e.a = raw[i].a;
        e.b = raw[i].b;
        int ci = skel.cells[static_cast<std::size_t>(raw[i].cell)].term;
        int cj = partner >= 0 ? skel.cells[static_cast<std::size_t>(raw[partner].cell)].term : ci;
        e.cell_i = std::min(ci, cj);
        e.cell_j = std::max(ci, cj);
        e.active = active_at(f, 0.5 * (e.a + e.b), 64.0 * weld);
        e.non_generic = e.active.size() > 2;
        skel.edges.push_back(std::move(e));
    }

    double vweld = 4.0 * weld;
    for (const auto& e : skel.edges) {
        for (Vec2 p : {e.a, e.b}) {
            if (on_window_boundary(p, window, vweld)) continue;
            bool found = false;
            for (auto& v : skel.vertices) {
                if (dist2(v.p, p) < vweld * vweld) {
                    v.edge_degree++;
                    found = true;
                    break;
                }
            }
            if (!found) {
                SkelVertex v;
                v.p = p;
                v.edge_degree = 1;
                v.active = active_at(f, p, 64.0 * weld);
                skel.vertices.push_back(std::move(v));
            }
        }
    }
    return skel;
}

}  // namespace

double Skeleton2D::cell_area_sum() const {
    double s = 0.0;
    for (const auto& c : cells) {
        LabeledPolygon p;
        p.pts = c.polygon;
        s += std::abs(p.area());
    }
    return s;
}

double Skeleton2D::distance(Vec2 p) const {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& e : edges) d = std::min(d, point_segment_distance(p, e.a, e.b));
    return d;
}

Skeleton2D build_affine_diagram(const std::vector<Affine2>& f, const Box& window,
                                double eps_geo) {
    std::vector<int> owner;
    std::vector<LabeledPolygon> polys;
    for (std::size_t i = 0; i < f.size(); ++i) {
        LabeledPolygon poly = window_polygon(window);
        for (std::size_t j = 0; j < f.size() && !poly.empty(); ++j) {
            if (i == j) continue;
            Affine2 g{f[i].a - f[j].a, f[i].b - f[j].b, f[i].c - f[j].c};
            double eps = eps_geo * (std::hypot(g.a, g.b) + 1e-300);
            poly = clip_halfplane(poly, g, static_cast<int>(j), eps);
        }
        owner.push_back(static_cast<int>(i));
        polys.push_back(std::move(poly));
    }
    return assemble(owner, std::move(polys), f, window, eps_geo);
}

Skeleton2D build_skeleton_2d(const ExpSum& sum, const Box& window, double tol_tie) {
    if (sum.dim() != 1) throw std::invalid_argument("build_skeleton_2d: planar sums only");
    std::vector<Affine2> f;
    f.reserve(static_cast<std::size_t>(sum.term_count()));
    for (const auto& t : sum.terms()) {
        // Re(alpha + m z) with z = x + iy
        f.push_back({t.m[0].real(), -t.m[0].imag(), t.alpha.real()});
    }
    double eps_geo = std::max(1e-12 * (1.0 + window.diam()), tol_tie * 1e-3);
    return build_affine_diagram(f, window, eps_geo);
}

StratumLocation locate(const ExpSum& sum, const CVec& z, double c, double tol_tie) {
    Dominance dom = dominance(sum, z, std::max(c, tol_tie * 2.0), tol_tie);
    StratumLocation loc;
    loc.region = dom.argmax.front();

    const auto& idx = dom.near;
    int n = sum.dim();
    int cnt = static_cast<int>(idx.size());
    int rank = 0;
    if (cnt >= 2) {
        // Affine rank of the active exponents viewed in R^{2n}.
        Eigen::MatrixXd A(2 * n, cnt - 1);
        const CVec& m0 = sum.term(idx[0]).m;
        double diam = 0.0;
        for (int a = 0; a < cnt; ++a)
            for (int b2 = a + 1; b2 < cnt; ++b2)
                diam = std::max(diam, (sum.term(idx[static_cast<std::size_t>(a)]).m -
                                       sum.term(idx[static_cast<std::size_t>(b2)]).m)
                                          .norm());
        for (int a = 1; a < cnt; ++a) {
            CVec d = sum.term(idx[static_cast<std::size_t>(a)]).m - m0;
            for (int q = 0; q < n; ++q) {
                A(2 * q, a - 1) = d[q].real();
                A(2 * q + 1, a - 1) = d[q].imag();
            }
        }
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
        double tol = 1e-8 * std::max(diam, 1e-300);
        for (Eigen::Index s = 0; s < svd.singularValues().size(); ++s)
            if (svd.singularValues()[s] > tol) rank++;
    }
    loc.active_span_dim = rank;
    loc.stratum_dim = 2 * n - rank;
    for (int k = 0; k <= 2 * n; ++k) loc.in_U_c[k] = (rank >= 2 * n - k);
    return loc;
}

double bisector_distance(const ExpSum& sum, const CVec& z) {
    Dominance dom = dominance(sum, z, 1.0);
    int i = dom.order[0];
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < sum.term_count(); ++j) {
        if (j == i) continue;
        double dm = (sum.term(i).m - sum.term(j).m).norm();
        if (dm <= 0.0) continue;
        best = std::min(best, dom.gap[static_cast<std::size_t>(j)] / dm);
    }
    return best;
}

}  // namespace expskel
