#include "expskel/genericity.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <stdexcept>

#include "expskel/rng.hpp"

namespace expskel {

namespace {

// Factorials up to the largest simplex order we ever build (2k <= 2n and the
// desk scale keeps n small).
double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

Eigen::VectorXd realify(const CVec& v) {
    Eigen::VectorXd r(2 * v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        r[2 * i] = v[i].real();
        r[2 * i + 1] = v[i].imag();
    }
    return r;
}

double gram_volume(const std::vector<Eigen::VectorXd>& edges) {
    int k = static_cast<int>(edges.size());
    if (k == 0) return 1.0;
    Eigen::MatrixXd E(edges[0].size(), k);
    for (int i = 0; i < k; ++i) E.col(i) = edges[static_cast<std::size_t>(i)];
    Eigen::MatrixXd G = E.transpose() * E;
    double det = G.determinant();
    if (det <= 0.0) return 0.0;
    return std::sqrt(det) / factorial(k);
}

}  // namespace

double Simplex::diameter() const {
    double d = 0.0;
    for (std::size_t i = 0; i < vertices.size(); ++i)
        for (std::size_t j = i + 1; j < vertices.size(); ++j)
            d = std::max(d, (vertices[i] - vertices[j]).norm());
    return d;
}

double simplex_volume(const Simplex& s, VolMode mode) {
    int k = s.k();
    if (k < 1) throw std::invalid_argument("simplex_volume: need k >= 1");
    int n = s.dim();
    for (const auto& v : s.vertices)
        if (v.size() != n) throw std::invalid_argument("simplex_volume: mixed dimensions");
    if (mode == VolMode::Real) {
        std::vector<Eigen::VectorXd> edges;
        for (int i = 1; i <= k; ++i)
            edges.push_back(realify(s.vertices[static_cast<std::size_t>(i)] - s.vertices[0]));
        return gram_volume(edges);
    }
    if (k > n)
        throw std::invalid_argument("simplex_volume: complexified mode needs k <= n vertices-1");
    // Doubled simplex: edge vectors v_i and Jv_i (J = multiplication by i).
    std::vector<Eigen::VectorXd> edges;
    for (int i = 1; i <= k; ++i) {
        CVec v = s.vertices[static_cast<std::size_t>(i)] - s.vertices[0];
        edges.push_back(realify(v));
        edges.push_back(realify(Complex(0.0, 1.0) * v));
    }
    return gram_volume(edges);
}

double simplex_quality(const Simplex& s, VolMode mode, const CVec* extra, double tol_rank) {
    int k = s.k();
    if (k < 1) throw std::invalid_argument("simplex_quality: need k >= 1");
    int n = s.dim();
    if (mode == VolMode::Complexified && k > n)
        throw std::invalid_argument("simplex_quality: complexified mode needs k <= n");
    if (extra && mode != VolMode::Complexified)
        throw std::invalid_argument("simplex_quality: extra point only in complexified mode");

    double diam = s.diameter();
    if (diam <= 0.0) return 0.0;
    Simplex t;
    for (const auto& v : s.vertices) t.vertices.push_back(v / diam);
    CVec m;
    if (extra) m = *extra / diam;

    double best = std::numeric_limits<double>::infinity();
    int nv = k + 1;
    // All faces = vertex subsets of size >= 2.
    for (unsigned mask = 1; mask < (1u << nv); ++mask) {
        int cnt = __builtin_popcount(mask);
        if (cnt < 2) continue;
        int lp = cnt - 1;  // face dimension
        if (mode == VolMode::Complexified && lp > n) continue;
        Simplex face;
        for (int i = 0; i < nv; ++i)
            if (mask & (1u << i)) face.vertices.push_back(t.vertices[static_cast<std::size_t>(i)]);
        double vol = simplex_volume(face, mode);
        double q = mode == VolMode::Real ? std::pow(vol, 1.0 / lp) : std::pow(vol, 0.5 / lp);
        best = std::min(best, q);
    }
    if (extra) {
        // Simplices spanned by an (l'-1)-face and m, l' <= n.  A subset of
        // size c plus m is an l' = c simplex.
        for (unsigned mask = 1; mask < (1u << nv); ++mask) {
            int cnt = __builtin_popcount(mask);
            if (cnt > n) continue;
            Simplex face;
            bool coincident = false;
            for (int i = 0; i < nv; ++i) {
                if (!(mask & (1u << i))) continue;
                const CVec& v = t.vertices[static_cast<std::size_t>(i)];
                if ((v - m).norm() <= 1e-12 * (1.0 + m.norm())) coincident = true;
                face.vertices.push_back(v);
            }
            if (coincident) continue;  // not a simplex; skip rather than report 0
            face.vertices.push_back(m);
            int lp = cnt;
            double vol = simplex_volume(face, VolMode::Complexified);
            best = std::min(best, std::pow(vol, 0.5 / lp));
        }
    }
    if (!(best < std::numeric_limits<double>::infinity())) return 0.0;
    return best > tol_rank ? best : 0.0;
}

GenericityReport exponent_set_quality(const std::vector<CVec>& points, int n,
                                      std::optional<double> cutoff) {
    if (points.size() < 2) throw std::invalid_argument("exponent_set_quality: need >= 2 points");
    for (const auto& p : points)
        if (p.size() != n) throw std::invalid_argument("exponent_set_quality: dim mismatch");
    int P = static_cast<int>(points.size());
    int max_r = std::min(P, n + 2);
    // Combinatorial guard on the unrestricted count.
    double count = 0.0;
    double binom = P;
    for (int r = 2; r <= max_r; ++r) {
        binom = binom * (P - r + 1) / r;
        count += binom;
    }
    if (count > 1e7) throw std::runtime_error("exponent_set_quality: simplex count exceeds 1e7");

    GenericityReport rep;
    rep.delta_r = std::numeric_limits<double>::infinity();
    rep.delta_c = std::numeric_limits<double>::infinity();
    rep.delta_c_origin = std::numeric_limits<double>::infinity();
    CVec origin = CVec::Zero(n);

    double cur_min = std::numeric_limits<double>::infinity();
    auto consider = [&](const std::vector<int>& sel) {
        if (cutoff) {
            for (std::size_t a = 0; a < sel.size(); ++a)
                for (std::size_t b = a + 1; b < sel.size(); ++b)
                    if ((points[static_cast<std::size_t>(sel[a])] -
                         points[static_cast<std::size_t>(sel[b])])
                            .norm() > *cutoff)
                        return;
        }
        Simplex s;
        for (int i : sel) s.vertices.push_back(points[static_cast<std::size_t>(i)]);
        int nv = static_cast<int>(sel.size());
        double local = simplex_quality(s, VolMode::Real);
        rep.delta_r = std::min(rep.delta_r, local);
        if (nv <= n + 1) {
            double qc = simplex_quality(s, VolMode::Complexified);
            rep.delta_c = std::min(rep.delta_c, qc);
            local = std::min(local, qc);
            rep.delta_c_origin =
                std::min(rep.delta_c_origin, simplex_quality(s, VolMode::Complexified, &origin));
        }
        auto it = rep.margins.find(nv);
        if (it == rep.margins.end() || local < it->second) rep.margins[nv] = local;
        if (local < cur_min) {
            cur_min = local;
            rep.witness = s;
        }
    };

    // Subset enumeration, sizes 2 .. n+2.
    std::vector<int> sel;
    std::function<void(int, int)> rec = [&](int start, int want) {
        if (want == 0) {
            consider(sel);
            return;
        }
        for (int i = start; i <= P - want; ++i) {
            sel.push_back(i);
            rec(i + 1, want - 1);
            sel.pop_back();
        }
    };
    for (int r = 2; r <= max_r; ++r) rec(0, r);

    if (!(rep.delta_r < std::numeric_limits<double>::infinity())) rep.delta_r = 0.0;
    if (!(rep.delta_c < std::numeric_limits<double>::infinity())) rep.delta_c = 0.0;
    if (!(rep.delta_c_origin < std::numeric_limits<double>::infinity())) rep.delta_c_origin = 0.0;
    rep.delta_set = std::min(rep.delta_r, rep.delta_c);
    rep.strongly_basic = rep.delta_set > kTolRank;
    return rep;
}

ClassifyResult classify_sum(const ExpSum& sum, const Box& window) {
    ClassifyResult res;
    std::vector<CVec> pts;
    for (const auto& t : sum.terms()) pts.push_back(t.m);
    if (pts.size() >= 2) {
        res.set_report = exponent_set_quality(pts, sum.dim());
        res.strongly = res.set_report.strongly_basic;
    } else {
        res.strongly = true;  // single term: nothing to degenerate
        res.set_report.strongly_basic = true;
    }

    if (sum.dim() != 1) {
        if (res.strongly) res.basic = true;  // strongly basic implies basic
        return res;
    }

    // n = 1: S_mu from the exact skeleton.  Strata of index k >= n are the
    // edges; their active pairs are the catalog 1-simplices.
    Skeleton2D skel = build_skeleton_2d(sum, window);
    std::set<std::pair<int, int>> pairs;
    for (const auto& e : skel.edges) {
        for (std::size_t a = 0; a < e.active.size(); ++a)
            for (std::size_t b = a + 1; b < e.active.size(); ++b)
                pairs.insert({e.active[a], e.active[b]});
    }
    for (const auto& [i, j] : pairs) {
        Simplex s;
        s.vertices = {sum.term(i).m, sum.term(j).m};
        res.catalog.simplices.push_back(s);
        res.catalog.active_sets.push_back({i, j});
    }
    if (res.catalog.simplices.empty()) {
        res.window_warning = true;
        res.basic = true;  // vacuously
        res.strictly = true;
        return res;
    }
    bool basic = true, strictly = true;
    CVec origin = CVec::Zero(1);
    for (const auto& s : res.catalog.simplices) {
        if (simplex_quality(s, VolMode::Complexified) <= 0.0) basic = false;
        if (simplex_quality(s, VolMode::Complexified, &origin) <= 0.0) strictly = false;
    }
    res.basic = basic;
    res.strictly = basic && strictly;
    return res;
}

ShiftResult find_shift(const SimplexCatalog& catalog, const CVec& anchor, double c2, double c3,
                       uint64_t seed, int max_tries) {
    if (c2 <= 0.0 || c3 <= 0.0) throw std::invalid_argument("find_shift: c2, c3 > 0 required");
    ShiftResult res;
    res.m = anchor;
    if (catalog.simplices.empty()) {
        res.ok = true;
        return res;
    }
    int n = catalog.simplices.front().dim();
    Rng rng(seed);
    res.best_margin = -std::numeric_limits<double>::infinity();
    for (int t = 0; t < max_tries; ++t) {
        res.tries = t + 1;
        // Uniform in the real 2n-ball of radius c2 about the anchor
        // (rejection from the cube).
        CVec m(n);
        while (true) {
            double r2 = 0.0;
            for (int q = 0; q < n; ++q) {
                double re = rand_range(rng, -1.0, 1.0);
                double im = rand_range(rng, -1.0, 1.0);
                m[q] = Complex(re, im);
                r2 += re * re + im * im;
            }
            if (r2 <= 1.0) break;
        }
        m = anchor + c2 * m;
        double margin = std::numeric_limits<double>::infinity();
        for (const auto& s : catalog.simplices)
            margin = std::min(margin, simplex_quality(s, VolMode::Complexified, &m));
        if (margin > res.best_margin) {
            res.best_margin = margin;
            res.m = m;
        }
        if (margin >= c3) {
            res.ok = true;
            res.m = m;
            return res;
        }
    }
    return res;
}

ShiftResult find_shift(const ExpSum& sum, const Box& window, const CVec& anchor, double c2,
                       double c3, uint64_t seed, int max_tries) {
    ClassifyResult cls = classify_sum(sum, window);
    return find_shift(cls.catalog, anchor, c2, c3, seed, max_tries);
}

}  // namespace expskel
