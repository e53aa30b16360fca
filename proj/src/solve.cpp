#include "expskel/solve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include "expskel/parallel.hpp"

namespace expskel {

namespace {

// Normalized target and its derivative at z (n = 1): both carry the common
// e^{-b(z)} factor, which cancels in the Newton step.
struct Target1 {
    Complex g, dg;
    Complex mu, dmu;  // also normalized; used by the critical-zero filter
    double b;
};

Target1 eval_target(const ExpSum& sum, RootMode mode, Complex z) {
    CVec zv = cvec1(z);
    double b = b_of(sum, zv);
    Jet jet = evaluate_jet_shifted(sum, zv, 2, b);
    Target1 t;
    t.b = b;
    t.mu = jet.value;
    t.dmu = jet.gradient[0];
    if (mode == RootMode::Zeros) {
        t.g = jet.value;
        t.dg = jet.gradient[0];
    } else {
        t.g = jet.gradient[0];
        t.dg = jet.hessian(0, 0);
    }
    return t;
}

struct NewtonHit {
    Complex z;
    double residual;
    bool ok = false;
};

NewtonHit newton_1d(const ExpSum& sum, RootMode mode, Complex z0, const Box& window,
                    double tol) {
    NewtonHit hit;
    Complex z = z0;
    double escape = 2.0 * window.diam() + 1.0;
    Complex wc{0.5 * (window.x0 + window.x1), 0.5 * (window.y0 + window.y1)};
    Target1 t = eval_target(sum, mode, z);
    for (int it = 0; it < 60; ++it) {
        double gn = std::abs(t.g);
        if (mode == RootMode::CriticalZeros) {
            // Gauss-Newton on (mu, dmu).
            double den = std::norm(t.dmu) + std::norm(t.dg);
            if (den <= 0.0) break;
            Complex step = (std::conj(t.dmu) * t.mu + std::conj(t.dg) * t.g) / den;
            z -= step;
            if (std::abs(z - wc) > escape) break;
            t = eval_target(sum, mode, z);
            if (std::abs(step) < 1e-14 * (1.0 + std::abs(z))) break;
            continue;
        }
        if (std::abs(t.dg) <= 1e-300) break;
        Complex step = t.g / t.dg;
        // Damping: accept the first halving that does not increase |g|
        // (normalization constants differ between points; compare in log).
        double cur = std::log(std::max(gn, 1e-300)) + t.b;
        Complex znew = z;
        Target1 tnew = t;
        bool moved = false;
        for (int h = 0; h < 6; ++h) {
            znew = z - step;
            if (std::abs(znew - wc) > escape) break;
            tnew = eval_target(sum, mode, znew);
            double nxt = std::log(std::max(std::abs(tnew.g), 1e-300)) + tnew.b;
            if (nxt < cur + 1e-12 || h == 5) {
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) break;
        double travel = std::abs(znew - z);
        z = znew;
        t = tnew;
        if (travel < 1e-14 * (1.0 + std::abs(z))) break;
    }
    double res = mode == RootMode::CriticalZeros ? std::abs(t.mu) + std::abs(t.g)
                                                 : std::abs(t.g);
    hit.z = z;
    hit.residual = res;
    hit.ok = res < tol;
    return hit;
}

std::vector<Complex> make_seeds(const ExpSum& sum, const Box& window, RootMode mode,
                                int grid_density) {
    std::vector<Complex> seeds;
    double gs = std::max(window.width(), window.height()) / std::max(grid_density, 4);
    for (int i = 0; i <= grid_density; ++i) {
        for (int j = 0; j <= grid_density; ++j) {
            seeds.emplace_back(window.x0 + window.width() * (i + 0.5) / (grid_density + 1),
                               window.y0 + window.height() * (j + 0.5) / (grid_density + 1));
        }
    }
    if (sum.dim() != 1 || sum.term_count() < 2) return seeds;

    // Refinement along the skeleton: zero sets concentrate in a dominance
    // collar of Gamma, derivative zeros on bisectors shifted by
    // log|m_j/m_i| / |dm|, hence the perpendicular offset rows.
    Box grown{window.x0 - gs, window.y0 - gs, window.x1 + gs, window.y1 + gs};
    Skeleton2D skel = build_skeleton_2d(sum, grown);
    const std::size_t cap = 300000;
    for (const auto& e : skel.edges) {
        Complex mi = sum.term(e.cell_i).m[0];
        Complex mj = sum.term(e.cell_j).m[0];
        double dm = std::abs(mi - mj);
        if (dm <= 1e-12) continue;
        Vec2 dir = e.b - e.a;
        double len = norm(dir);
        if (len <= 0.0) continue;
        Vec2 u = (1.0 / len) * dir;
        Vec2 nrm{-u.y, u.x};
        double spacing = std::min({2.0 * M_PI / (3.0 * dm), len, gs});
        int cnt = static_cast<int>(std::ceil(len / spacing));
        std::vector<double> offs = {0.0};
        if (mode != RootMode::Zeros) {
            offs.push_back(1.0 / dm);
            offs.push_back(-1.0 / dm);
            offs.push_back(3.0 / dm);
            offs.push_back(-3.0 / dm);
        }
        for (int s = 0; s <= cnt && seeds.size() < cap; ++s) {
            Vec2 p = e.a + (len * s / std::max(cnt, 1)) * u;
            for (double o : offs) seeds.push_back(to_complex(p + o * nrm));
        }
    }
    double mscale = std::max(sum.max_exponent_norm(), 1e-6);
    for (const auto& v : skel.vertices) {
        for (double r : {0.5 / mscale, 1.5 / mscale, 0.5 * gs}) {
            for (int a = 0; a < 8; ++a) {
                double th = 2.0 * M_PI * a / 8.0;
                seeds.push_back(to_complex(v.p) + Complex(r * std::cos(th), r * std::sin(th)));
            }
        }
    }
    return seeds;
}

int multiplicity_by_winding(const ExpSum& sum, RootMode mode, Complex z, double r) {
    WindTarget tg = mode == RootMode::Critical ? WindTarget::Derivative : WindTarget::Value;
    try {
        // The center is a root by construction, so values on the probe
        // circle are legitimately tiny (~ r^mult); only exact zeros abort.
        return count_winding(sum, tg, Contour::circle(z, r), 64, 1e-290);
    } catch (const std::exception&) {
        return 1;  // another root touches the probe circle; treat as simple
    }
}

RootSet find_roots_1d(const ExpSum& sum, const Box& window, RootMode mode,
                      const FindOpts& opts) {
    std::vector<Complex> seeds = make_seeds(sum, window, mode, opts.grid_density);
    double gs = std::max(window.width(), window.height()) / std::max(opts.grid_density, 4);
    double prune_r = 2.0 * gs;

    std::vector<NewtonHit> hits(seeds.size());
    parallel_for(seeds.size(), [&](std::size_t i) {
        ExpSum local = pruned_for_disk(sum, cvec1(seeds[i]), prune_r);
        NewtonHit h = newton_1d(local, mode, seeds[i], window, opts.tol_newton * 1e2);
        if (h.ok && local.term_count() != sum.term_count()) {
            // Re-verify against the full sum; the pruned model is only a
            // surrogate along the Newton path.
            h = newton_1d(sum, mode, h.z, window, opts.tol_newton);
        } else if (h.ok) {
            h = newton_1d(sum, mode, h.z, window, opts.tol_newton);
        }
        hits[i] = h;
    });

    RootSet rs;
    rs.mode = mode;
    std::vector<Root> accepted;
    for (const auto& h : hits) {
        if (!h.ok) continue;
        Vec2 p = to_vec2(h.z);
        if (!window.contains(p)) continue;
        if (mode == RootMode::CriticalZeros && h.residual >= opts.tol_newton) continue;
        bool merged = false;
        for (auto& r : accepted) {
            if (std::abs(r.z[0] - h.z) <= opts.merge_radius) {
                if (h.residual < r.residual) {
                    r.z = cvec1(h.z);
                    r.residual = h.residual;
                }
                merged = true;
                break;
            }
        }
        if (!merged) {
            Root r;
            r.z = cvec1(h.z);
            r.residual = h.residual;
            accepted.push_back(std::move(r));
        }
    }
    std::sort(accepted.begin(), accepted.end(), [](const Root& a, const Root& b) {
        if (a.z[0].real() != b.z[0].real()) return a.z[0].real() < b.z[0].real();
        return a.z[0].imag() < b.z[0].imag();
    });
    for (std::size_t i = 0; i < accepted.size(); ++i) {
        Root& r = accepted[i];
        r.boundary = window.boundary_distance(to_vec2(r.z[0])) < opts.merge_radius;
        double probe = 10.0 * opts.merge_radius;
        for (std::size_t j = 0; j < accepted.size(); ++j)
            if (j != i)
                probe = std::min(probe, 0.45 * std::abs(accepted[j].z[0] - r.z[0]));
        r.multiplicity = multiplicity_by_winding(sum, mode, r.z[0], probe);
        if (r.multiplicity < 1) r.multiplicity = 1;
    }
    rs.points = std::move(accepted);
    return rs;
}

// n = 2 critical points: Newton on the gradient with the Hessian.
RootSet find_roots_2d_critical(const ExpSum& sum, const Box& window, const FindOpts& opts) {
    int den = std::min(opts.grid_density, 14);
    std::vector<CVec> seeds;
    for (int a = 0; a <= den; ++a)
        for (int b = 0; b <= den; ++b)
            for (int c = 0; c <= den; ++c)
                for (int d = 0; d <= den; ++d)
                    seeds.push_back(cvec2({window.x0 + window.width() * (a + 0.5) / (den + 1),
                                           window.y0 + window.height() * (b + 0.5) / (den + 1)},
                                          {window.x0 + window.width() * (c + 0.5) / (den + 1),
                                           window.y0 + window.height() * (d + 0.5) / (den + 1)}));
    std::vector<std::pair<CVec, double>> hits(seeds.size(), {CVec(), -1.0});
    parallel_for(seeds.size(), [&](std::size_t i) {
        CVec z = seeds[i];
        for (int it = 0; it < 60; ++it) {
            double b = b_of(sum, z);
            Jet jet = evaluate_jet_shifted(sum, z, 2, b);
            Eigen::PartialPivLU<CMat> lu(jet.hessian);
            CVec step = lu.solve(jet.gradient);
            if (!finite(step)) return;
            z -= step;
            if (!finite(z)) return;
            if (step.norm() < 1e-14 * (1.0 + z.norm())) break;
        }
        double b = b_of(sum, z);
        Jet jet = evaluate_jet_shifted(sum, z, 1, b);
        double res = jet.gradient.norm();
        if (res < opts.tol_newton) hits[i] = {z, res};
    });
    RootSet rs;
    rs.mode = RootMode::Critical;
    for (const auto& [z, res] : hits) {
        if (res < 0.0) continue;
        bool inside = window.contains(Vec2{z[0].real(), z[0].imag()}) &&
                      window.contains(Vec2{z[1].real(), z[1].imag()});
        if (!inside) continue;
        bool merged = false;
        for (auto& r : rs.points)
            if ((r.z - z).norm() <= opts.merge_radius) {
                merged = true;
                break;
            }
        if (!merged) {
            Root r;
            r.z = z;
            r.residual = res;
            rs.points.push_back(std::move(r));
        }
    }
    std::sort(rs.points.begin(), rs.points.end(), [](const Root& a, const Root& b) {
        for (int q = 0; q < 2; ++q) {
            if (a.z[q].real() != b.z[q].real()) return a.z[q].real() < b.z[q].real();
            if (a.z[q].imag() != b.z[q].imag()) return a.z[q].imag() < b.z[q].imag();
        }
        return false;
    });
    return rs;
}

}  // namespace

int RootSet::total_multiplicity() const {
    int s = 0;
    for (const auto& r : points) s += r.multiplicity;
    return s;
}

RootSet find_roots(const ExpSum& sum, const Box& window, RootMode mode, const FindOpts& opts) {
    if (sum.dim() == 1) return find_roots_1d(sum, window, mode, opts);
    if (sum.dim() == 2 && mode == RootMode::Critical)
        return find_roots_2d_critical(sum, window, opts);
    throw std::invalid_argument(
        "find_roots: zeros/critical_zeros are point sets only for n = 1; n = 2 supports "
        "critical mode");
}

Complex Contour::point(double s) const {
    if (is_circle) {
        double th = 2.0 * M_PI * s;
        return center + radius * Complex(std::cos(th), std::sin(th));
    }
    double w = box.width(), h = box.height();
    double per = 2.0 * (w + h);
    double d = s * per;
    if (d < w) return {box.x0 + d, box.y0};
    d -= w;
    if (d < h) return {box.x1, box.y0 + d};
    d -= h;
    if (d < w) return {box.x1 - d, box.y1};
    d -= w;
    return {box.x0, box.y1 - d};
}

int count_winding(const ExpSum& sum, WindTarget target, const Contour& contour,
                  int min_samples, double min_abs_threshold) {
    if (sum.dim() != 1) throw std::invalid_argument("count_winding: n = 1 only");
    int N = std::max(min_samples, 64);
    std::optional<int> prev;
    for (; N <= (1 << 21); N *= 2) {
        std::vector<Complex> vals(static_cast<std::size_t>(N));
        double min_abs = std::numeric_limits<double>::infinity();
        parallel_for(static_cast<std::size_t>(N), [&](std::size_t i) {
            CVec z = cvec1(contour.point(static_cast<double>(i) / N));
            double b = b_of(sum, z);
            Jet jet = evaluate_jet_shifted(sum, z, target == WindTarget::Value ? 0 : 1, b);
            vals[i] = target == WindTarget::Value ? jet.value : jet.gradient[0];
        });
        for (const auto& v : vals) min_abs = std::min(min_abs, std::abs(v));
        if (min_abs < min_abs_threshold)
            throw std::runtime_error(
                "count_winding: root on (or too close to) the contour; perturb the contour");
        double total = 0.0, max_step = 0.0;
        bool bad = false;
        for (int i = 0; i < N && !bad; ++i) {
            Complex ratio = vals[static_cast<std::size_t>((i + 1) % N)] / vals[static_cast<std::size_t>(i)];
            double d = std::arg(ratio);
            max_step = std::max(max_step, std::abs(d));
            if (std::abs(d) > 0.5 * M_PI) bad = true;
            total += d;
        }
        if (bad) {
            prev.reset();
            continue;
        }
        double w = total / (2.0 * M_PI);
        int wi = static_cast<int>(std::llround(w));
        if (std::abs(w - wi) > 0.25) {
            prev.reset();
            continue;
        }
        if (prev && *prev == wi) return wi;
        prev = wi;
    }
    throw std::runtime_error("count_winding: failed to stabilize");
}

BoundReport verify_bounds(const ExpSum& sum, const Box& window, double c, BoundMode mode,
                          double c1, int grid_density, const FindOpts& opts) {
    BoundReport rep;
    rep.mode = mode;
    rep.c_used = c;
    rep.window = window;
    int l = sum.term_count() - 1;
    if (mode == BoundMode::ZeroContainment) {
        double bound = l >= 1 ? std::log(static_cast<double>(l)) : 0.0;
        if (l >= 1 && c <= bound)
            throw std::invalid_argument("verify_bounds: zero containment needs c > log(l) = " +
                                        std::to_string(bound));
        RootSet roots = find_roots(sum, window, RootMode::Zeros, opts);
        rep.min_margin = std::numeric_limits<double>::infinity();
        for (const auto& r : roots.points) {
            StratumLocation loc = locate(sum, r.z, c);
            double g2 = dominance(sum, r.z, c).second_gap();
            rep.min_margin = std::min(rep.min_margin, c - g2);
            if (!loc.in_U_c[2 * sum.dim() - 1]) rep.violations.push_back(r.z);
        }
        if (roots.points.empty()) rep.min_margin = c;
        rep.grid_nx = rep.grid_ny = opts.grid_density;
        return rep;
    }
    if (c1 <= 0.0) throw std::invalid_argument("verify_bounds: c1_lower needs c_1 > 0");
    if (sum.dim() != 1) throw std::invalid_argument("verify_bounds: c1_lower is planar only");
    rep.grid_nx = rep.grid_ny = grid_density;
    std::vector<double> vals(static_cast<std::size_t>(grid_density) * grid_density,
                             std::numeric_limits<double>::infinity());
    std::vector<char> outside(vals.size(), 0);
    parallel_for(vals.size(), [&](std::size_t i) {
        int ix = static_cast<int>(i) % grid_density, iy = static_cast<int>(i) / grid_density;
        Complex z{window.x0 + window.width() * (ix + 0.5) / grid_density,
                  window.y0 + window.height() * (iy + 0.5) / grid_density};
        CVec zv = cvec1(z);
        StratumLocation loc = locate(sum, zv, c1);
        if (loc.in_U_c[sum.dim() - 1]) return;  // inside U_{c1}(Gamma^{(n-1)})
        outside[i] = 1;
        vals[i] = normalized_c1(sum, zv, zv);
    });
    rep.min_margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < vals.size(); ++i) {
        if (!outside[i]) continue;
        rep.min_margin = std::min(rep.min_margin, vals[i]);
        if (vals[i] < 1e-12) {
            int ix = static_cast<int>(i) % grid_density, iy = static_cast<int>(i) / grid_density;
            rep.violations.push_back(cvec1({window.x0 + window.width() * (ix + 0.5) / grid_density,
                                            window.y0 + window.height() * (iy + 0.5) / grid_density}));
        }
    }
    return rep;
}

}  // namespace expskel
