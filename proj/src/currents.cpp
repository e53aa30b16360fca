#include "expskel/currents.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "expskel/rng.hpp"
#include "expskel/solve.hpp"

namespace expskel {

namespace {

// Adaptive Simpson along a segment.
double simpson_segment(const std::function<double(double)>& g, double a, double b, double fa,
                       double fm, double fb, double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = g(lm), frm = g(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson_segment(g, a, m, fa, flm, fm, left, tol * 0.5, depth - 1) +
           simpson_segment(g, m, b, fm, frm, fb, right, tol * 0.5, depth - 1);
}

double integrate_edge(const SkelEdge& e, const TestFunction& psi) {
    Vec2 d = e.b - e.a;
    double len = norm(d);
    if (len <= 0.0) return 0.0;
    auto g = [&](double t) {
        Vec2 p = e.a + t * d;
        return psi(Complex(p.x, p.y));
    };
    double fa = g(0.0), fm = g(0.5), fb = g(1.0);
    double whole = (fa + 4.0 * fm + fb) / 6.0;
    double val = simpson_segment(g, 0.0, 1.0, fa, fm, fb, whole, 1e-11, 24);
    return val * len;
}

Complex wrap_into(const Box& dom, Complex z) {
    double x = std::fmod(z.real() - dom.x0, dom.width());
    if (x < 0.0) x += dom.width();
    double y = std::fmod(z.imag() - dom.y0, dom.height());
    if (y < 0.0) y += dom.height();
    return {dom.x0 + x, dom.y0 + y};
}

double collect_pairing(const std::vector<std::pair<Complex, int>>& roots, const Box& dom,
                       bool periodic, const TestFunction& psi, double merge_radius) {
    std::vector<std::pair<Complex, int>> uniq;
    for (auto [z, mult] : roots) {
        Complex w = periodic ? wrap_into(dom, z) : z;
        bool dup = false;
        for (auto& [u, m] : uniq) {
            double d;
            if (periodic) {
                Complex dd = u - w;
                double dx = std::min(std::abs(dd.real()), dom.width() - std::abs(dd.real()));
                double dy = std::min(std::abs(dd.imag()), dom.height() - std::abs(dd.imag()));
                d = std::hypot(dx, dy);
            } else {
                d = std::abs(u - w);
            }
            if (d <= merge_radius * 10.0) {
                dup = true;
                break;
            }
        }
        if (!dup) uniq.push_back({w, mult});
    }
    double s = 0.0;
    for (auto [z, mult] : uniq) s += mult * psi(z);
    return s;
}

}  // namespace

TestFunction psi_const() {
    TestFunction t;
    t.name = "const";
    t.f = [](Complex) { return 1.0; };
    t.c0 = 1.0;
    t.integral = [](const Box& b) { return b.area(); };
    return t;
}

std::vector<TestFunction> psi_catalog() {
    std::vector<TestFunction> cat;
    cat.push_back(psi_const());

    TestFunction trig;
    trig.name = "trig";
    trig.f = [](Complex z) {
        return 1.0 + 0.5 * std::sin(2.0 * M_PI * z.real()) * std::sin(2.0 * M_PI * z.imag());
    };
    trig.c0 = 1.5;
    trig.c1 = M_PI;  // |grad| <= pi
    trig.c2 = 2.0 * M_PI * M_PI;
    trig.integral = [](const Box& b) {
        auto F = [](double a0, double a1) {
            return (std::cos(2.0 * M_PI * a0) - std::cos(2.0 * M_PI * a1)) / (2.0 * M_PI);
        };
        return b.area() + 0.5 * F(b.x0, b.x1) * F(b.y0, b.y1);
    };
    cat.push_back(trig);

    TestFunction bump;
    bump.name = "bump";
    bump.f = [](Complex z) {
        double sx = std::sin(M_PI * z.real()), sy = std::sin(M_PI * z.imag());
        return sx * sx * sy * sy;
    };
    bump.c0 = 1.0;
    bump.c1 = M_PI;
    bump.c2 = 2.0 * M_PI * M_PI;
    bump.integral = [](const Box& b) {
        auto F = [](double a0, double a1) {
            // integral of sin^2(pi t) over [a0, a1]
            return 0.5 * (a1 - a0) - (std::sin(2.0 * M_PI * a1) - std::sin(2.0 * M_PI * a0)) /
                                         (4.0 * M_PI);
        };
        return F(b.x0, b.x1) * F(b.y0, b.y1);
    };
    cat.push_back(bump);
    return cat;
}

double beta_pairing(const Net& net, const TestFunction& psi) {
    // Voronoi (replicated for tori), edges clipped to the domain; the edge
    // between cells i and j carries density |p_i - p_j|/2 with the actual
    // representative distance.
    std::vector<Complex> reps;
    std::vector<int> base;
    if (!net.periodic) {
        reps = net.points;
        for (std::size_t i = 0; i < reps.size(); ++i) base.push_back(static_cast<int>(i));
    } else {
        double W = net.domain.width(), H = net.domain.height();
        for (std::size_t j = 0; j < net.points.size(); ++j)
            for (int u = -1; u <= 1; ++u)
                for (int v = -1; v <= 1; ++v) {
                    reps.push_back(net.points[j] + Complex(u * W, v * H));
                    base.push_back(static_cast<int>(j));
                }
    }
    Skeleton2D vor = voronoi_diagram(reps, net.domain);
    double total = 0.0;
    for (const auto& e : vor.edges) {
        if (e.cell_i == e.cell_j) continue;
        double d = std::abs(reps[static_cast<std::size_t>(e.cell_i)] -
                            reps[static_cast<std::size_t>(e.cell_j)]);
        total += 0.5 * d * integrate_edge(e, psi);
    }
    return total;
}

double zero_pairing(const SectionSpec& spec, const TestFunction& psi, const Box& window,
                    int* flagged, const FindOpts& opts) {
    RootSet roots = find_roots(spec.global_sum, window, RootMode::Zeros, opts);
    if (flagged) {
        *flagged = 0;
        for (const auto& r : roots.points)
            if (r.boundary) (*flagged)++;
    }
    std::vector<std::pair<Complex, int>> pts;
    for (const auto& r : roots.points) pts.push_back({r.z[0], r.multiplicity});
    // Periodic windows wrap into the half-open fundamental domain; wrapped
    // duplicates merge inside collect_pairing.
    return collect_pairing(pts, window, spec.net.periodic, psi, opts.merge_radius);
}

double zero_pairing(const SurgeredSection& field, SectionMode mode, const SectionSpec& spec,
                    const TestFunction& psi, const Box& window, int* flagged,
                    const FindOpts& opts) {
    // Seed from the raw section zeros; surgery moves zeros only inside the
    // 3R1 balls, where extra seeds are laid on a fine grid.
    RootSet raw = find_roots(spec.global_sum, window, RootMode::Zeros, opts);
    std::vector<Complex> seeds;
    for (const auto& r : raw.points) seeds.push_back(r.z[0]);
    const ClusterSet& cs = field.clusters();
    double epsk = spec.epsk();
    for (const auto& cl : cs.clusters) {
        for (Complex m : cl.members) {
            double rad = 3.0 * cs.R1 / epsk;
            int nring = 12;
            for (int a = 0; a < nring; ++a)
                for (double rr : {0.2 * rad, 0.5 * rad, 0.8 * rad})
                    seeds.push_back(m + rr * Complex(std::cos(2.0 * M_PI * a / nring),
                                                     std::sin(2.0 * M_PI * a / nring)));
        }
    }
    std::vector<std::pair<Complex, int>> pts;
    int bflag = 0;
    for (Complex s : seeds) {
        auto z = field.refine_zero(s, mode, opts.tol_newton);
        if (!z) continue;
        if (!window.contains(*z)) continue;
        pts.push_back({*z, 1});
        if (window.boundary_distance(to_vec2(*z)) < opts.merge_radius) bflag++;
    }
    if (flagged) *flagged = bflag;
    return collect_pairing(pts, window, spec.net.periodic, psi, opts.merge_radius);
}

std::vector<PairingTable> limit_study(const Box& domain, const std::vector<double>& k_list,
                                      const std::vector<TestFunction>& cat,
                                      const LimitStudyOpts& opts) {
    if (k_list.size() < 3) throw std::invalid_argument("limit_study: need >= 3 k values");
    for (std::size_t i = 1; i < k_list.size(); ++i)
        if (k_list[i] <= k_list[i - 1])
            throw std::invalid_argument("limit_study: k_list must increase");

    std::vector<PairingTable> tables(cat.size());
    for (std::size_t c = 0; c < cat.size(); ++c) tables[c].psi_name = cat[c].name;

    Net fixed_net;
    std::vector<Complex> fixed_amp;
    if (!opts.schedule) {
        fixed_net = generic_net(domain, opts.epsilon, opts.c1, opts.c2_target, opts.periodic,
                                opts.seed);
        Rng rng(opts.seed ^ 0xa5a5a5a5ull);
        for (std::size_t j = 0; j < fixed_net.points.size(); ++j)
            fixed_amp.push_back(rand_phase(rng));
    }

    for (double k : k_list) {
        Net net;
        std::vector<Complex> amp;
        if (opts.schedule) {
            double eps_k = std::pow(k, -opts.sched_pow);
            net = generic_net(domain, eps_k, opts.c1, opts.c2_target, opts.periodic,
                              opts.seed + static_cast<uint64_t>(k));
            Rng rng(opts.seed ^ (0x9e3779b9ull + static_cast<uint64_t>(k)));
            for (std::size_t j = 0; j < net.points.size(); ++j) amp.push_back(rand_phase(rng));
        } else {
            net = fixed_net;
            amp = fixed_amp;
        }
        SectionSpec spec = build_section(net, amp, k);

        FindOpts fo;
        fo.grid_density = opts.grid_density > 0
                              ? opts.grid_density
                              : std::max(32, static_cast<int>(std::ceil(std::sqrt(k) * 3.0)));
        std::string note;
        ClusterSet clusters = detect_clusters(spec, opts.cluster_C3, opts.cluster_R1);
        bool surgered = !clusters.clusters.empty();
        Surgery surgery = surgered ? perturb_section(spec, clusters, opts.seed + 17)
                                   : Surgery{SurgeredSection(spec, clusters), {}, true, 0.0};
        if (surgered) {
            note = "clusters=" + std::to_string(clusters.clusters.size());
            if (!surgery.ok) note += " surgery_failed";
        }

        for (std::size_t c = 0; c < cat.size(); ++c) {
            PairingRow row;
            row.k = k;
            row.epsilon = net.epsilon;
            int bflag = 0;
            row.zero_pairing =
                surgered ? zero_pairing(surgery.field, SectionMode::Hat, spec, cat[c], domain,
                                        &bflag, fo)
                         : zero_pairing(spec, cat[c], domain, &bflag, fo);
            row.beta_pairing = beta_pairing(net, cat[c]);
            row.target = opts.schedule ? cat[c].integral(domain) : row.beta_pairing;
            row.gap_over_k = std::abs(2.0 * M_PI * row.zero_pairing / k - row.target);
            row.note = note + (bflag ? (note.empty() ? "" : " ") + std::string("boundary=") +
                                           std::to_string(bflag)
                                     : "");
            tables[c].rows.push_back(std::move(row));
        }
    }
    return tables;
}

}  // namespace expskel
