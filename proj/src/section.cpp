#include "expskel/section.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include "expskel/parallel.hpp"
#include "expskel/rng.hpp"

namespace expskel {

namespace {

double wrap_delta(double d, double period) {
    d = std::fmod(d, period);
    if (d > 0.5 * period) d -= period;
    if (d < -0.5 * period) d += period;
    return d;
}

// Quintic smoothstep: 0 at u<=0, 1 at u>=1, C^2.
double smooth01(double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

double smooth01_deriv(double u) {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    return 30.0 * u * u * (1.0 - u) * (1.0 - u);
}

// rho = 1 below lo, 0 above hi.
double cutoff(double d, double lo, double hi) { return 1.0 - smooth01((d - lo) / (hi - lo)); }

double cutoff_deriv(double d, double lo, double hi) {
    return -smooth01_deriv((d - lo) / (hi - lo)) / (hi - lo);
}

// Minimal quality over simplices containing the candidate with all 1-edges
// <= cutoff (pairs and triples; n = 1).
double candidate_quality(const std::vector<Complex>& nearby, Complex p, double cutoff_len) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t n = nearby.size();
    for (std::size_t a = 0; a < n; ++a) {
        if (std::abs(nearby[a] - p) > cutoff_len) continue;
        Simplex pair;
        pair.vertices = {cvec1(p), cvec1(nearby[a])};
        best = std::min(best, simplex_quality(pair, VolMode::Complexified));
        for (std::size_t b = a + 1; b < n; ++b) {
            if (std::abs(nearby[b] - p) > cutoff_len) continue;
            if (std::abs(nearby[a] - nearby[b]) > cutoff_len) continue;
            Simplex tri;
            tri.vertices = {cvec1(p), cvec1(nearby[a]), cvec1(nearby[b])};
            best = std::min(best, simplex_quality(tri, VolMode::Real));
        }
    }
    return best;
}

std::vector<Complex> replicate_near(const Net& net, Complex center, double radius) {
    std::vector<Complex> out;
    if (!net.periodic) {
        for (Complex q : net.points)
            if (std::abs(q - center) <= radius) out.push_back(q);
        return out;
    }
    double W = net.domain.width(), H = net.domain.height();
    int ru = static_cast<int>(std::ceil(radius / W)) + 1;
    int rv = static_cast<int>(std::ceil(radius / H)) + 1;
    for (Complex q : net.points)
        for (int u = -ru; u <= ru; ++u)
            for (int v = -rv; v <= rv; ++v) {
                Complex t = q + Complex(u * W, v * H);
                if (std::abs(t - center) <= radius) out.push_back(t);
            }
    return out;
}

}  // namespace

double Net::dist(Complex a, Complex b) const {
    if (!periodic) return std::abs(a - b);
    double dx = wrap_delta(a.real() - b.real(), domain.width());
    double dy = wrap_delta(a.imag() - b.imag(), domain.height());
    return std::hypot(dx, dy);
}

double net_quality(const Net& net) {
    // Enumerate pairs/triples at cutoff 2*epsilon; for periodic nets the
    // replicated representatives carry the wrapped geometry.
    double cutoff_len = 2.0 * net.epsilon;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < net.points.size(); ++i) {
        Complex p = net.points[i];
        std::vector<Complex> nearby = replicate_near(net, p, cutoff_len + 1e-12);
        // drop p itself (one copy)
        for (std::size_t a = 0; a < nearby.size(); ++a)
            if (std::abs(nearby[a] - p) < 1e-12) {
                nearby.erase(nearby.begin() + static_cast<std::ptrdiff_t>(a));
                break;
            }
        best = std::min(best, candidate_quality(nearby, p, cutoff_len));
    }
    if (!(best < std::numeric_limits<double>::infinity())) best = 1.0;
    return best;
}

Net make_net(std::vector<Complex> points, double epsilon, const Box& domain, bool periodic,
             double c1) {
    if (points.empty()) throw std::invalid_argument("make_net: no points");
    if (epsilon <= 0.0) throw std::invalid_argument("make_net: epsilon > 0 required");
    Net net;
    net.points = std::move(points);
    net.epsilon = epsilon;
    net.domain = domain;
    net.periodic = periodic;
    net.c1 = c1;
    double min_sep = (1.0 - c1) * epsilon;
    for (std::size_t i = 0; i < net.points.size(); ++i)
        for (std::size_t j = i + 1; j < net.points.size(); ++j)
            if (net.dist(net.points[i], net.points[j]) < min_sep - 1e-12)
                throw std::invalid_argument("make_net: separation below (1-c1) epsilon");
    // Grid-certified covering at resolution epsilon/10.
    int nx = static_cast<int>(std::ceil(domain.width() / (epsilon / 10.0))) + 1;
    int ny = static_cast<int>(std::ceil(domain.height() / (epsilon / 10.0))) + 1;
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) {
            Complex g{domain.x0 + domain.width() * i / (nx - 1.0),
                      domain.y0 + domain.height() * j / (ny - 1.0)};
            double d = std::numeric_limits<double>::infinity();
            for (Complex q : net.points) d = std::min(d, net.dist(g, q));
            if (d > epsilon)
                throw std::invalid_argument("make_net: covering radius exceeds epsilon");
        }
    }
    net.delta = net_quality(net);
    return net;
}

Net generic_net(const Box& domain, double epsilon, double c1, double c2_target, bool periodic,
                uint64_t seed, int max_tries) {
    if (epsilon <= 0.0 || epsilon >= domain.diam())
        throw std::invalid_argument("generic_net: epsilon too large for the domain");
    if (c1 <= 0.0 || c1 >= 0.5) throw std::invalid_argument("generic_net: c1 in (0, 0.5)");
    Net net;
    net.epsilon = epsilon;
    net.domain = domain;
    net.periodic = periodic;
    net.c1 = c1;

    Rng rng(seed);
    double step = epsilon / 10.0;
    int nx = static_cast<int>(std::ceil(domain.width() / step)) + 1;
    int ny = static_cast<int>(std::ceil(domain.height() / step)) + 1;
    auto grid_point = [&](int idx) {
        int i = idx % nx, j = idx / nx;
        double fx = periodic ? static_cast<double>(i) / nx : i / (nx - 1.0);
        double fy = periodic ? static_cast<double>(j) / ny : j / (ny - 1.0);
        return Complex(domain.x0 + domain.width() * fx, domain.y0 + domain.height() * fy);
    };
    int total = nx * ny;
    int budget = max_tries;
    int scan_from = 0;
    while (true) {
        int uncovered = -1;
        for (int idx = scan_from; idx < total; ++idx) {
            Complex g = grid_point(idx);
            bool cov = false;
            for (Complex q : net.points)
                if (net.dist(g, q) <= epsilon) {
                    cov = true;
                    break;
                }
            if (!cov) {
                uncovered = idx;
                break;
            }
        }
        if (uncovered < 0 && scan_from > 0) {
            // A later insertion can only add coverage, but re-scan once from
            // the start to certify.
            scan_from = 0;
            bool any = false;
            for (int idx = 0; idx < total; ++idx) {
                Complex g = grid_point(idx);
                bool cov = false;
                for (Complex q : net.points)
                    if (net.dist(g, q) <= epsilon) {
                        cov = true;
                        break;
                    }
                if (!cov) {
                    uncovered = idx;
                    any = true;
                    break;
                }
            }
            if (!any) break;
        } else if (uncovered < 0) {
            break;
        }
        scan_from = uncovered;
        Complex u = grid_point(uncovered);

        Complex best_p = u;
        double best_q = -std::numeric_limits<double>::infinity();
        bool accepted = false;
        for (int attempt = 0; attempt < 64 && budget > 0; ++attempt, --budget) {
            Complex p = rand_disk(rng, u, c1 * epsilon);
            if (periodic) {
                p = Complex(domain.x0 + std::fmod(p.real() - domain.x0 + domain.width(),
                                                  domain.width()),
                            domain.y0 + std::fmod(p.imag() - domain.y0 + domain.height(),
                                                  domain.height()));
            } else if (!domain.contains(p)) {
                continue;
            }
            std::vector<Complex> nearby = replicate_near(net, p, 2.0 * epsilon + c1 * epsilon);
            double q = candidate_quality(nearby, p, 2.0 * epsilon);
            if (q > best_q) {
                best_q = q;
                best_p = p;
            }
            if (q >= c2_target) {
                accepted = true;
                break;
            }
        }
        if (!accepted && !domain.contains(best_p) && !periodic) best_p = u;
        if (!accepted) net.flagged = true;
        net.points.push_back(best_p);
        if (budget <= 0) net.flagged = true;
    }
    net.delta = net_quality(net);
    if (net.delta < c2_target) net.flagged = true;
    return net;
}

SectionSpec build_section(const Net& net, const std::vector<Complex>& amplitudes, double k) {
    if (amplitudes.size() != net.points.size())
        throw std::invalid_argument("build_section: one amplitude per net point");
    for (Complex a : amplitudes)
        if (std::abs(std::abs(a) - 1.0) > 1e-12)
            throw std::invalid_argument("build_section: amplitudes must be unit modulus");
    if (k <= 0.0) throw std::invalid_argument("build_section: k > 0 required");

    SectionSpec spec;
    spec.net = net;
    spec.amplitudes = amplitudes;
    spec.k = k;
    spec.k_warning = k * net.epsilon * net.epsilon < 4.0;
    spec.r0_cutoff = std::sqrt(4.0 * 690.0 / k);

    std::vector<ExpTerm> terms;
    auto add_peak = [&](Complex q, int base) {
        Complex a = amplitudes[static_cast<std::size_t>(base)];
        Complex alpha = Complex(0.0, std::arg(a)) - k * std::norm(q) / 4.0;
        CVec m = cvec1(k * std::conj(q) / 2.0);
        terms.push_back({alpha, m});
        spec.rep_points.push_back(q);
        spec.rep_base.push_back(base);
    };
    if (!net.periodic) {
        for (std::size_t j = 0; j < net.points.size(); ++j)
            add_peak(net.points[j], static_cast<int>(j));
    } else {
        double W = net.domain.width(), H = net.domain.height();
        int ru = static_cast<int>(std::ceil(spec.r0_cutoff / W)) + 1;
        int rv = static_cast<int>(std::ceil(spec.r0_cutoff / H)) + 1;
        for (std::size_t j = 0; j < net.points.size(); ++j) {
            for (int u = -ru; u <= ru; ++u) {
                for (int v = -rv; v <= rv; ++v) {
                    Complex q = net.points[j] + Complex(u * W, v * H);
                    // Gaussian weight over the domain above the 1e-300 floor.
                    double dx = std::max({net.domain.x0 - q.real(), 0.0, q.real() - net.domain.x1});
                    double dy = std::max({net.domain.y0 - q.imag(), 0.0, q.imag() - net.domain.y1});
                    double d = std::hypot(dx, dy);
                    if (k * d * d / 4.0 <= 690.0) add_peak(q, static_cast<int>(j));
                }
            }
        }
    }
    spec.global_sum = ExpSum(1, std::move(terms));
    if (spec.global_sum.term_count() != static_cast<int>(spec.rep_points.size()))
        throw std::logic_error("build_section: replicated peaks collided");
    return spec;
}

double section_c1(const SectionSpec& spec, Complex z) {
    CVec zv = cvec1(z);
    double b = b_of(spec.global_sum, zv);
    Jet jet = evaluate_jet_shifted(spec.global_sum, zv, 1, b);
    Complex D = jet.gradient[0] - (spec.k / 2.0) * std::conj(z) * jet.value;
    return std::abs(jet.value) + std::abs(D) / spec.epsk();
}

Skeleton2D voronoi_diagram(const std::vector<Complex>& points, const Box& window) {
    std::vector<Affine2> f;
    f.reserve(points.size());
    for (Complex q : points)
        f.push_back({q.real(), q.imag(), -0.5 * std::norm(q)});
    return build_affine_diagram(f, window, 1e-12 * (1.0 + window.diam()));
}

double edge_set_hausdorff(const Skeleton2D& a, const Skeleton2D& b) {
    auto one_sided = [](const Skeleton2D& from, const Skeleton2D& to) {
        double worst = 0.0;
        for (const auto& e : from.edges) {
            for (int s = 0; s <= 8; ++s) {
                Vec2 p = e.a + (s / 8.0) * (e.b - e.a);
                worst = std::max(worst, to.distance(p));
            }
        }
        return worst;
    };
    if (a.edges.empty() && b.edges.empty()) return 0.0;
    if (a.edges.empty() || b.edges.empty()) return std::numeric_limits<double>::infinity();
    return std::max(one_sided(a, b), one_sided(b, a));
}

Skeleton2D section_skeleton(const SectionSpec& spec, const Box& window) {
    Skeleton2D skel = build_skeleton_2d(spec.global_sum, window);
    Skeleton2D vor = voronoi_diagram(spec.rep_points, window);
    double h = edge_set_hausdorff(skel, vor);
    if (h > 1e-8 * window.diam())
        throw std::logic_error("section_skeleton: skeleton disagrees with the Voronoi diagram");
    return skel;
}

LocalModel local_model(const SectionSpec& spec, Complex p, bool apply_shift, uint64_t seed) {
    const double eps = spec.net.epsilon;
    const double k = spec.k;
    LocalModel lm;
    lm.shift_m = CVec::Zero(1);

    std::vector<ExpTerm> full_terms;
    std::vector<ExpTerm> model_terms;
    double b_loc = -std::numeric_limits<double>::infinity();
    std::vector<Complex> alphas(spec.rep_points.size());
    for (std::size_t j = 0; j < spec.rep_points.size(); ++j) {
        const ExpTerm& t = spec.global_sum.term(static_cast<int>(j));
        Complex alpha = t.alpha + t.m[0] * p - k * std::norm(p) / 4.0;
        alphas[j] = alpha;
        b_loc = std::max(b_loc, alpha.real());
    }
    lm.b_loc = b_loc;
    for (std::size_t j = 0; j < spec.rep_points.size(); ++j) {
        Complex q = spec.rep_points[j];
        ExpTerm t{alphas[j] - b_loc, cvec1(std::conj(q - p) / (2.0 * eps))};
        full_terms.push_back(t);
        if (std::abs(q - p) <= 2.0 * eps) {
            model_terms.push_back(t);
            lm.support.push_back(static_cast<int>(j));
        }
    }
    if (model_terms.empty())
        throw std::invalid_argument("local_model: no net point within 2 epsilon of p");
    ExpSum full(1, std::move(full_terms));
    ExpSum model(1, std::move(model_terms));

    if (apply_shift) {
        Box model_window{-4.0, -4.0, 4.0, 4.0};
        ClassifyResult cls = classify_sum(model, model_window);
        ShiftResult sr = find_shift(cls.catalog, CVec::Zero(1), 0.5, 0.02, seed, 200);
        if (sr.ok) {
            lm.shift_m = sr.m;
            full = transform(full, sr.m, std::nullopt);
            model = transform(model, sr.m, std::nullopt);
        }
    }

    // Tail size: C^1 difference on a grid over |zeta| <= 3 (both sums share
    // the b_loc normalization, so this is the normalized gauge).
    double sup = 0.0;
    for (int i = -12; i <= 12; ++i) {
        for (int j2 = -12; j2 <= 12; ++j2) {
            Complex zeta(i / 4.0, j2 / 4.0);
            if (std::abs(zeta) > 3.0) continue;
            CVec zv = cvec1(zeta);
            Jet jf = evaluate_jet(full, zv, 1);
            Jet jm = evaluate_jet(model, zv, 1);
            sup = std::max(sup, std::abs(jf.value - jm.value) +
                                    std::abs(jf.gradient[0] - jm.gradient[0]));
        }
    }
    lm.error_sup = sup;
    lm.full = std::move(full);
    lm.model = std::move(model);
    return lm;
}

ClusterSet detect_clusters(const SectionSpec& spec, double C3, double R1, int grid_density) {
    if (C3 < 0.0 || R1 <= 0.0) throw std::invalid_argument("detect_clusters: C3 >= 0, R1 > 0");
    ClusterSet cs;
    cs.C3 = C3;
    cs.C4 = 0.05 * C3;
    cs.R1 = R1;
    cs.scale = spec.epsk();
    if (C3 == 0.0) return cs;

    const Box& dom = spec.net.domain;
    int nx, ny;
    if (grid_density > 0) {
        nx = ny = grid_density;
    } else {
        double step = R1 / (3.0 * cs.scale);
        nx = static_cast<int>(std::ceil(dom.width() / step)) + 1;
        ny = static_cast<int>(std::ceil(dom.height() / step)) + 1;
    }
    std::vector<double> vals(static_cast<std::size_t>(nx) * ny);
    // Tile-wise pruning keeps the scan affordable for replicated sums.
    int tile = 16;
    int tx = (nx + tile - 1) / tile, ty = (ny + tile - 1) / tile;
    parallel_for(static_cast<std::size_t>(tx) * ty, [&](std::size_t ti) {
        int tj = static_cast<int>(ti) % tx, tk = static_cast<int>(ti) / tx;
        int i0 = tj * tile, j0 = tk * tile;
        int i1 = std::min(i0 + tile, nx), j1 = std::min(j0 + tile, ny);
        Complex c{dom.x0 + dom.width() * (i0 + i1) / (2.0 * nx),
                  dom.y0 + dom.height() * (j0 + j1) / (2.0 * ny)};
        double rad = 0.75 * std::hypot(dom.width() * tile / nx, dom.height() * tile / ny);
        ExpSum pruned = pruned_for_disk(spec.global_sum, cvec1(c), rad);
        for (int i = i0; i < i1; ++i) {
            for (int j = j0; j < j1; ++j) {
                Complex z{dom.x0 + dom.width() * (i + 0.5) / nx,
                          dom.y0 + dom.height() * (j + 0.5) / ny};
                CVec zv = cvec1(z);
                double b = b_of(pruned, zv);
                Jet jet = evaluate_jet_shifted(pruned, zv, 1, b);
                Complex D = jet.gradient[0] - (spec.k / 2.0) * std::conj(z) * jet.value;
                vals[static_cast<std::size_t>(j) * nx + i] =
                    std::abs(jet.value) + std::abs(D) / spec.epsk();
            }
        }
    });

    std::vector<Complex> hits;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            if (vals[static_cast<std::size_t>(j) * nx + i] < C3)
                hits.emplace_back(dom.x0 + dom.width() * (i + 0.5) / nx,
                                  dom.y0 + dom.height() * (j + 0.5) / ny);

    // Union-find at rescaled distance 8 R1.
    std::vector<int> parent(hits.size());
    for (std::size_t i = 0; i < hits.size(); ++i) parent[i] = static_cast<int>(i);
    std::function<int(int)> find = [&](int a) {
        while (parent[static_cast<std::size_t>(a)] != a) {
            parent[static_cast<std::size_t>(a)] =
                parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
            a = parent[static_cast<std::size_t>(a)];
        }
        return a;
    };
    double link = 8.0 * R1 / cs.scale;
    for (std::size_t i = 0; i < hits.size(); ++i)
        for (std::size_t j = i + 1; j < hits.size(); ++j)
            if (std::abs(hits[i] - hits[j]) <= link) {
                int ra = find(static_cast<int>(i)), rb = find(static_cast<int>(j));
                if (ra != rb) parent[static_cast<std::size_t>(std::max(ra, rb))] = std::min(ra, rb);
            }
    std::map<int, Cluster> comps;
    for (std::size_t i = 0; i < hits.size(); ++i) comps[find(static_cast<int>(i))].members.push_back(hits[i]);
    for (auto& [root, cl] : comps) {
        double best = std::numeric_limits<double>::infinity();
        for (Complex m : cl.members) {
            double v = section_c1(spec, m);
            if (v < best) {
                best = v;
                cl.center = m;
            }
        }
        cs.clusters.push_back(cl);
    }
    // 3R1 disjointness: linking at 8R1 > 6R1 makes distinct clusters'
    // member sets > 8R1 apart, so this only fires on logic regressions.
    for (std::size_t a = 0; a < cs.clusters.size(); ++a)
        for (std::size_t b = a + 1; b < cs.clusters.size(); ++b)
            for (Complex pa : cs.clusters[a].members)
                for (Complex pb : cs.clusters[b].members)
                    if (std::abs(pa - pb) * cs.scale < 6.0 * R1) cs.merged_flag = true;
    return cs;
}

SurgeredSection::SurgeredSection(const SectionSpec& spec, const ClusterSet& clusters)
    : spec_(&spec), clusters_(clusters) {
    for (std::size_t i = 0; i < clusters_.clusters.size(); ++i) {
        const Cluster& cl = clusters_.clusters[i];
        // The subtracted tail full - model must stay in the unshifted local
        // frame; the strictness shift m_* only dresses the added constant.
        LocalModel lm = local_model(spec, cl.center, /*apply_shift=*/false);
        ClusterData cd;
        cd.center = cl.center;
        cd.members = cl.members;
        cd.full = lm.full;
        cd.model = lm.model;
        cd.b_loc = lm.b_loc;
        ClassifyResult cls = classify_sum(lm.model, Box{-4.0, -4.0, 4.0, 4.0});
        ShiftResult sr = find_shift(cls.catalog, CVec::Zero(1), 0.5, 0.02,
                                    0x5ec710ull + static_cast<uint64_t>(i), 200);
        cd.m_star = sr.ok ? sr.m[0] : Complex(0.0, 0.0);
        cd.eps_hat = 0.0;
        data_.push_back(std::move(cd));
    }
}

SectionField SurgeredSection::eval(Complex z, SectionMode mode) const {
    const double k = spec_->k;
    const double epsk = spec_->epsk();
    CVec zv = cvec1(z);
    double b = b_of(spec_->global_sum, zv);
    Jet jet = evaluate_jet_shifted(spec_->global_sum, zv, 1, b);
    Complex value = jet.value;
    Complex dz = jet.gradient[0];
    Complex dzbar = 0.0;

    if (mode != SectionMode::Raw) {
        const double R1 = clusters_.R1;
        for (const auto& cd : data_) {
            // Rescaled distance to the cluster member set, with the gradient
            // of the distance at the nearest member.
            double dmin = std::numeric_limits<double>::infinity();
            Complex qstar;
            for (Complex q : cd.members) {
                double d = std::abs(z - q);
                if (d < dmin) {
                    dmin = d;
                    qstar = q;
                }
            }
            double dt = dmin * epsk;
            if (dt >= 3.0 * R1) continue;  // bit-exact s outside the 3R1 balls

            Complex zeta = epsk * (z - cd.center);
            CVec zetav = cvec1(zeta);
            Jet jf = evaluate_jet(cd.full, zetav, 1);
            Jet jm = evaluate_jet(cd.model, zetav, 1);
            Complex P = jf.value - jm.value;
            Complex Pp = jf.gradient[0] - jm.gradient[0];

            // Frame factor e^{E}: the local data live against
            // e^{b_loc} e^{alpha_sigma + m_sigma z} with the global b removed.
            Complex m_sigma = k * std::conj(cd.center) / 2.0;
            Complex E = cd.b_loc - k * std::norm(cd.center) / 4.0 + m_sigma * z - b;
            Complex scale = std::exp(E);

            double rho_t = cutoff(dt, 2.0 * R1, 3.0 * R1);
            double drho_t = cutoff_deriv(dt, 2.0 * R1, 3.0 * R1) * epsk;
            Complex grad_d =
                dmin > 1e-300 ? std::conj(z - qstar) / (2.0 * dmin) : Complex(0.0, 0.0);

            value -= rho_t * P * scale;
            dz -= (rho_t * (Pp * epsk + P * m_sigma) + drho_t * grad_d * P) * scale;
            dzbar -= drho_t * std::conj(grad_d) * P * scale;

            if (mode == SectionMode::Hat && cd.eps_hat != Complex(0.0, 0.0)) {
                double rho_h = cutoff(dt, R1, 2.0 * R1);
                double drho_h = cutoff_deriv(dt, R1, 2.0 * R1) * epsk;
                // Shifted local frame: the model carries exponents m - m_*,
                // so the constant eps^ rides on e^{m_* zeta}.
                Complex eterm = std::exp(cd.m_star * zeta);
                Complex piece = cd.eps_hat * eterm;
                value += rho_h * piece * scale;
                dz += (rho_h * piece * (cd.m_star * epsk + m_sigma) +
                       drho_h * grad_d * piece) *
                      scale;
                dzbar += drho_h * std::conj(grad_d) * piece * scale;
            }
        }
    }
    SectionField f;
    f.b = b;
    f.value = value;
    f.dh = dz - (k / 2.0) * std::conj(z) * value;
    f.da = dzbar;
    return f;
}

std::optional<Complex> SurgeredSection::refine_zero(Complex z0, SectionMode mode,
                                                    double tol) const {
    Complex z = z0;
    for (int it = 0; it < 60; ++it) {
        SectionField f = eval(z, mode);
        // Wirtinger-Newton on F(z, zbar): dz = -(conj(D) F - A conj(F)) / (|D|^2 - |A|^2)
        Complex D = f.dh, A = f.da;
        double den = std::norm(D) - std::norm(A);
        if (std::abs(den) < 1e-300) return std::nullopt;
        Complex step = (std::conj(D) * f.value - A * std::conj(f.value)) / den;
        z -= step;
        if (std::abs(step) < 1e-15 * (1.0 + std::abs(z))) break;
    }
    SectionField f = eval(z, mode);
    if (std::abs(f.value) < tol) return z;
    return std::nullopt;
}

Surgery perturb_section(const SectionSpec& spec, const ClusterSet& clusters, uint64_t seed) {
    Surgery s{SurgeredSection(spec, clusters), {}, true, std::numeric_limits<double>::infinity()};
    Rng rng(seed);
    const double epsk = spec.epsk();
    const double R1 = clusters.R1;

    for (std::size_t ci = 0; ci < clusters.clusters.size(); ++ci) {
        const Cluster& cl = clusters.clusters[ci];
        // Scan grid over the inflated member hull in the rescaled metric.
        double pad = 3.0 * R1 / epsk;
        double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
        for (Complex m : cl.members) {
            x0 = std::min(x0, m.real());
            x1 = std::max(x1, m.real());
            y0 = std::min(y0, m.imag());
            y1 = std::max(y1, m.imag());
        }
        x0 -= pad;
        x1 += pad;
        y0 -= pad;
        y1 += pad;
        double step = R1 / (6.0 * epsk);
        int nx = static_cast<int>(std::ceil((x1 - x0) / step)) + 1;
        int ny = static_cast<int>(std::ceil((y1 - y0) / step)) + 1;
        auto scan_min = [&]() {
            double worst = std::numeric_limits<double>::infinity();
            for (int i = 0; i < nx; ++i) {
                for (int j = 0; j < ny; ++j) {
                    Complex z{x0 + (x1 - x0) * i / std::max(nx - 1, 1),
                              y0 + (y1 - y0) * j / std::max(ny - 1, 1)};
                    // only the surgered region matters
                    double dmin = std::numeric_limits<double>::infinity();
                    for (Complex m : cl.members) dmin = std::min(dmin, std::abs(z - m));
                    if (dmin * epsk > 3.0 * R1) continue;
                    SectionField f = s.field.eval(z, SectionMode::Hat);
                    worst = std::min(worst, f.c1_rescaled(epsk));
                }
            }
            return worst;
        };
        bool done = false;
        double best_margin = -std::numeric_limits<double>::infinity();
        Complex best_eps = 0.0;
        for (int attempt = 0; attempt < 50; ++attempt) {
            Complex eps_hat = 0.1 * clusters.C3 * rand_phase(rng);
            s.field.set_eps_hat(ci, eps_hat);
            double m = scan_min();
            if (m > best_margin) {
                best_margin = m;
                best_eps = eps_hat;
            }
            if (m >= clusters.C4) {
                done = true;
                break;
            }
        }
        s.field.set_eps_hat(ci, best_eps);
        s.eps_hat.push_back(best_eps);
        s.best_margin = std::min(s.best_margin, best_margin);
        if (!done) s.ok = false;
    }
    if (clusters.clusters.empty()) s.best_margin = std::numeric_limits<double>::infinity();
    return s;
}

std::pair<Coloring, PencilSpec> color_and_pencil(const SectionSpec& spec) {
    // Voronoi adjacency of the base points (replicas map back to their base).
    Skeleton2D vor = voronoi_diagram(spec.rep_points, spec.net.domain);
    int nb = static_cast<int>(spec.net.points.size());
    std::set<std::pair<int, int>> adj_pairs;
    for (const auto& e : vor.edges) {
        int bi = spec.rep_base[static_cast<std::size_t>(e.cell_i)];
        int bj = spec.rep_base[static_cast<std::size_t>(e.cell_j)];
        if (bi == bj) continue;
        adj_pairs.insert({std::min(bi, bj), std::max(bi, bj)});
    }
    std::vector<std::set<int>> adj(static_cast<std::size_t>(nb));
    for (auto [a, b] : adj_pairs) {
        adj[static_cast<std::size_t>(a)].insert(b);
        adj[static_cast<std::size_t>(b)].insert(a);
    }
    std::vector<int> order(static_cast<std::size_t>(nb));
    for (int i = 0; i < nb; ++i) order[static_cast<std::size_t>(i)] = i;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return adj[static_cast<std::size_t>(a)].size() > adj[static_cast<std::size_t>(b)].size();
    });
    Coloring col;
    col.group.assign(static_cast<std::size_t>(nb), -1);
    for (int v : order) {
        std::set<int> used;
        for (int w : adj[static_cast<std::size_t>(v)]) {
            int g = col.group[static_cast<std::size_t>(w)];
            if (g >= 0) used.insert(g);
        }
        int g = 0;
        while (used.count(g)) g++;
        col.group[static_cast<std::size_t>(v)] = g;
        col.n_groups = std::max(col.n_groups, g + 1);
    }

    int N = std::max(col.n_groups, 1);
    std::vector<CVec> exps;
    std::vector<Complex> a0, ainf;
    std::vector<int> tgroup;
    for (int j = 0; j < spec.global_sum.term_count(); ++j) {
        const ExpTerm& t = spec.global_sum.term(j);
        int g = col.group[static_cast<std::size_t>(spec.rep_base[static_cast<std::size_t>(j)])];
        exps.push_back(t.m);
        ainf.push_back(t.alpha);
        // a_0 = -a_inf zeta_g, zeta_g = e^{2 pi i (g+1)/N}
        a0.push_back(t.alpha + Complex(0.0, M_PI + 2.0 * M_PI * (g + 1) / N));
        tgroup.push_back(g);
    }
    PencilSpec pencil(std::move(exps), std::move(a0), std::move(ainf), std::move(tgroup), N);
    return {col, pencil};
}

}  // namespace expskel
