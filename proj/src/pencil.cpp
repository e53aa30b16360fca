#include "expskel/pencil.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "expskel/skeleton.hpp"

namespace expskel {

namespace {

Complex log_sum_signed(Complex a, Complex b_minus) {
    // log(e^a - e^b) via e^a - e^b = e^a (1 - e^{b-a}); cancellation below
    // the double noise floor counts as exact.
    if (b_minus.real() > a.real()) {
        Complex r = log_sum_signed(b_minus, a);
        return r + Complex(0.0, M_PI);
    }
    Complex w = 1.0 - std::exp(b_minus - a);
    if (std::abs(w) < 1e-13) return {-std::numeric_limits<double>::infinity(), 0.0};
    return a + std::log(w);
}

}  // namespace

PencilSpec::PencilSpec(std::vector<CVec> exponents, std::vector<Complex> alpha0,
                       std::vector<Complex> alphainf, std::optional<double> r0)
    : exponents_(std::move(exponents)), alpha0_(std::move(alpha0)), alphainf_(std::move(alphainf)) {
    validate_and_finish(r0);
}

PencilSpec::PencilSpec(std::vector<CVec> exponents, std::vector<Complex> alpha0,
                       std::vector<Complex> alphainf, std::vector<int> group, int n_groups)
    : exponents_(std::move(exponents)),
      alpha0_(std::move(alpha0)),
      alphainf_(std::move(alphainf)),
      section_form_(true),
      group_(std::move(group)),
      n_groups_(n_groups) {
    if (group_.size() != exponents_.size())
        throw std::invalid_argument("PencilSpec: group list size mismatch");
    for (int g : group_)
        if (g < 0 || g >= n_groups_) throw std::invalid_argument("PencilSpec: bad group index");
    validate_and_finish(std::nullopt);
}

void PencilSpec::validate_and_finish(std::optional<double> r0) {
    if (exponents_.empty()) throw std::invalid_argument("PencilSpec: no terms");
    if (alpha0_.size() != exponents_.size() || alphainf_.size() != exponents_.size())
        throw std::invalid_argument("PencilSpec: coefficient list size mismatch");
    dim_ = static_cast<int>(exponents_.front().size());
    for (const auto& m : exponents_)
        if (m.size() != dim_) throw std::invalid_argument("PencilSpec: exponent dim mismatch");
    for (std::size_t j = 0; j < exponents_.size(); ++j) {
        if (std::abs(alpha0_[j].real() - alphainf_[j].real()) > 1e-9)
            throw std::invalid_argument(
                "PencilSpec: |e^alpha0| must equal |e^alphainf| per term (equal real parts)");
    }
    // Separation of the phase ratios on the unit circle.  For section pencils
    // terms of one group share a ratio, so only cross-group pairs count.
    separation_ = std::numeric_limits<double>::infinity();
    int nt = term_count();
    for (int a = 0; a < nt; ++a) {
        for (int b = a + 1; b < nt; ++b) {
            if (section_form_ && group_[static_cast<std::size_t>(a)] ==
                                     group_[static_cast<std::size_t>(b)])
                continue;
            double arc = std::abs(std::arg(ratio(a) / ratio(b)));
            separation_ = std::min(separation_, arc);
        }
    }
    if (!(separation_ < std::numeric_limits<double>::infinity())) separation_ = 2.0 * M_PI;
    separated_ = separation_ > 1e-9;
    if (r0) {
        r0_ = *r0;
    } else {
        double min_center_dist = std::numeric_limits<double>::infinity();
        for (int a = 0; a < nt; ++a)
            for (int b = a + 1; b < nt; ++b) {
                if (section_form_ && group_[static_cast<std::size_t>(a)] ==
                                         group_[static_cast<std::size_t>(b)])
                    continue;
                min_center_dist = std::min(min_center_dist, std::abs(ratio(a) - ratio(b)));
            }
        r0_ = min_center_dist < std::numeric_limits<double>::infinity() ? 0.5 * min_center_dist
                                                                        : 1.0;
        if (r0_ <= 0.0) r0_ = 0.5;  // non-separated pencils still get a chart
    }
}

Complex PencilSpec::ratio(int j) const {
    return std::exp(alpha0_[static_cast<std::size_t>(j)] - alphainf_[static_cast<std::size_t>(j)]);
}

ExpSum pencil_sum(const PencilSpec& p, TParam t, int* cancelled) {
    std::vector<ExpTerm> terms;
    int dropped = 0;
    for (int j = 0; j < p.term_count(); ++j) {
        Complex alpha;
        if (t.at_infinity) {
            alpha = p.alphainf()[static_cast<std::size_t>(j)];
        } else {
            Complex a = p.ratio(j) + t.value;
            // Cancellation at t = -rho_j; |rho| = 1, so anything below the
            // relative noise floor is an exact zero in double arithmetic.
            if (std::abs(a) < 1e-13 * (1.0 + std::abs(t.value))) {
                dropped++;
                continue;
            }
            alpha = p.alphainf()[static_cast<std::size_t>(j)] + std::log(a);
        }
        terms.push_back({alpha, p.exponents()[static_cast<std::size_t>(j)]});
    }
    if (terms.empty()) throw std::runtime_error("pencil_sum: all coefficients vanish");
    if (cancelled) *cancelled = dropped;
    return ExpSum(p.dim(), std::move(terms));
}

TreeCoord tree_coordinate(const PencilSpec& p, TParam t) {
    TreeCoord c;
    if (p.section_form()) {
        if (t.at_infinity || std::abs(t.value) < 1e-300) return c;  // |log| = inf: root
        int N = p.n_groups();
        for (int g = 0; g < N; ++g) {
            // zeta_g from any member term: rho = -zeta.
            int rep = -1;
            for (int j = 0; j < p.term_count(); ++j)
                if (p.group()[static_cast<std::size_t>(j)] == g) {
                    rep = j;
                    break;
                }
            if (rep < 0) continue;
            Complex zeta = -p.ratio(rep);
            Complex lg = std::log(t.value / zeta);
            double mag = std::abs(lg);
            if (mag <= M_PI / N) {
                c.root = false;
                c.leg = g;
                double arg = mag * N / M_PI;
                c.tau = arg < 1e-13 ? kTauNegInf : std::log(arg);  // t at zeta_g
                return c;
            }
        }
        return c;
    }
    if (t.at_infinity) return c;
    for (int j = 0; j < p.term_count(); ++j) {
        double d = std::abs(t.value + p.ratio(j));
        if (d <= p.r0()) {
            c.root = false;
            c.leg = j;
            c.tau = d < 1e-13 * (1.0 + std::abs(t.value)) ? kTauNegInf : std::log(d / p.r0());
            return c;
        }
    }
    return c;
}

ExpSum tau_skeleton_sum(const PencilSpec& p, const TreeCoord& coord) {
    std::vector<ExpTerm> terms;
    for (int j = 0; j < p.term_count(); ++j) {
        double a0 = p.alpha0()[static_cast<std::size_t>(j)].real();  // = Re alphainf
        bool on_leg = !coord.root &&
                      (p.section_form() ? p.group()[static_cast<std::size_t>(j)] == coord.leg
                                        : j == coord.leg);
        if (on_leg) {
            if (coord.tau <= kTauNegInf) continue;  // limit skeleton: term removed
            a0 += coord.tau;
        }
        terms.push_back({Complex(a0, 0.0), p.exponents()[static_cast<std::size_t>(j)]});
    }
    if (terms.empty()) throw std::runtime_error("tau_skeleton_sum: all terms removed");
    return ExpSum(p.dim(), std::move(terms));
}

ExpSum pencil_wronskian(const PencilSpec& p) {
    if (p.dim() != 1) throw std::invalid_argument("pencil_wronskian: n = 1 only");
    std::vector<ExpTerm> terms;
    int nt = p.term_count();
    for (int j = 0; j < nt; ++j) {
        for (int k = j + 1; k < nt; ++k) {
            Complex dm = p.exponents()[static_cast<std::size_t>(k)][0] -
                         p.exponents()[static_cast<std::size_t>(j)][0];
            if (std::abs(dm) < 1e-300) continue;
            // coefficient (e^{a0_j + ainf_k} - e^{a0_k + ainf_j}) (m_k - m_j)
            Complex lse = log_sum_signed(
                p.alpha0()[static_cast<std::size_t>(j)] + p.alphainf()[static_cast<std::size_t>(k)],
                p.alpha0()[static_cast<std::size_t>(k)] + p.alphainf()[static_cast<std::size_t>(j)]);
            if (!std::isfinite(lse.real())) continue;
            CVec m = cvec1(p.exponents()[static_cast<std::size_t>(j)][0] +
                           p.exponents()[static_cast<std::size_t>(k)][0]);
            terms.push_back({lse + std::log(dm), m});
        }
    }
    if (terms.empty())
        throw std::runtime_error("pencil_wronskian: W vanishes identically (degenerate pencil)");
    return ExpSum(1, std::move(terms));
}

int SingularSet::total_multiplicity() const {
    int s = 0;
    for (const auto& q : points) s += q.multiplicity;
    return s;
}

SingularSet find_pencil_singular(const PencilSpec& p, const Box& window, const FindOpts& opts) {
    if (p.dim() != 1)
        throw std::invalid_argument(
            "find_pencil_singular: implemented for n = 1 (the winding specialization of the "
            "boundary counting formula); higher n requires the Fubini-Study boundary integral");
    ExpSum w = pencil_wronskian(p);
    ExpSum mu0 = pencil_sum(p, TParam::at({0.0, 0.0}));
    ExpSum muinf = pencil_sum(p, TParam::infinity());

    SingularSet out;
    RootSet roots = find_roots(w, window, RootMode::Zeros, opts);

    // Base points: common zeros of mu_0 and mu_inf.
    RootSet z0 = find_roots(mu0, window, RootMode::Zeros, opts);
    for (const auto& r : z0.points) {
        double val = std::abs(evaluate_jet_shifted(muinf, r.z, 0, b_of(muinf, r.z)).value);
        if (val < 1e-8) out.base_points.push_back(r.z);
    }

    for (const auto& r : roots.points) {
        double b0 = b_of(mu0, r.z);
        double binf = b_of(muinf, r.z);
        double s = std::max(b0, binf);
        Complex v0 = evaluate_jet_shifted(mu0, r.z, 0, s).value;
        Complex vinf = evaluate_jet_shifted(muinf, r.z, 0, s).value;
        bool base = false;
        for (const auto& bp : out.base_points)
            if ((bp - r.z).norm() < 10.0 * opts.merge_radius) base = true;
        if (base) continue;  // examined separately
        SingularPoint q;
        q.z = r.z;
        q.multiplicity = r.multiplicity;
        if (std::abs(vinf) < 1e-13 * std::abs(v0)) {
            q.t = TParam::infinity();
        } else {
            q.t = TParam::at(-v0 / vinf);
        }
        out.points.push_back(std::move(q));
    }
    return out;
}

namespace {

// Best achievable third dominance gap at z over the whole tree: at the root
// nothing is lowered; on leg j the entry slides anywhere below alpha°_j (the
// leg end removes it).  Membership in U_c of the union of per-tau vertex
// sets is exactly "this gap < c".
double tree_vertex_gap(const PencilSpec& p, const CVec& z) {
    int n = p.term_count();
    std::vector<double> f(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        f[static_cast<std::size_t>(i)] =
            p.alpha0()[static_cast<std::size_t>(i)].real() +
            cdot(p.exponents()[static_cast<std::size_t>(i)], z).real();
    double best = std::numeric_limits<double>::infinity();
    if (n >= 3) {
        std::vector<double> s = f;
        std::sort(s.rbegin(), s.rend());
        best = s[0] - s[2];
    }
    int legs = p.legs();
    for (int leg = 0; leg < legs; ++leg) {
        std::vector<double> others;
        double leg_top = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i) {
            bool on_leg = p.section_form() ? p.group()[static_cast<std::size_t>(i)] == leg
                                           : i == leg;
            if (on_leg)
                leg_top = std::max(leg_top, f[static_cast<std::size_t>(i)]);
            else
                others.push_back(f[static_cast<std::size_t>(i)]);
        }
        if (others.size() < 2) continue;
        std::sort(others.rbegin(), others.rend());
        if (leg_top >= others[1]) best = std::min(best, others[0] - others[1]);
        if (others.size() >= 3) best = std::min(best, others[0] - others[2]);
    }
    return best;
}

}  // namespace

PencilVerification verify_pencil(const PencilSpec& p, const Box& window,
                                 const std::vector<TParam>& t_samples, double c,
                                 const FindOpts& opts) {
    if (p.dim() != 1) throw std::invalid_argument("verify_pencil: n = 1 only");
    PencilVerification rep;

    // The one-parameter tree tracks only the degenerating coefficient; the
    // remaining log-moduli wander by at most log((2+r0)/r0) across t, so the
    // tree-skeleton gaps are certified at that offset on top of c.
    double tree_offset = std::log((2.0 + p.r0()) / p.r0());

    // (b) needs the root-skeleton vertices; refuse when the pencil is not
    // separated (spec'd genericity violation).
    rep.base_refused = !p.separated();
    TreeCoord root_coord;
    ExpSum root_sum = tau_skeleton_sum(p, root_coord);
    Skeleton2D root_skel = build_skeleton_2d(root_sum, window);
    double vertex_tol = 1e-8 * (1.0 + window.diam());

    for (const auto& t : t_samples) {
        ExpSum mu_t = pencil_sum(p, t);
        TreeCoord coord = tree_coordinate(p, t);
        ExpSum tau_sum = tau_skeleton_sum(p, coord);

        if (mu_t.term_count() >= 2) {
            RootSet zeros = find_roots(mu_t, window, RootMode::Zeros, opts);
            for (const auto& r : zeros.points) {
                rep.zeros_checked++;
                // Member skeleton: the zero set is in U_c(Gamma(mu_t)) for
                // any c > log(active terms - 1).
                StratumLocation loc = locate(mu_t, r.z, c);
                double g2 = dominance(mu_t, r.z, c).second_gap();
                if (std::isfinite(g2)) rep.max_fiber_gap = std::max(rep.max_fiber_gap, g2);
                if (!loc.in_U_c[1]) {
                    rep.fiber_ok = false;
                    rep.fiber_violations++;
                }
                double gt = dominance(tau_sum, r.z, c).second_gap();
                if (std::isfinite(gt)) {
                    rep.max_fiber_gap_tree = std::max(rep.max_fiber_gap_tree, gt);
                    if (gt >= c + tree_offset) rep.fiber_tree_ok = false;
                }
            }
        }

        if (!rep.base_refused && !root_skel.vertices.empty()) {
            Skeleton2D tau_skel = build_skeleton_2d(tau_sum, window);
            for (const auto& v : root_skel.vertices) {
                double d = tau_skel.distance(v.p);
                rep.max_vertex_dist = std::max(rep.max_vertex_dist, d);
                if (d > vertex_tol) rep.base_ok = false;
            }
        }
    }

    SingularSet sing = find_pencil_singular(p, window, opts);
    for (const auto& q : sing.points) {
        rep.singular_checked++;
        // (c) hard check: the union of vertex sets over the whole tree, at
        // 3c.  The containment chain pays the fiber constant twice before
        // reaching the union skeleton, hence the factor 3 on the supplied c.
        double ug = tree_vertex_gap(p, q.z);
        rep.max_singular_gap_tree = std::max(rep.max_singular_gap_tree, ug);
        if (!(ug < 3.0 * c)) rep.singular_ok = false;
        // diagnostic: third gap of the realized member at the point
        ExpSum mu_t = pencil_sum(p, q.t);
        Dominance dom = dominance(mu_t, q.z, c);
        if (dom.order.size() >= 3)
            rep.max_singular_gap =
                std::max(rep.max_singular_gap, dom.gap[static_cast<std::size_t>(dom.order[2])]);
    }
    return rep;
}

std::vector<TParam> standard_t_samples(int total) {
    std::vector<TParam> out;
    out.push_back(TParam::at({0.0, 0.0}));
    out.push_back(TParam::infinity());
    int rem = std::max(total - 2, 3);
    int per = rem / 3;
    int extra = rem - 3 * per;
    std::vector<double> radii = {0.5, 1.0, 2.0};
    for (std::size_t ri = 0; ri < radii.size(); ++ri) {
        int cnt = per + (static_cast<int>(ri) < extra ? 1 : 0);
        for (int i = 0; i < cnt; ++i) {
            double th = 2.0 * M_PI * (i + 0.37) / cnt;  // avoid exact axis hits
            out.push_back(TParam::at(radii[ri] * Complex(std::cos(th), std::sin(th))));
        }
    }
    return out;
}

}  // namespace expskel
