#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "expskel/pencil.hpp"
#include "oracles.hpp"

using namespace expskel;

namespace {

// exponents (0, 1), alpha0 = (0, 0), alphainf = (0, i pi): mu_0 = 1 + e^z,
// mu_inf = 1 - e^z.
PencilSpec two_term_pencil() {
    return PencilSpec({cvec1(0.0), cvec1(1.0)}, {Complex(0, 0), Complex(0, 0)},
                      {Complex(0, 0), Complex(0, M_PI)});
}

}  // namespace

TEST_CASE("pencil_sum examples") {
    PencilSpec p = two_term_pencil();
    ExpSum mu0 = pencil_sum(p, TParam::at({0, 0}));
    CHECK(mu0.term_count() == 2);
    CHECK(std::abs(evaluate_jet(mu0, cvec1(Complex(0, M_PI)), 0).value) < 1e-12);  // 1 + e^z

    int cancelled = 0;
    ExpSum mu1 = pencil_sum(p, TParam::at({1, 0}), &cancelled);
    CHECK(mu1.term_count() == 1);
    CHECK(cancelled == 1);
    CHECK(std::abs(evaluate_jet(mu1, cvec1(0.0), 0).value - Complex(2, 0)) < 1e-12);

    ExpSum muinf = pencil_sum(p, TParam::infinity());
    CHECK(std::abs(evaluate_jet(muinf, cvec1(0.0), 0).value) < 1e-12);  // 1 - e^z at 0
}

TEST_CASE("tree_coordinate examples") {
    // rho_0 = 1, r0 = 0.5 forced
    PencilSpec p({cvec1(0.0), cvec1(1.0)}, {Complex(0, 0), Complex(0, 0)},
                 {Complex(0, 0), Complex(0, M_PI)}, 0.5);
    TreeCoord c1 = tree_coordinate(p, TParam::at({-0.75, 0}));
    CHECK(!c1.root);
    CHECK(c1.leg == 0);
    CHECK(c1.tau == doctest::Approx(std::log(0.5)));

    TreeCoord c2 = tree_coordinate(p, TParam::at({0, 0}));
    CHECK(c2.root);
    CHECK(c2.tau == 0.0);

    TreeCoord c3 = tree_coordinate(p, TParam::at({-1.0, 0}));  // exactly -rho_0
    CHECK(!c3.root);
    CHECK(c3.leg == 0);
    CHECK(c3.tau <= kTauNegInf);

    CHECK(tree_coordinate(p, TParam::infinity()).root);
}

TEST_CASE("tau_skeleton_sum examples") {
    PencilSpec p = two_term_pencil();
    ExpSum root = tau_skeleton_sum(p, TreeCoord{});
    CHECK(root.term(0).alpha == Complex(0, 0));
    CHECK(root.term(1).alpha == Complex(0, 0));

    TreeCoord leg{false, 1, -1.0};
    ExpSum lowered = tau_skeleton_sum(p, leg);
    CHECK(lowered.term(1).alpha.real() == doctest::Approx(-1.0));
    CHECK(lowered.term(0).alpha == Complex(0, 0));

    TreeCoord inf_leg{false, 1, kTauNegInf};
    ExpSum limit = tau_skeleton_sum(p, inf_leg);
    CHECK(limit.term_count() == 1);
    CHECK(limit.term(0).m[0] == Complex(0, 0));
}

TEST_CASE("limit skeleton equals the skeleton of the remaining terms") {
    Rng rng(97);
    PencilSpec p = oracle::random_pencil(rng, 3);
    TreeCoord inf_leg{false, 2, kTauNegInf};
    ExpSum limit = tau_skeleton_sum(p, inf_leg);
    std::vector<ExpTerm> remaining;
    for (int j = 0; j < 2; ++j)
        remaining.push_back({Complex(p.alpha0()[static_cast<std::size_t>(j)].real(), 0.0),
                             p.exponents()[static_cast<std::size_t>(j)]});
    ExpSum direct(1, std::move(remaining));
    Box w{-4, -4, 4, 4};
    Skeleton2D a = build_skeleton_2d(limit, w);
    Skeleton2D b = build_skeleton_2d(direct, w);
    REQUIRE(a.edges.size() == b.edges.size());
    for (std::size_t i = 0; i < a.edges.size(); ++i) {
        double d = std::min(dist2(a.edges[i].a, b.edges[i].a) + dist2(a.edges[i].b, b.edges[i].b),
                            dist2(a.edges[i].a, b.edges[i].b) + dist2(a.edges[i].b, b.edges[i].a));
        CHECK(d < 1e-18);
    }
}

TEST_CASE("two-term pencil: Wronskian has no zeros, base locus empty") {
    PencilSpec p = two_term_pencil();
    ExpSum w = pencil_wronskian(p);
    CHECK(w.term_count() == 1);  // -2 e^z
    CHECK(std::abs(evaluate_jet(w, cvec1(0.0), 0).value - Complex(-2, 0)) < 1e-12);
    SingularSet s = find_pencil_singular(p, {-6, -6, 6, 6});
    CHECK(s.points.empty());
    CHECK(s.base_points.empty());
}

TEST_CASE("three-term pencil: singular count equals the Wronskian winding") {
    Rng rng(101);
    for (int rep = 0; rep < 3; ++rep) {
        PencilSpec p = oracle::random_pencil(rng, 3);
        Box w{-6, -6, 6, 6};
        SingularSet s = find_pencil_singular(p, w);
        ExpSum wr = pencil_wronskian(p);
        int wind = count_winding(wr, WindTarget::Value, Contour::box_boundary(w));
        CHECK(s.total_multiplicity() == wind);
    }
}

TEST_CASE("W consistency: symbolic Wronskian matches the numeric combination") {
    Rng rng(103);
    for (int rep = 0; rep < 4; ++rep) {
        PencilSpec p = oracle::random_pencil(rng, 3 + static_cast<int>(rng() % 2));
        ExpSum w = pencil_wronskian(p);
        ExpSum mu0 = pencil_sum(p, TParam::at({0, 0}));
        ExpSum muinf = pencil_sum(p, TParam::infinity());
        for (int i = 0; i < 25; ++i) {
            CVec z = cvec1(Complex(rand_range(rng, -2, 2), rand_range(rng, -2, 2)));
            Jet j0 = evaluate_jet(mu0, z, 1);
            Jet ji = evaluate_jet(muinf, z, 1);
            Complex direct = j0.value * ji.gradient[0] - j0.gradient[0] * ji.value;
            Complex sym = evaluate_jet(w, z, 0).value;
            CHECK(std::abs(direct - sym) <= 1e-9 * (1.0 + std::abs(direct)));
        }
    }
}

TEST_CASE("coefficient symmetry: swapping the members is t -> 1/t with scale t") {
    Rng rng(107);
    PencilSpec p = oracle::random_pencil(rng, 4);
    PencilSpec swapped(std::vector<CVec>(p.exponents()), std::vector<Complex>(p.alphainf()),
                       std::vector<Complex>(p.alpha0()));
    for (int i = 0; i < 100; ++i) {
        Complex t(rand_range(rng, -2, 2), rand_range(rng, -2, 2));
        if (std::abs(t) < 0.1) continue;
        CVec z = cvec1(Complex(rand_range(rng, -2, 2), rand_range(rng, -2, 2)));
        Complex lhs = evaluate_jet(pencil_sum(swapped, TParam::at(t)), z, 0).value;
        Complex rhs = t * evaluate_jet(pencil_sum(p, TParam::at(1.0 / t)), z, 0).value;
        CHECK(std::abs(lhs - rhs) <= 1e-10 * (1.0 + std::abs(rhs)));
    }
}

TEST_CASE("singular set invariant under a common exponential factor") {
    Rng rng(109);
    PencilSpec p = oracle::random_pencil(rng, 3);
    Complex shift(0.4, -0.3);
    std::vector<CVec> exps;
    for (const auto& m : p.exponents()) exps.push_back(cvec1(m[0] + shift));
    PencilSpec q(std::move(exps), std::vector<Complex>(p.alpha0()),
                 std::vector<Complex>(p.alphainf()));
    Box w{-5, -5, 5, 5};
    SingularSet sp = find_pencil_singular(p, w);
    SingularSet sq = find_pencil_singular(q, w);
    REQUIRE(sp.points.size() == sq.points.size());
    for (const auto& a : sp.points) {
        bool matched = false;
        for (const auto& b : sq.points)
            if ((a.z - b.z).norm() < 1e-8) matched = true;
        CHECK(matched);
    }
}

TEST_CASE("base points are joint zeros") {
    // mu_0 = (1 + e^z)(1 + a e^z), mu_inf = (1 + e^z)(1 + conj(a) e^z) with
    // |a| = 1 share the factor 1 + e^z, so +-i pi lie in the base locus while
    // the coefficient moduli still match per term.
    double theta = 2.0 * M_PI / 5.0;
    Complex a = std::polar(1.0, theta);
    PencilSpec p({cvec1(0.0), cvec1(1.0), cvec1(2.0)},
                 {Complex(0, 0), std::log(1.0 + a), Complex(0, theta)},
                 {Complex(0, 0), std::log(1.0 + std::conj(a)), Complex(0, -theta)});
    CHECK(p.separated());
    SingularSet s = find_pencil_singular(p, {-1, -7, 1, 7});
    REQUIRE(s.base_points.size() == 2);
    ExpSum mu0 = pencil_sum(p, TParam::at({0, 0}));
    ExpSum muinf = pencil_sum(p, TParam::infinity());
    for (const auto& bp : s.base_points) {
        CHECK(std::abs(evaluate_jet_shifted(mu0, bp, 0, b_of(mu0, bp)).value) < 1e-10);
        CHECK(std::abs(evaluate_jet_shifted(muinf, bp, 0, b_of(muinf, bp)).value) < 1e-10);
    }
}

TEST_CASE("verify_pencil on the two-term pencil") {
    PencilSpec p = two_term_pencil();
    PencilVerification v =
        verify_pencil(p, {-3, -7, 3, 7}, standard_t_samples(16), std::log(1.0) + 0.1);
    CHECK(v.fiber_ok);
    CHECK(v.singular_ok);
    CHECK(v.zeros_checked > 0);
    CHECK(!v.base_refused);
}

TEST_CASE("verify_pencil refuses the base check for non-separated pencils") {
    // two coincident ratios but non-proportional members
    PencilSpec p({cvec1(0.0), cvec1(1.0), cvec1(Complex(0, 1))},
                 {Complex(0, 0), Complex(0, 0), Complex(0, 0)},
                 {Complex(0, 0), Complex(0, 0), Complex(0, M_PI)});
    CHECK(!p.separated());
    PencilVerification v = verify_pencil(p, {-3, -3, 3, 3}, standard_t_samples(8), 0.8);
    CHECK(v.base_refused);
}

TEST_CASE("three-term pencil verification") {
    Rng rng(113);
    PencilSpec p = oracle::random_pencil(rng, 3);
    Box w{-6, -6, 6, 6};
    PencilVerification v = verify_pencil(p, w, standard_t_samples(32), std::log(2.0) + 0.1);
    CHECK(v.fiber_ok);
    CHECK(v.base_ok);
    CHECK(v.max_vertex_dist < 1e-8 * (1.0 + w.diam()));
    // one-parameter tree gaps stay within the r0-dependent offset
    CHECK(v.fiber_tree_ok);
}

TEST_CASE("pencil constructor validations") {
    CHECK_THROWS_AS(PencilSpec({cvec1(0.0)}, {Complex(1, 0)}, {Complex(0, 0)}),
                    std::invalid_argument);
    CHECK_THROWS_AS(PencilSpec({cvec1(0.0)}, {Complex(0, 0), Complex(0, 0)}, {Complex(0, 0)}),
                    std::invalid_argument);
}
