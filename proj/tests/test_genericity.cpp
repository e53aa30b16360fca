#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/SVD>

#include "expskel/genericity.hpp"
#include "oracles.hpp"

using namespace expskel;

namespace {

Simplex splx(std::initializer_list<Complex> pts) {
    Simplex s;
    for (Complex p : pts) s.vertices.push_back(cvec1(p));
    return s;
}

ExpSum unit_sum(std::initializer_list<Complex> exps) {
    std::vector<ExpTerm> ts;
    for (Complex m : exps) ts.push_back({Complex(0, 0), cvec1(m)});
    return ExpSum(1, std::move(ts));
}

}  // namespace

TEST_CASE("simplex_volume examples") {
    CHECK(simplex_volume(splx({0.0, 1.0}), VolMode::Complexified) == doctest::Approx(0.5));
    CHECK(simplex_volume(splx({0.0, 1.0, Complex(0, 1)}), VolMode::Real) == doctest::Approx(0.5));
    // scaling: Vol_C scales as diam^2
    CHECK(simplex_volume(splx({0.0, 2.0}), VolMode::Complexified) == doctest::Approx(2.0));
}

TEST_CASE("simplex_volume base-vertex independence") {
    Rng rng(31);
    for (int rep = 0; rep < 40; ++rep) {
        int n = 1 + static_cast<int>(rng() % 2);
        int k = 1 + static_cast<int>(rng() % n);
        auto pts = oracle::random_points(rng, k + 1, n, 2.0, 0.2);
        Simplex s;
        s.vertices = pts;
        double v0 = simplex_volume(s, VolMode::Complexified);
        for (int rot = 1; rot <= k; ++rot) {
            std::rotate(s.vertices.begin(), s.vertices.begin() + 1, s.vertices.end());
            double v = simplex_volume(s, VolMode::Complexified);
            CHECK(v == doctest::Approx(v0).epsilon(1e-10));
        }
    }
}

TEST_CASE("simplex_quality examples") {
    CHECK(simplex_quality(splx({0.0, 1.0}), VolMode::Complexified) ==
          doctest::Approx(std::sqrt(0.5)));
    CHECK(simplex_quality(splx({0.0, 1.0, Complex(0, 1)}), VolMode::Real) == doctest::Approx(0.5));
    CHECK(simplex_quality(splx({0.0, 1.0, 2.0}), VolMode::Real) == 0.0);
}

TEST_CASE("quality scale invariance") {
    Rng rng(37);
    for (int rep = 0; rep < 30; ++rep) {
        auto pts = oracle::random_points(rng, 3, 1, 2.0, 0.2);
        Simplex s;
        s.vertices = pts;
        double q = simplex_quality(s, VolMode::Real);
        Simplex t;
        double lam = rand_range(rng, 0.3, 4.0);
        for (const auto& v : s.vertices) t.vertices.push_back(lam * v);
        CHECK(simplex_quality(t, VolMode::Real) == doctest::Approx(q).epsilon(1e-10));
    }
}

TEST_CASE("delta_C_m dominated by delta_C") {
    Rng rng(41);
    for (int rep = 0; rep < 50; ++rep) {
        auto pts = oracle::random_points(rng, 2, 1, 2.0, 0.3);
        Simplex s;
        s.vertices = pts;
        CVec m = cvec1(Complex(rand_range(rng, -2, 2), rand_range(rng, -2, 2)));
        CHECK(simplex_quality(s, VolMode::Complexified, &m) <=
              simplex_quality(s, VolMode::Complexified) + 1e-12);
    }
}

TEST_CASE("exponent_set_quality examples") {
    GenericityReport r1 =
        exponent_set_quality({cvec1(0.0), cvec1(1.0), cvec1(Complex(0, 1))}, 1);
    CHECK(r1.delta_set == doctest::Approx(0.5));
    CHECK(r1.strongly_basic);
    CHECK(r1.witness.k() == 2);  // the right triangle attains the minimum

    GenericityReport r2 = exponent_set_quality({cvec1(0.0), cvec1(1.0), cvec1(2.0)}, 1);
    CHECK(r2.delta_set == 0.0);
    CHECK(!r2.strongly_basic);

    GenericityReport r3 = exponent_set_quality({cvec1(0.0), cvec1(1.0)}, 1);
    CHECK(r3.delta_set == doctest::Approx(std::sqrt(0.5)));
}

TEST_CASE("exponent_set_quality matches the brute-force oracle") {
    Rng rng(43);
    for (int rep = 0; rep < 25; ++rep) {
        int n = 1 + static_cast<int>(rng() % 2);
        int count = 3 + static_cast<int>(rng() % 5);
        auto pts = oracle::random_points(rng, count, n, 2.0, 0.15);
        GenericityReport rep1 = exponent_set_quality(pts, n);
        oracle::SetQuality rep2 = oracle::set_quality(pts, n);
        CHECK(rep1.delta_set ==
              doctest::Approx(rep2.delta_set).epsilon(1e-9));
        CHECK(rep1.strongly_basic == rep2.strongly_basic);
    }
}

TEST_CASE("combinatorial guard") {
    std::vector<CVec> many;
    for (int i = 0; i < 500; ++i)
        many.push_back(cvec2(Complex(i, 0.1 * i), Complex(0.3 * i, -i)));
    CHECK_THROWS_AS(exponent_set_quality(many, 2), std::runtime_error);
}

TEST_CASE("classify_sum examples") {
    Box w{-5, -5, 5, 5};
    ClassifyResult a = classify_sum(unit_sum({0.0, 1.0, Complex(0, 1)}), w);
    CHECK(a.strongly);
    CHECK(a.basic.has_value());
    CHECK(*a.basic);
    CHECK(*a.strictly);

    ClassifyResult b = classify_sum(unit_sum({0.0, 1.0, 2.0}), w);
    CHECK(!b.strongly);
    CHECK(*b.basic);  // active pairs are 1-simplices of nonzero length

    ClassifyResult c = classify_sum(unit_sum({0.0, 1.0}), w);
    CHECK(c.strongly);
    CHECK(*c.strictly);
}

TEST_CASE("strongly basic implies basic on random planar sums") {
    Rng rng(47);
    Box w{-5, -5, 5, 5};
    for (int rep = 0; rep < 200; ++rep) {
        ExpSum s = oracle::random_strongly_basic_sum(rng, 3 + static_cast<int>(rng() % 3));
        ClassifyResult c = classify_sum(s, w);
        REQUIRE(c.basic.has_value());
        CHECK(*c.basic);
    }
}

TEST_CASE("total reality iff doubled rank 2k") {
    Rng rng(53);
    int done = 0;
    while (done < 100) {
        int n = 2;
        int k = 1 + static_cast<int>(rng() % 2);
        std::vector<CVec> pts;
        if (done % 5 == 4) {
            // constructed degenerate: v2 = i v1
            CVec v1(2);
            v1 << Complex(rand_range(rng, -1, 1), rand_range(rng, -1, 1)),
                Complex(rand_range(rng, -1, 1), rand_range(rng, -1, 1));
            pts = {CVec::Zero(2), v1, Complex(0, 1) * v1};
            k = 2;
        } else {
            pts = oracle::random_points(rng, k + 1, n, 1.5, 0.2);
        }
        Simplex s;
        s.vertices = pts;
        done++;
        double q = simplex_quality(s, VolMode::Complexified);
        // rank of {v_i, J v_i}
        Eigen::MatrixXd A(2 * n, 2 * k);
        double diam = s.diameter();
        for (int i = 1; i <= k; ++i) {
            CVec v = (s.vertices[static_cast<std::size_t>(i)] - s.vertices[0]) / diam;
            CVec jv = Complex(0, 1) * v;
            for (int q2 = 0; q2 < n; ++q2) {
                A(2 * q2, 2 * (i - 1)) = v[q2].real();
                A(2 * q2 + 1, 2 * (i - 1)) = v[q2].imag();
                A(2 * q2, 2 * (i - 1) + 1) = jv[q2].real();
                A(2 * q2 + 1, 2 * (i - 1) + 1) = jv[q2].imag();
            }
        }
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
        int rank = 0;
        for (Eigen::Index si = 0; si < svd.singularValues().size(); ++si)
            if (svd.singularValues()[si] > 1e-8) rank++;
        CHECK((q > kTolRank) == (rank == 2 * k));
    }
}

TEST_CASE("find_shift examples") {
    Box w{-5, -5, 5, 5};
    ExpSum two = unit_sum({0.0, 1.0});
    ClassifyResult cls = classify_sum(two, w);

    // success probability per draw >= 0.9, measured over 1000 seeds
    int succeeded_first_try = 0;
    for (uint64_t seed = 0; seed < 1000; ++seed) {
        ShiftResult r = find_shift(cls.catalog, CVec::Zero(1), 0.5, 0.1, seed, 1);
        if (r.ok) succeeded_first_try++;
    }
    CHECK(succeeded_first_try >= 900);

    // catalog empty: anchor unchanged
    SimplexCatalog empty;
    ShiftResult re = find_shift(empty, cvec1(Complex(0.3, 0.4)), 0.5, 0.1, 1, 10);
    CHECK(re.ok);
    CHECK(re.m[0] == Complex(0.3, 0.4));

    // impossible target: failure carrying the best margin
    ShiftResult rf = find_shift(cls.catalog, CVec::Zero(1), 0.5, 10.0, 1, 50);
    CHECK(!rf.ok);
    CHECK(rf.best_margin < 10.0);
    CHECK(rf.best_margin > 0.0);
    CHECK(rf.tries == 50);
}

TEST_CASE("shifted sum is accepted by its own margin") {
    // find_shift margins certify delta_C_m over the catalog; recheck with the
    // oracle quality on the shifted model.
    Rng rng(59);
    Box w{-5, -5, 5, 5};
    for (int rep = 0; rep < 20; ++rep) {
        ExpSum s = oracle::random_strongly_basic_sum(rng, 3);
        ClassifyResult cls = classify_sum(s, w);
        ShiftResult sr = find_shift(cls.catalog, CVec::Zero(1), 0.5, 0.05, rep, 200);
        REQUIRE(sr.ok);
        for (const auto& sim : cls.catalog.simplices) {
            std::vector<CVec> verts = sim.vertices;
            double q = oracle::simplex_quality(verts, true, 1, &sr.m);
            CHECK(q >= 0.05 - 1e-12);
        }
    }
}
