#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "expskel/expsum.hpp"
#include "oracles.hpp"

using namespace expskel;

namespace {

ExpSum sum_1_ez() {  // 1 + e^z
    return ExpSum(1, {{Complex(0, 0), cvec1(0.0)}, {Complex(0, 0), cvec1(1.0)}});
}

ExpSum sum_cosh() {  // e^z + e^{-z}
    return ExpSum(1, {{Complex(0, 0), cvec1(1.0)}, {Complex(0, 0), cvec1(-1.0)}});
}

ExpSum sum_three() {  // 1 + e^z + e^{iz}
    return ExpSum(1, {{Complex(0, 0), cvec1(0.0)},
                      {Complex(0, 0), cvec1(1.0)},
                      {Complex(0, 0), cvec1(Complex(0, 1))}});
}

}  // namespace

TEST_CASE("evaluate_jet examples") {
    ExpSum mu = sum_1_ez();
    Jet j0 = evaluate_jet(mu, cvec1(Complex(0, M_PI)), 0);
    CHECK(std::abs(j0.value) < 1e-14);

    Jet j1 = evaluate_jet(mu, cvec1(0.0), 1);
    CHECK(j1.value.real() == doctest::Approx(2.0));
    CHECK(std::abs(j1.gradient[0] - Complex(1, 0)) < 1e-14);

    Jet j2 = evaluate_jet(sum_cosh(), cvec1(0.0), 2);
    CHECK(j2.value.real() == doctest::Approx(2.0));
    CHECK(std::abs(j2.gradient[0]) < 1e-14);
    CHECK(std::abs(j2.hessian(0, 0) - Complex(2, 0)) < 1e-14);
}

TEST_CASE("dominance examples") {
    ExpSum mu = sum_1_ez();
    Dominance d = dominance(mu, cvec1(2.0), 1.0);
    CHECK(d.b == doctest::Approx(2.0));
    CHECK(d.argmax == std::vector<int>{1});
    CHECK(d.near == std::vector<int>{1});

    Dominance d0 = dominance(mu, cvec1(0.0), 1.0);
    CHECK(d0.b == doctest::Approx(0.0));
    CHECK(d0.argmax == std::vector<int>{0, 1});

    ExpSum tri = sum_three();
    Dominance d3 = dominance(tri, cvec1(0.0), 0.5);
    CHECK(d3.argmax == std::vector<int>{0, 1, 2});
    CHECK(d3.near == std::vector<int>{0, 1, 2});
}

TEST_CASE("normalized_c1 examples") {
    ExpSum mu = sum_1_ez();
    CHECK(normalized_c1(mu, cvec1(0.0), cvec1(0.0)) == doctest::Approx(3.0));
    CHECK(normalized_c1(mu, cvec1(Complex(0, M_PI)), cvec1(Complex(0, M_PI))) ==
          doctest::Approx(1.0));

    // e^{10} + e^{10} e^z : scale invariance of the normalized datum
    ExpSum big(1, {{Complex(10, 0), cvec1(0.0)}, {Complex(10, 0), cvec1(1.0)}});
    CHECK(normalized_c1(big, cvec1(0.0), cvec1(0.0)) == doctest::Approx(3.0));
}

TEST_CASE("transform: shift and recenter") {
    ExpSum mu = sum_1_ez();
    ExpSum shifted = transform(mu, cvec1(1.0), std::nullopt);
    CHECK(shifted.term(0).m[0] == Complex(-1, 0));
    CHECK(shifted.term(1).m[0] == Complex(0, 0));

    ExpSum rec = transform(mu, std::nullopt, cvec1(Complex(0, M_PI)));
    // b(q) = 0, so alpha picks up m_i * (i pi); exponents unchanged
    CHECK(rec.term(0).m[0] == Complex(0, 0));
    CHECK(rec.term(1).m[0] == Complex(1, 0));
    CHECK(std::abs(rec.term(0).alpha) < 1e-14);
    CHECK(std::abs(rec.term(1).alpha - Complex(0, M_PI)) < 1e-14);
}

TEST_CASE("recenter-evaluate oracle on 20 random sums") {
    Rng rng(7);
    for (int rep = 0; rep < 20; ++rep) {
        ExpSum s = oracle::random_sum(rng, 2 + static_cast<int>(rng() % 4), 1);
        CVec q = cvec1(Complex(rand_range(rng, -2, 2), rand_range(rng, -2, 2)));
        ExpSum rec = transform(s, std::nullopt, q);
        CVec z = cvec1(Complex(rand_range(rng, -1, 1), rand_range(rng, -1, 1)));
        Complex lhs = evaluate_jet(rec, z, 0).value;
        // e^{-b(q)} mu(q + z), evaluated directly with the shift
        CVec qz = q + z;
        Complex rhs = evaluate_jet_shifted(s, qz, 0, b_of(s, q)).value;
        CHECK(std::abs(lhs - rhs) <= 1e-11 * (1.0 + std::abs(rhs)));
    }
}

TEST_CASE("gauge invariance") {
    Rng rng(11);
    for (int rep = 0; rep < 50; ++rep) {
        ExpSum s = oracle::random_sum(rng, 3, 1);
        CVec mstar = cvec1(Complex(rand_range(rng, -1, 1), rand_range(rng, -1, 1)));
        ExpSum sh = transform(s, mstar, std::nullopt);
        Complex z(rand_range(rng, -1.5, 1.5), rand_range(rng, -1.5, 1.5));
        double lhs = std::abs(evaluate_jet(sh, cvec1(z), 0).value);
        double rhs =
            std::abs(std::exp(-mstar[0] * z)) * std::abs(evaluate_jet(s, cvec1(z), 0).value);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("gradient matches central finite differences") {
    Rng rng(13);
    int checked = 0;
    while (checked < 100) {
        ExpSum s = oracle::random_sum(rng, 2 + static_cast<int>(rng() % 4),
                                      1 + static_cast<int>(rng() % 2));
        CVec z(s.dim());
        for (int q = 0; q < s.dim(); ++q)
            z[q] = Complex(rand_range(rng, -1.5, 1.5), rand_range(rng, -1.5, 1.5));
        if (b_of(s, z) > 10.0) continue;
        checked++;
        Jet jet = evaluate_jet(s, z, 1);
        double h = 1e-6;
        for (int q = 0; q < s.dim(); ++q) {
            CVec zp = z, zm = z;
            zp[q] += h;
            zm[q] -= h;
            Complex fd = (evaluate_jet(s, zp, 0).value - evaluate_jet(s, zm, 0).value) / (2.0 * h);
            CHECK(std::abs(fd - jet.gradient[q]) <= 1e-5 * (1.0 + std::abs(jet.gradient[q])));
        }
    }
}

TEST_CASE("dominance consistency and reorder invariance") {
    Rng rng(17);
    for (int rep = 0; rep < 30; ++rep) {
        ExpSum s = oracle::random_sum(rng, 4, 1);
        CVec z = cvec1(Complex(rand_range(rng, -2, 2), rand_range(rng, -2, 2)));
        Dominance d = dominance(s, z, 0.7);
        for (int i : d.argmax)
            CHECK(std::find(d.near.begin(), d.near.end(), i) != d.near.end());
        // b invariant under term reordering
        std::vector<ExpTerm> rev(s.terms().rbegin(), s.terms().rend());
        ExpSum sr(1, std::move(rev));
        CHECK(b_of(sr, z) == doctest::Approx(b_of(s, z)).epsilon(1e-15));
    }
}

TEST_CASE("recenter normalization is exact") {
    Rng rng(19);
    for (int rep = 0; rep < 20; ++rep) {
        ExpSum s = oracle::random_sum(rng, 3, 1);
        CVec q = cvec1(Complex(rand_range(rng, -3, 3), rand_range(rng, -3, 3)));
        ExpSum rec = transform(s, std::nullopt, q);
        CHECK(b_of(rec, cvec1(0.0)) == 0.0);  // exactly
    }
}

TEST_CASE("duplicate exponents merge by coefficient addition") {
    ExpSum s(1, {{Complex(0, 0), cvec1(1.0)}, {Complex(0, 0), cvec1(1.0)}});
    CHECK(s.term_count() == 1);
    CHECK(s.term(0).alpha.real() == doctest::Approx(std::log(2.0)));

    // exact cancellation drops the term
    ExpSum c(1, {{Complex(0, 0), cvec1(1.0)},
                 {Complex(0, M_PI), cvec1(1.0)},
                 {Complex(0, 0), cvec1(0.0)}});
    CHECK(c.term_count() == 1);
    CHECK(c.dropped_terms() == 1);
}

TEST_CASE("overflow guard and shifted evaluation") {
    ExpSum big(1, {{Complex(0, 0), cvec1(0.0)}, {Complex(1000.0, 0), cvec1(1.0)}});
    CHECK_THROWS_AS(evaluate_jet(big, cvec1(0.0), 0), std::overflow_error);
    Jet shifted = evaluate_jet_shifted(big, cvec1(0.0), 0, 1000.0);
    CHECK(std::abs(shifted.value - Complex(1.0, 0.0)) < 1e-12);  // e^{-1000} + 1

    // normalized_c1 keeps working at b(base) ~ 1e5
    ExpSum huge(1, {{Complex(1e5, 0), cvec1(0.0)}, {Complex(1e5, 0), cvec1(1.0)}});
    CHECK(normalized_c1(huge, cvec1(0.0), cvec1(0.0)) == doctest::Approx(3.0));
}

TEST_CASE("pruned_for_disk keeps the dominant terms") {
    Rng rng(23);
    ExpSum s = oracle::random_sum(rng, 6, 1);
    CVec c = cvec1(Complex(0.3, -0.2));
    ExpSum pruned = pruned_for_disk(s, c, 0.5, 45.0);
    for (double dx : {-0.4, 0.0, 0.4}) {
        for (double dy : {-0.4, 0.0, 0.4}) {
            CVec z = cvec1(c[0] + Complex(dx, dy));
            double b = b_of(s, z);
            Complex full = evaluate_jet_shifted(s, z, 0, b).value;
            Complex part = evaluate_jet_shifted(pruned, z, 0, b).value;
            CHECK(std::abs(full - part) < 1e-15);
        }
    }
}

TEST_CASE("invalid inputs throw") {
    CHECK_THROWS_AS(ExpSum(1, {}), std::invalid_argument);
    CHECK_THROWS_AS(ExpSum(2, {{Complex(0, 0), cvec1(0.0)}}), std::invalid_argument);
    ExpSum s = sum_1_ez();
    CHECK_THROWS_AS(evaluate_jet(s, cvec2(0.0, 0.0), 0), std::invalid_argument);
    CHECK_THROWS_AS(transform(s, std::nullopt, std::nullopt), std::invalid_argument);
}
