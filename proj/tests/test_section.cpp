#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "expskel/section.hpp"
#include "expskel/solve.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace expskel;

TEST_CASE("generic_net postconditions on the unit square") {
    Net net = generic_net({0, 0, 1, 1}, 0.3, 0.2, 0.05, false, 1);
    CHECK(net.points.size() >= 4);
    CHECK(net.points.size() <= 16);
    for (std::size_t i = 0; i < net.points.size(); ++i)
        for (std::size_t j = i + 1; j < net.points.size(); ++j)
            CHECK(std::abs(net.points[i] - net.points[j]) >= 0.8 * 0.3 - 1e-12);
    // covering certified by make_net's own grid check
    CHECK_NOTHROW(make_net(net.points, net.epsilon, net.domain, false, net.c1));
    CHECK(!net.flagged);
    CHECK(net.delta >= 0.05);
}

TEST_CASE("a single half-unit ball cannot cover the unit square") {
    Net net = generic_net({0, 0, 1, 1}, 0.5, 0.2, 0.05, false, 2);
    CHECK(net.points.size() >= 2);
}

TEST_CASE("generic nets hit the quality target across seeds") {
    for (uint64_t seed = 0; seed < 50; ++seed) {
        Net net = generic_net({0, 0, 1, 1}, 0.25, 0.2, 0.05, false, seed);
        CHECK(!net.flagged);
        CHECK(net.delta >= 0.05);
    }
}

TEST_CASE("periodic nets wrap distances") {
    Net net = generic_net({0, 0, 1, 1}, 0.3, 0.2, 0.05, true, 3);
    CHECK(net.dist({0.05, 0.5}, {0.95, 0.5}) == doctest::Approx(0.1));
    CHECK(!net.flagged);
}

TEST_CASE("build_section: single peak never vanishes") {
    Net net = make_net({{0.5, 0.5}}, 0.75, {0, 0, 1, 1}, false, 0.2);
    SectionSpec spec = build_section(net, {Complex(1, 0)}, 4.0);
    CHECK(spec.global_sum.term_count() == 1);
    RootSet rs = find_roots(spec.global_sum, net.domain, RootMode::Zeros);
    CHECK(rs.points.empty());
}

TEST_CASE("two peaks: skeleton is the perpendicular bisector") {
    Net net = make_net({{0, 0}, {1, 0}}, 0.52, {0, -0.1, 1, 0.1}, false, 0.45);
    SectionSpec spec = build_section(net, {Complex(1, 0), Complex(1, 0)}, 8.0);
    CHECK(spec.k_warning);  // k eps^2 = 2.16 < 4
    Skeleton2D skel = section_skeleton(spec, net.domain);
    REQUIRE(skel.edges.size() == 1);
    CHECK(std::abs(skel.edges[0].a.x - 0.5) < 1e-9);
    CHECK(std::abs(skel.edges[0].b.x - 0.5) < 1e-9);
}

TEST_CASE("two opposite peaks: zeros along the bisector at spacing 4 pi / k") {
    Net net = make_net({{0, 0}, {1, 0}}, 0.52, {0, -0.1, 1, 0.1}, false, 0.45);
    double k = 8.0;
    SectionSpec spec = build_section(net, {Complex(1, 0), Complex(-1, 0)}, k);
    // closed form: zeros at z = 0.5 + i 4 pi m / k on the bisector
    Box w{0.2, -3.0, 0.8, 3.0};
    RootSet rs = find_roots(spec.global_sum, w, RootMode::Zeros);
    REQUIRE(rs.points.size() >= 3);
    std::vector<double> ys;
    for (const auto& r : rs.points) {
        CHECK(std::abs(r.z[0].real() - 0.5) < 1e-9);
        ys.push_back(r.z[0].imag());
    }
    std::sort(ys.begin(), ys.end());
    for (std::size_t i = 1; i < ys.size(); ++i)
        CHECK(ys[i] - ys[i - 1] == doctest::Approx(4.0 * M_PI / k).epsilon(1e-9));
}

TEST_CASE("section skeleton equals the direct Voronoi diagram") {
    // the cross-check inside section_skeleton throws on mismatch
    Rng rng(131);
    for (uint64_t seed = 10; seed < 15; ++seed) {
        Net net = generic_net({0, 0, 1, 1}, 0.3, 0.2, 0.05, false, seed);
        std::vector<Complex> amps;
        for (std::size_t i = 0; i < net.points.size(); ++i) amps.push_back(rand_phase(rng));
        SectionSpec spec = build_section(net, amps, 100.0);
        Skeleton2D skel = section_skeleton(spec, net.domain);
        Skeleton2D vor = voronoi_diagram(spec.rep_points, net.domain);
        CHECK(edge_set_hausdorff(skel, vor) < 1e-8 * net.domain.diam());
        for (const auto& v : skel.vertices) CHECK(v.edge_degree == 3);
    }
}

TEST_CASE("Voronoi circumcenter for three corner points") {
    Skeleton2D vor = voronoi_diagram({{0, 0}, {1, 0}, {0, 1}}, {-0.5, -0.5, 1.5, 1.5});
    REQUIRE(vor.vertices.size() == 1);
    CHECK(std::abs(vor.vertices[0].p.x - 0.5) < 1e-9);
    CHECK(std::abs(vor.vertices[0].p.y - 0.5) < 1e-9);
}

TEST_CASE("local model: support, exponents, tail decay") {
    Net net = make_net({{0, 0}, {1, 0}, {2, 0}}, 0.55, {0, -0.15, 2, 0.15}, false, 0.45);
    Complex p(0.5, 0.0);
    double eps = net.epsilon;

    SectionSpec s16 = build_section(net, {Complex(1, 0), Complex(1, 0), Complex(1, 0)}, 16.0);
    LocalModel lm16 = local_model(s16, p, false);
    CHECK(lm16.support.size() == 2);  // the peak at 2 is beyond 2 eps
    // exponents conj(p_j - p)/(2 eps)
    CHECK(std::abs(lm16.model.term(0).m[0] - std::conj(Complex(0, 0) - p) / (2.0 * eps)) < 1e-12);
    CHECK(std::abs(lm16.model.term(1).m[0] - std::conj(Complex(1, 0) - p) / (2.0 * eps)) < 1e-12);
    CHECK(lm16.error_sup > 0.0);

    SectionSpec s32 = build_section(net, {Complex(1, 0), Complex(1, 0), Complex(1, 0)}, 32.0);
    LocalModel lm32 = local_model(s32, p, false);
    CHECK(lm32.error_sup / lm16.error_sup < 0.5);

    // model terms agree with the recentered full sum exactly on the support
    for (std::size_t i = 0; i < lm16.support.size(); ++i) {
        const ExpTerm& mt = lm16.model.term(static_cast<int>(i));
        bool found = false;
        for (const auto& ft : lm16.full.terms())
            if (std::abs(ft.m[0] - mt.m[0]) < 1e-15 && std::abs(ft.alpha - mt.alpha) < 1e-15)
                found = true;
        CHECK(found);
    }
}

TEST_CASE("local model on a single-point net has no tail") {
    Net net = make_net({{0.5, 0.5}}, 0.75, {0, 0, 1, 1}, false, 0.2);
    SectionSpec spec = build_section(net, {Complex(1, 0)}, 16.0);
    LocalModel lm = local_model(spec, Complex(0.6, 0.5), false);
    CHECK(lm.error_sup < 1e-12);
    CHECK(lm.model.term_count() == 1);
}

TEST_CASE("detect_clusters: two-term sections are clean; C3 = 0 finds nothing") {
    Net net = make_net({{0, 0}, {1, 0}}, 0.52, {0, -0.1, 1, 0.1}, false, 0.45);
    SectionSpec spec = build_section(net, {Complex(1, 0), Complex(-1, 0)}, 12.0);
    ClusterSet cs = detect_clusters(spec, 0.05, 0.5);
    CHECK(cs.clusters.empty());
    ClusterSet zero = detect_clusters(spec, 0.0, 0.5);
    CHECK(zero.clusters.empty());
}

TEST_CASE("degenerate instance: cluster appears near the engineered critical zero") {
    auto inst = fixtures::degenerate_instance();
    SectionSpec spec = build_section(inst.net, inst.amps, inst.k);

    // the engineered double zero really is a near-critical zero of the sum
    CHECK(section_c1(spec, inst.critical_zero) < 0.05);

    ClusterSet cs = detect_clusters(spec, inst.C3, inst.R1);
    REQUIRE(!cs.clusters.empty());
    bool near = false;
    for (const auto& cl : cs.clusters)
        if (std::abs(cl.center - inst.critical_zero) < 0.1) near = true;
    CHECK(near);
    CHECK(!cs.merged_flag);
}

TEST_CASE("surgery: empty cluster set is the identity") {
    Net net = make_net({{0, 0}, {1, 0}}, 0.52, {0, -0.1, 1, 0.1}, false, 0.45);
    SectionSpec spec = build_section(net, {Complex(1, 0), Complex(-1, 0)}, 12.0);
    ClusterSet cs = detect_clusters(spec, 0.0, 0.5);
    Surgery s = perturb_section(spec, cs, 5);
    CHECK(s.ok);
    Rng rng(137);
    for (int i = 0; i < 50; ++i) {
        Complex z(rand_range(rng, 0, 1), rand_range(rng, -0.1, 0.1));
        SectionField raw = s.field.eval(z, SectionMode::Raw);
        SectionField hat = s.field.eval(z, SectionMode::Hat);
        CHECK(raw.value == hat.value);  // bitwise
        CHECK(raw.dh == hat.dh);
    }
}

TEST_CASE("surgery on the degenerate instance restores the C1 floor") {
    auto inst = fixtures::degenerate_instance();
    SectionSpec spec = build_section(inst.net, inst.amps, inst.k);
    ClusterSet cs = detect_clusters(spec, inst.C3, inst.R1);
    REQUIRE(!cs.clusters.empty());
    Surgery s = perturb_section(spec, cs, 7);
    CHECK(s.ok);
    CHECK(s.best_margin >= cs.C4);

    // s^ == s exactly outside the 3R1 balls
    double epsk = spec.epsk();
    Rng rng(139);
    int outside_checked = 0;
    while (outside_checked < 40) {
        Complex z(rand_range(rng, 0, 1), rand_range(rng, 0, 1));
        double dmin = 1e300;
        for (const auto& cl : cs.clusters)
            for (Complex m : cl.members) dmin = std::min(dmin, std::abs(z - m));
        if (dmin * epsk <= 3.0 * cs.R1) continue;
        outside_checked++;
        SectionField raw = s.field.eval(z, SectionMode::Raw);
        SectionField hat = s.field.eval(z, SectionMode::Hat);
        CHECK(raw.value == hat.value);
        CHECK(raw.dh == hat.dh);
        CHECK(raw.da == hat.da);
    }

    // inside 2R1, the tilde field is the exact local model in the sigma frame
    Complex center = cs.clusters[0].center;
    LocalModel lm = local_model(spec, center, false);
    double hat_min = 1e300;
    for (int i = -8; i <= 8; ++i) {
        for (int j = -8; j <= 8; ++j) {
            Complex z = center + Complex(i, j) * (0.8 * cs.R1 / (8.0 * epsk));
            Complex zeta = epsk * (z - center);
            SectionField tf = s.field.eval(z, SectionMode::Tilde);
            Complex model_val = evaluate_jet(lm.model, cvec1(zeta), 0).value;
            // undo the frame: value * e^{b(z)} == e^{b_loc} mu°(zeta) F(z)
            Complex frame = std::exp(Complex(lm.b_loc - spec.k * std::norm(center) / 4.0, 0.0) +
                                     spec.k * std::conj(center) / 2.0 * z - tf.b);
            Complex expected = model_val * frame;
            CHECK(std::abs(tf.value - expected) <= 1e-9 * (1.0 + std::abs(expected)));
            hat_min = std::min(hat_min, s.field.eval(z, SectionMode::Hat).c1_rescaled(epsk));
        }
    }
    CHECK(hat_min >= cs.C4);
}

TEST_CASE("coloring examples") {
    Net net2 = make_net({{0, 0}, {1, 0}}, 0.52, {0, -0.1, 1, 0.1}, false, 0.45);
    SectionSpec spec2 = build_section(net2, {Complex(1, 0), Complex(1, 0)}, 12.0);
    auto [col2, pencil2] = color_and_pencil(spec2);
    CHECK(col2.n_groups == 2);
    CHECK(col2.group[0] != col2.group[1]);
    CHECK(pencil2.separated());
    CHECK(pencil2.section_form());

    Net net12 = generic_net({0, 0, 1, 1}, 0.28, 0.2, 0.05, false, 17);
    Rng rng(141);
    std::vector<Complex> amps;
    for (std::size_t i = 0; i < net12.points.size(); ++i) amps.push_back(rand_phase(rng));
    SectionSpec spec12 = build_section(net12, amps, 120.0);
    auto [col12, pencil12] = color_and_pencil(spec12);
    // greedy bound: N <= max Voronoi degree + 1
    Skeleton2D vor = voronoi_diagram(spec12.rep_points, net12.domain);
    std::vector<int> degree(net12.points.size(), 0);
    std::set<std::pair<int, int>> seen;
    for (const auto& e : vor.edges) {
        int bi = spec12.rep_base[static_cast<std::size_t>(e.cell_i)];
        int bj = spec12.rep_base[static_cast<std::size_t>(e.cell_j)];
        if (bi == bj || !seen.insert({std::min(bi, bj), std::max(bi, bj)}).second) continue;
        degree[static_cast<std::size_t>(bi)]++;
        degree[static_cast<std::size_t>(bj)]++;
    }
    int maxdeg = *std::max_element(degree.begin(), degree.end());
    CHECK(col12.n_groups <= maxdeg + 1);
    // adjacent points never share a group
    for (const auto& [a, b] : seen)
        CHECK(col12.group[static_cast<std::size_t>(a)] != col12.group[static_cast<std::size_t>(b)]);
    CHECK(pencil12.separated());
    CHECK(pencil12.separation() > 0.0);
}

TEST_CASE("section pencil is consumable by the pencil module") {
    Net net = make_net({{0, 0}, {1, 0}}, 0.52, {0, -0.1, 1, 0.1}, false, 0.45);
    SectionSpec spec = build_section(net, {Complex(1, 0), Complex(1, 0)}, 12.0);
    auto [col, pencil] = color_and_pencil(spec);
    // zeta_g = e^{2 pi i (g+1)/N}: t at a group root removes that group
    TreeCoord at_zeta = tree_coordinate(pencil, TParam::at(std::polar(1.0, 2.0 * M_PI / 2.0)));
    CHECK(!at_zeta.root);
    CHECK(at_zeta.tau <= kTauNegInf);
    ExpSum limit = tau_skeleton_sum(pencil, at_zeta);
    CHECK(limit.term_count() == 1);
    // t = 0 and t = inf sit at the tree root
    CHECK(tree_coordinate(pencil, TParam::at({0, 0})).root);
    CHECK(tree_coordinate(pencil, TParam::infinity()).root);
}

TEST_CASE("amplitude validation") {
    Net net = make_net({{0, 0}, {1, 0}}, 0.52, {0, -0.1, 1, 0.1}, false, 0.45);
    CHECK_THROWS_AS(build_section(net, {Complex(2, 0), Complex(1, 0)}, 8.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_section(net, {Complex(1, 0)}, 8.0), std::invalid_argument);
}
