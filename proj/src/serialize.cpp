#include "expskel/serialize.hpp"

#include <charconv>

namespace expskel {

std::string fmt_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string dump_canonical(const Json& j) { return j.dump(2) + "\n"; }

Json complex_json(Complex z) { return Json::array({z.real(), z.imag()}); }

Complex complex_from(const Json& j) {
    if (!j.is_array() || j.size() != 2) throw std::invalid_argument("complex: want [re, im]");
    return {j[0].get<double>(), j[1].get<double>()};
}

Json cvec_json(const CVec& v) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_json(v[i]));
    return out;
}

CVec cvec_from(const Json& j) {
    CVec v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = complex_from(j[i]);
    return v;
}

Json box_json(const Box& b) { return Json::array({b.x0, b.y0, b.x1, b.y1}); }

Box box_from(const Json& j) {
    if (!j.is_array() || j.size() != 4) throw std::invalid_argument("box: want [x0,y0,x1,y1]");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

Json expsum_json(const ExpSum& s) {
    Json terms = Json::array();
    for (const auto& t : s.terms())
        terms.push_back({{"alpha", complex_json(t.alpha)}, {"m", cvec_json(t.m)}});
    return {{"dim", s.dim()}, {"terms", terms}};
}

ExpSum expsum_from(const Json& j) {
    int dim = j.at("dim").get<int>();
    std::vector<ExpTerm> terms;
    for (const auto& t : j.at("terms"))
        terms.push_back({complex_from(t.at("alpha")), cvec_from(t.at("m"))});
    return ExpSum(dim, std::move(terms));
}

Json report_json(const GenericityReport& r) {
    Json margins = Json::object();
    for (const auto& [k, v] : r.margins) margins[std::to_string(k)] = v;
    Json witness = Json::array();
    for (const auto& v : r.witness.vertices) witness.push_back(cvec_json(v));
    return {{"delta_r", r.delta_r},
            {"delta_c", r.delta_c},
            {"delta_c_origin", r.delta_c_origin},
            {"delta_set", r.delta_set},
            {"strongly_basic", r.strongly_basic},
            {"witness", witness},
            {"margins", margins}};
}

Json skeleton_json(const Skeleton2D& s) {
    Json cells = Json::array();
    for (const auto& c : s.cells) {
        Json poly = Json::array();
        for (const auto& p : c.polygon) poly.push_back(Json::array({p.x, p.y}));
        cells.push_back({{"term", c.term}, {"polygon", poly}, {"clipped", c.touches_window}});
    }
    Json edges = Json::array();
    for (const auto& e : s.edges)
        edges.push_back({{"pair", Json::array({e.cell_i, e.cell_j})},
                         {"a", Json::array({e.a.x, e.a.y})},
                         {"b", Json::array({e.b.x, e.b.y})},
                         {"active", e.active},
                         {"non_generic", e.non_generic}});
    Json verts = Json::array();
    for (const auto& v : s.vertices)
        verts.push_back({{"point", Json::array({v.p.x, v.p.y})},
                         {"active", v.active},
                         {"edge_degree", v.edge_degree}});
    return {{"window", box_json(s.window)}, {"cells", cells}, {"edges", edges},
            {"vertices", verts}};
}

Json rootset_json(const RootSet& r) {
    const char* mode = r.mode == RootMode::Zeros
                           ? "zeros"
                           : (r.mode == RootMode::Critical ? "critical" : "critical_zeros");
    Json pts = Json::array();
    for (const auto& p : r.points)
        pts.push_back({{"z", cvec_json(p.z)},
                       {"multiplicity", p.multiplicity},
                       {"residual", p.residual},
                       {"boundary", p.boundary}});
    return {{"mode", mode}, {"points", pts}};
}

Json boundreport_json(const BoundReport& r) {
    Json v = Json::array();
    for (const auto& z : r.violations) v.push_back(cvec_json(z));
    return {{"mode", r.mode == BoundMode::ZeroContainment ? "zero_containment" : "c1_lower"},
            {"c_used", r.c_used},
            {"violations", v},
            {"min_margin", r.min_margin},
            {"grid", Json::array({r.grid_nx, r.grid_ny})},
            {"window", box_json(r.window)}};
}

Json pencil_json(const PencilSpec& p) {
    Json exps = Json::array();
    for (const auto& m : p.exponents()) exps.push_back(cvec_json(m));
    Json a0 = Json::array(), ai = Json::array();
    for (Complex a : p.alpha0()) a0.push_back(complex_json(a));
    for (Complex a : p.alphainf()) ai.push_back(complex_json(a));
    Json j = {{"exponents", exps}, {"alpha0", a0}, {"alphainf", ai},
              {"r0", p.r0()},      {"separation", p.separation()}};
    if (p.section_form()) {
        j["groups"] = p.group();
        j["n_groups"] = p.n_groups();
    }
    return j;
}

PencilSpec pencil_from(const Json& j) {
    std::vector<CVec> exps;
    for (const auto& m : j.at("exponents")) exps.push_back(cvec_from(m));
    std::vector<Complex> a0, ai;
    for (const auto& a : j.at("alpha0")) a0.push_back(complex_from(a));
    for (const auto& a : j.at("alphainf")) ai.push_back(complex_from(a));
    if (j.contains("groups")) {
        std::vector<int> groups = j.at("groups").get<std::vector<int>>();
        return PencilSpec(std::move(exps), std::move(a0), std::move(ai), std::move(groups),
                          j.at("n_groups").get<int>());
    }
    std::optional<double> r0;
    if (j.contains("r0")) r0 = j.at("r0").get<double>();
    return PencilSpec(std::move(exps), std::move(a0), std::move(ai), r0);
}

Json singular_json(const SingularSet& s) {
    Json pts = Json::array();
    for (const auto& q : s.points) {
        Json t = q.t.at_infinity ? Json("inf") : complex_json(q.t.value);
        pts.push_back({{"z", cvec_json(q.z)}, {"t", t}, {"multiplicity", q.multiplicity}});
    }
    Json base = Json::array();
    for (const auto& b : s.base_points) base.push_back(cvec_json(b));
    return {{"points", pts}, {"base_points", base}};
}

Json pencil_verification_json(const PencilVerification& v) {
    return {{"fiber_ok", v.fiber_ok},
            {"max_fiber_gap", v.max_fiber_gap},
            {"max_fiber_gap_tree", v.max_fiber_gap_tree},
            {"fiber_tree_ok", v.fiber_tree_ok},
            {"fiber_violations", v.fiber_violations},
            {"zeros_checked", v.zeros_checked},
            {"base_refused", v.base_refused},
            {"base_ok", v.base_ok},
            {"max_vertex_dist", v.max_vertex_dist},
            {"singular_ok", v.singular_ok},
            {"max_singular_gap", v.max_singular_gap},
            {"max_singular_gap_tree", v.max_singular_gap_tree},
            {"singular_checked", v.singular_checked}};
}

Json net_json(const Net& n) {
    Json pts = Json::array();
    for (Complex p : n.points) pts.push_back(complex_json(p));
    return {{"epsilon", n.epsilon}, {"periodic", n.periodic}, {"domain", box_json(n.domain)},
            {"points", pts},        {"delta", n.delta}};
}

Net net_from(const Json& j) {
    std::vector<Complex> pts;
    for (const auto& p : j.at("points")) pts.push_back(complex_from(p));
    Net n = make_net(std::move(pts), j.at("epsilon").get<double>(), box_from(j.at("domain")),
                     j.at("periodic").get<bool>());
    return n;
}

Json section_json(const SectionSpec& s) {
    Json amps = Json::array();
    for (Complex a : s.amplitudes) amps.push_back(complex_json(a));
    return {{"net", net_json(s.net)},
            {"amplitudes", amps},
            {"k", s.k},
            {"r0_cutoff", s.r0_cutoff},
            {"k_warning", s.k_warning},
            {"terms", s.global_sum.term_count()}};
}

SectionSpec section_from(const Json& j) {
    Net net = net_from(j.at("net"));
    std::vector<Complex> amps;
    for (const auto& a : j.at("amplitudes")) amps.push_back(complex_from(a));
    return build_section(net, amps, j.at("k").get<double>());
}

Json clusters_json(const ClusterSet& c) {
    Json cl = Json::array();
    for (const auto& q : c.clusters) {
        Json mem = Json::array();
        for (Complex m : q.members) mem.push_back(complex_json(m));
        cl.push_back({{"center", complex_json(q.center)}, {"members", mem}});
    }
    return {{"clusters", cl},       {"C3", c.C3},   {"C4", c.C4},
            {"R1", c.R1},           {"scale", c.scale}, {"merged_flag", c.merged_flag}};
}

Json coloring_json(const Coloring& c) {
    return {{"group", c.group}, {"n_groups", c.n_groups}};
}

Json tables_json(const std::vector<PairingTable>& tables) {
    Json out = Json::array();
    for (const auto& t : tables) {
        Json rows = Json::array();
        for (const auto& r : t.rows)
            rows.push_back({{"k", r.k},
                            {"epsilon", r.epsilon},
                            {"zero_pairing", r.zero_pairing},
                            {"beta_pairing", r.beta_pairing},
                            {"gap_over_k", r.gap_over_k},
                            {"target", r.target},
                            {"note", r.note}});
        out.push_back({{"psi", t.psi_name}, {"rows", rows}});
    }
    return out;
}

std::string table_csv(const PairingTable& t) {
    std::string out = "k,epsilon,zero_pairing,beta_pairing,gap_over_k\n";
    for (const auto& r : t.rows) {
        out += fmt_double(r.k) + "," + fmt_double(r.epsilon) + "," + fmt_double(r.zero_pairing) +
               "," + fmt_double(r.beta_pairing) + "," + fmt_double(r.gap_over_k) + "\n";
    }
    return out;
}

}  // namespace expskel
