#include "expskel/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "expskel/rng.hpp"
#include "expskel/serialize.hpp"
#include "expskel/svg.hpp"

namespace expskel {

namespace {

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_output(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path);
    out << content;
}

Json parse_json(const std::string& text, const std::string& what) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        // byte offset -> line/column
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                line++;
                col = 1;
            } else {
                col++;
            }
        }
        throw InputError(what + ": JSON parse error at line " + std::to_string(line) +
                         ", column " + std::to_string(col) + ": " + e.what());
    }
}

Box parse_window(const std::string& s) {
    Box b;
    char c1, c2, c3;
    std::istringstream in(s);
    if (!(in >> b.x0 >> c1 >> b.y0 >> c2 >> b.x1 >> c3 >> b.y1) || c1 != ',' || c2 != ',' ||
        c3 != ',')
        throw InputError("window: want x0,y0,x1,y1");
    if (b.x1 <= b.x0 || b.y1 <= b.y0) throw InputError("window: empty box");
    return b;
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::istringstream in(s);
    std::string tok;
    while (std::getline(in, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

int cmd_certify(const std::string& input, const std::string& window, const std::string& out) {
    ExpSum sum = expsum_from(parse_json(read_file(input), input));
    Box w = window.empty() ? Box{-5.0, -5.0, 5.0, 5.0} : parse_window(window);
    ClassifyResult cls = classify_sum(sum, w);
    Json j = report_json(cls.set_report);
    j["strongly_basic"] = cls.strongly;
    if (cls.basic) j["basic"] = *cls.basic;
    if (cls.strictly) j["strictly"] = *cls.strictly;
    j["window_warning"] = cls.window_warning;
    j["catalog_size"] = cls.catalog.simplices.size();
    write_output(out, dump_canonical(j));
    return 0;
}

int cmd_skeleton(const std::string& input, const std::string& window, const std::string& svg,
                 const std::string& out) {
    ExpSum sum = expsum_from(parse_json(read_file(input), input));
    Box w = parse_window(window);
    Skeleton2D skel = build_skeleton_2d(sum, w);
    write_output(out, dump_canonical(skeleton_json(skel)));
    if (!svg.empty()) write_output(svg, render_svg(skel, {}, {}));
    return 0;
}

int cmd_roots(const std::string& input, const std::string& mode, const std::string& window,
              int grid_density, uint64_t seed, const std::string& out) {
    ExpSum sum = expsum_from(parse_json(read_file(input), input));
    Box w = parse_window(window);
    RootMode rm;
    if (mode == "zeros")
        rm = RootMode::Zeros;
    else if (mode == "critical")
        rm = RootMode::Critical;
    else if (mode == "critical_zeros")
        rm = RootMode::CriticalZeros;
    else
        throw InputError("mode: zeros | critical | critical_zeros");
    FindOpts opts;
    opts.grid_density = grid_density;
    opts.seed = seed;
    RootSet rs = find_roots(sum, w, rm, opts);
    write_output(out, dump_canonical(rootset_json(rs)));
    return 0;
}

int cmd_pencil(const std::string& input, const std::string& window, int t_samples, double c,
               const std::string& out) {
    PencilSpec p = pencil_from(parse_json(read_file(input), input));
    Box w = parse_window(window);
    double cc = c > 0.0 ? c : std::log(std::max(p.term_count() - 1, 1)) + 0.1;
    SingularSet sing = find_pencil_singular(p, w);
    PencilVerification ver = verify_pencil(p, w, standard_t_samples(t_samples), cc);
    Json j = {{"singular", singular_json(sing)},
              {"verification", pencil_verification_json(ver)},
              {"c", cc}};
    write_output(out, dump_canonical(j));
    return ver.passed(!ver.base_refused) ? 0 : 2;
}

int cmd_net(const std::string& domain, double epsilon, double c1, double c2_target,
            bool periodic, uint64_t seed, const std::string& out) {
    Box d = parse_window(domain);
    Net net = generic_net(d, epsilon, c1, c2_target, periodic, seed);
    write_output(out, dump_canonical(net_json(net)));
    return net.flagged ? 2 : 0;
}

int cmd_section(const std::string& net_path, double k, uint64_t seed, double C3, double R1,
                const std::string& svg, const std::string& out) {
    Net net = net_from(parse_json(read_file(net_path), net_path));
    Rng rng(seed);
    std::vector<Complex> amps;
    for (std::size_t i = 0; i < net.points.size(); ++i) amps.push_back(rand_phase(rng));
    SectionSpec spec = build_section(net, amps, k);
    Skeleton2D skel = section_skeleton(spec, net.domain);
    ClusterSet clusters = detect_clusters(spec, C3, R1);
    Surgery surgery = perturb_section(spec, clusters, seed + 1);

    FindOpts fo;
    fo.grid_density = std::max(32, static_cast<int>(std::ceil(std::sqrt(k) * 3.0)));
    RootSet roots = find_roots(spec.global_sum, net.domain, RootMode::Zeros, fo);
    double max_dist = 0.0;
    for (const auto& r : roots.points)
        max_dist = std::max(max_dist, skel.distance(to_vec2(r.z[0])));

    Json j = {{"section", section_json(spec)},
              {"clusters", clusters_json(clusters)},
              {"surgery",
               {{"ok", surgery.ok},
                {"best_margin", surgery.best_margin},
                {"eps_hat", [&] {
                     Json a = Json::array();
                     for (Complex e : surgery.eps_hat) a.push_back(complex_json(e));
                     return a;
                 }()}}},
              {"zeros", rootset_json(roots)},
              {"max_zero_skeleton_dist", max_dist},
              {"max_zero_skeleton_dist_keps", max_dist * spec.epsk()}};
    write_output(out, dump_canonical(j));
    if (!svg.empty()) {
        std::vector<CVec> zs;
        for (const auto& r : roots.points) zs.push_back(r.z);
        write_output(svg, render_svg(skel, zs, net.points));
    }
    return surgery.ok ? 0 : 2;
}

int cmd_current(const std::string& domain, const std::string& mode, double epsilon,
                const std::string& k_list_s, uint64_t seed, const std::string& out) {
    Box d = parse_window(domain);
    LimitStudyOpts opts;
    opts.seed = seed;
    opts.epsilon = epsilon;
    if (mode == "fixed")
        opts.schedule = false;
    else if (mode == "schedule")
        opts.schedule = true;
    else
        throw InputError("mode: fixed | schedule");
    std::vector<double> k_list = parse_list(k_list_s);
    auto cat = psi_catalog();
    auto tables = limit_study(d, k_list, cat, opts);
    std::string base = out.empty() ? std::string("pairing") : out;
    write_output(base + ".json", dump_canonical(tables_json(tables)));
    for (const auto& t : tables) write_output(base + "_" + t.psi_name + ".csv", table_csv(t));
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"exponential-sum skeletons, sections, and pencils"};
    app.require_subcommand(1);

    std::string input, window, domain, svg, out, mode = "zeros", k_list = "100,200,400";
    int grid_density = 48, t_samples = 64;
    uint64_t seed = 0;
    double c = 0.0, epsilon = 0.3, c1 = 0.2, c2_target = 0.05, k = 100.0, C3 = 0.05, R1 = 0.1;
    bool periodic = false;

    auto* certify = app.add_subcommand("certify", "genericity certificate for an exponential sum");
    certify->add_option("--input", input)->required();
    certify->add_option("--window", window);
    certify->add_option("--out", out);

    auto* skeleton = app.add_subcommand("skeleton", "planar skeleton of an exponential sum");
    skeleton->add_option("--input", input)->required();
    skeleton->add_option("--window", window)->required();
    skeleton->add_option("--svg", svg);
    skeleton->add_option("--out", out);

    auto* roots = app.add_subcommand("roots", "zeros / critical points in a window");
    roots->add_option("--input", input)->required();
    roots->add_option("--mode", mode);
    roots->add_option("--window", window)->required();
    roots->add_option("--grid-density", grid_density);
    roots->add_option("--seed", seed);
    roots->add_option("--out", out);

    auto* pencil = app.add_subcommand("pencil", "pencil singular set and containment checks");
    pencil->add_option("--input", input)->required();
    pencil->add_option("--window", window)->required();
    pencil->add_option("--t-samples", t_samples);
    pencil->add_option("--c", c);
    pencil->add_option("--out", out);

    auto* net = app.add_subcommand("net", "generic epsilon-net over a box");
    net->add_option("--domain", domain)->required();
    net->add_option("--epsilon", epsilon)->required();
    net->add_option("--c1", c1);
    net->add_option("--c2-target", c2_target);
    net->add_flag("--periodic", periodic);
    net->add_option("--seed", seed);
    net->add_option("--out", out);

    auto* section = app.add_subcommand("section", "peak-section sum over a net, with surgery");
    section->add_option("--net", input)->required();
    section->add_option("--k", k)->required();
    section->add_option("--seed", seed);
    section->add_option("--c3", C3);
    section->add_option("--r1", R1);
    section->add_option("--svg", svg);
    section->add_option("--out", out);

    auto* current = app.add_subcommand("current", "pairing tables for the current limits");
    current->add_option("--domain", domain)->required();
    current->add_option("--mode", mode);
    current->add_option("--epsilon", epsilon);
    current->add_option("--k-list", k_list);
    current->add_option("--seed", seed);
    current->add_option("--out", out);

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (certify->parsed()) return cmd_certify(input, window, out);
        if (skeleton->parsed()) return cmd_skeleton(input, window, svg, out);
        if (roots->parsed()) return cmd_roots(input, mode, window, grid_density, seed, out);
        if (pencil->parsed()) return cmd_pencil(input, window, t_samples, c, out);
        if (net->parsed()) return cmd_net(domain, epsilon, c1, c2_target, periodic, seed, out);
        if (section->parsed()) return cmd_section(input, k, seed, C3, R1, svg, out);
        if (current->parsed())
            return cmd_current(domain, mode == "zeros" ? "fixed" : mode, epsilon, k_list, seed,
                               out);
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

}  // namespace expskel
