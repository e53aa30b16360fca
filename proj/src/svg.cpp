#include "expskel/svg.hpp"

#include <cmath>
#include <cstdio>

namespace expskel {

namespace {

std::string num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

}  // namespace

std::string render_svg(const Skeleton2D& skel, const std::vector<CVec>& roots,
                       const std::vector<Complex>& net_points, const SvgStyle& style) {
    const Box& w = skel.window;
    double sw = w.width() > 0 ? w.width() : 1.0;
    double scale = style.width_px / sw;
    int height_px = static_cast<int>(std::lround(scale * (w.height() > 0 ? w.height() : 1.0)));
    auto X = [&](double x) { return (x - w.x0) * scale; };
    auto Y = [&](double y) { return (w.y1 - y) * scale; };  // flip: SVG y grows downward

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(style.width_px) +
           "\" height=\"" + std::to_string(height_px) + "\">\n";
    out += "<!-- world-to-pixel: px = (x - " + num(w.x0) + ") * " + num(scale) + ", py = (" +
           num(w.y1) + " - y) * " + num(scale) + " -->\n";
    for (const auto& c : skel.cells) {
        out += "<polygon fill=\"" + style.cell_fill + "\" stroke=\"#cccccc\" stroke-width=\"0.5\" points=\"";
        for (std::size_t i = 0; i < c.polygon.size(); ++i) {
            if (i) out += " ";
            out += num(X(c.polygon[i].x)) + "," + num(Y(c.polygon[i].y));
        }
        out += "\"/>\n";
    }
    for (const auto& e : skel.edges) {
        out += "<line stroke=\"" + style.edge_stroke + "\" stroke-width=\"1.5\" x1=\"" +
               num(X(e.a.x)) + "\" y1=\"" + num(Y(e.a.y)) + "\" x2=\"" + num(X(e.b.x)) +
               "\" y2=\"" + num(Y(e.b.y)) + "\"/>\n";
    }
    for (const auto& v : skel.vertices) {
        out += "<circle fill=\"" + style.vertex_fill + "\" cx=\"" + num(X(v.p.x)) + "\" cy=\"" +
               num(Y(v.p.y)) + "\" r=\"3\"/>\n";
    }
    for (Complex p : net_points) {
        out += "<circle fill=\"none\" stroke=\"#555555\" cx=\"" + num(X(p.real())) + "\" cy=\"" +
               num(Y(p.imag())) + "\" r=\"4\"/>\n";
    }
    for (const auto& r : roots) {
        double x = X(r[0].real()), y = Y(r[0].imag());
        out += "<path stroke=\"" + style.root_stroke + "\" stroke-width=\"1.5\" d=\"M" +
               num(x - 3) + " " + num(y - 3) + " L" + num(x + 3) + " " + num(y + 3) + " M" +
               num(x - 3) + " " + num(y + 3) + " L" + num(x + 3) + " " + num(y - 3) + "\"/>\n";
    }
    out += "</svg>\n";
    return out;
}

}  // namespace expskel
