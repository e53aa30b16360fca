#pragma once

#include <string>
#include <vector>

#include "expskel/skeleton.hpp"
#include "expskel/solve.hpp"

namespace expskel {

struct SvgStyle {
    int width_px = 640;
    std::string cell_fill = "#eef3fa";
    std::string edge_stroke = "#1f3552";
    std::string vertex_fill = "#c23b22";
    std::string root_stroke = "#2a7f3f";
};

// Deterministic SVG: cells as light polygons, skeleton edges as solid lines,
// vertices as dots, roots as crosses, net points as rings.  The document
// states its affine world->pixel transform in a comment.
std::string render_svg(const Skeleton2D& skel, const std::vector<CVec>& roots,
                       const std::vector<Complex>& net_points, const SvgStyle& style = {});

}  // namespace expskel
