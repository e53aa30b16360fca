#pragma once

#include <map>
#include <optional>
#include <vector>

#include "expskel/expsum.hpp"
#include "expskel/skeleton.hpp"

namespace expskel {

/*
 * Quantitative genericity of exponent sets.  A k-simplex Delta in C^n is
 * measured by its diameter-normalized face volumes:
 *
 *   delta_R (Delta) = min over l'-faces of [Vol(Delta')]^{1/l'}
 *   delta_C (Delta) = min over l'-faces of [Vol_C(Delta')]^{1/(2l')}
 *
 * where Vol_C doubles the simplex with J-images of its edge vectors; it
 * vanishes exactly when the simplex fails to be totally real.  delta_C_m
 * additionally ranges over simplices spanned by a face and an external point
 * m, which quantifies how far the shifted exponents are from a C-linear
 * relation.  The set quantity delta(m_[l]) minimizes delta_R over subsets of
 * at most n+2 points and delta_C over subsets of at most n+1 points; it is
 * nonzero iff the set is strongly basic.
 */

inline constexpr double kTolRank = 1e-10;

struct Simplex {
    std::vector<CVec> vertices;
    int k() const { return static_cast<int>(vertices.size()) - 1; }
    int dim() const { return vertices.empty() ? 0 : static_cast<int>(vertices.front().size()); }
    double diameter() const;
};

enum class VolMode { Real, Complexified };

// k-volume via the Gram determinant of edge vectors in R^{2n}; complexified
// mode builds the doubled 2k-simplex {0, v_1, Jv_1, ..., v_k, Jv_k} and
// requires k <= n.
double simplex_volume(const Simplex& s, VolMode mode);

// Diameter-normalized minimal face quality.  extra, when given, adds the
// simplices spanned by an (l'-1)-face and the point (complexified mode only,
// l' <= n); faces where extra coincides with a vertex are skipped.
double simplex_quality(const Simplex& s, VolMode mode, const CVec* extra = nullptr,
                       double tol_rank = kTolRank);

struct GenericityReport {
    double delta_r = 0.0;
    double delta_c = 0.0;
    double delta_c_origin = 0.0;  // delta_C_0 margin over the same subsets
    double delta_set = 0.0;       // min(delta_r, delta_c)
    bool strongly_basic = false;
    Simplex witness;                      // attains delta_set
    std::map<int, double> margins;        // vertex count -> min quality seen
};

// Enumerates subsets with <= n+2 vertices (real quality) and <= n+1 vertices
// (complexified quality).  `cutoff`, when set, restricts enumeration to
// subsets of pairwise distance <= cutoff.  Throws when the unrestricted
// subset count exceeds 1e7.
GenericityReport exponent_set_quality(const std::vector<CVec>& points, int n,
                                      std::optional<double> cutoff = std::nullopt);

struct SimplexCatalog {
    std::vector<Simplex> simplices;
    std::vector<std::vector<int>> active_sets;  // originating term indices
};

struct ClassifyResult {
    bool strongly = false;
    std::optional<bool> basic;
    std::optional<bool> strictly;
    SimplexCatalog catalog;
    bool window_warning = false;  // no stratum inside the window
    GenericityReport set_report;
};

// n = 1: exact catalog from the planar skeleton strata inside the window;
// n >= 2: basic/strictly only certified through the strongly basic
// sufficient condition.
ClassifyResult classify_sum(const ExpSum& sum, const Box& window);

struct ShiftResult {
    CVec m;
    bool ok = false;
    double best_margin = 0.0;  // best min-quality seen over the tries
    int tries = 0;
};

// Rejection-samples m in the radius-c2 ball about the anchor until
// delta_C_m(Delta) >= c3 for every catalog simplex.  Empty catalogs accept
// the anchor unchanged.
ShiftResult find_shift(const SimplexCatalog& catalog, const CVec& anchor, double c2, double c3,
                       uint64_t seed, int max_tries);

ShiftResult find_shift(const ExpSum& sum, const Box& window, const CVec& anchor, double c2,
                       double c3, uint64_t seed, int max_tries);

}  // namespace expskel
