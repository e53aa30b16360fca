#pragma once

#include <optional>
#include <vector>

#include "expskel/types.hpp"

namespace expskel {

/*
 * Exponential sums mu(z) = sum_i e^{alpha_i + m_i.z} with complex exponent
 * vectors m_i in C^n and log-coefficients alpha_i.  The dominance data
 *
 *   b(z)   = max_i Re(alpha_i + m_i.z)
 *   I_z    = argmax set (ties up to tol_tie)
 *   I_z,c  = indices within c of the max
 *
 * drives everything downstream: skeleton membership, normalized norms
 * |.|_p = e^{-b(p)}|.|, and overflow-free evaluation at large exponents.
 */

struct ExpTerm {
    Complex alpha;
    CVec m;
};

class ExpSum {
  public:
    // Merges duplicate exponents by adding coefficients (stable log-sum-exp);
    // terms whose merged coefficient magnitude drops below 1e-300 are dropped
    // and counted in dropped_terms().
    ExpSum(int dim, std::vector<ExpTerm> terms);

    int dim() const { return dim_; }
    int term_count() const { return static_cast<int>(terms_.size()); }
    const std::vector<ExpTerm>& terms() const { return terms_; }
    const ExpTerm& term(int i) const { return terms_[static_cast<std::size_t>(i)]; }
    int dropped_terms() const { return dropped_; }

    // Largest exponent norm; Lipschitz constant of b along z.
    double max_exponent_norm() const { return max_m_; }

  private:
    int dim_;
    std::vector<ExpTerm> terms_;
    int dropped_ = 0;
    double max_m_ = 0.0;
};

struct Dominance {
    double b = 0.0;
    std::vector<int> argmax;    // I_z
    std::vector<int> near;      // I_{z,c}
    std::vector<double> gap;    // per term: b - Re(alpha_i + m_i.z)
    std::vector<int> order;     // term indices sorted by increasing gap

    // Gap of the second-closest term (infinity for single-term sums):
    // z is within U_c(Gamma) iff this is < c.
    double second_gap() const;
};

inline constexpr double kTolTie = 1e-9;

double b_of(const ExpSum& sum, const CVec& z);

Dominance dominance(const ExpSum& sum, const CVec& z, double c, double tol_tie = kTolTie);

struct Jet {
    Complex value{0.0, 0.0};
    CVec gradient;   // size n when order >= 1
    CMat hessian;    // n x n when order == 2
    int order = 0;
};

// Plain jet: value = sum e^{alpha_i + m_i.z}. Terms more than 700 below the
// dominant real part are dropped (pure underflow guard). Throws
// std::overflow_error when b(z) itself exceeds the double exponent range;
// use evaluate_jet_shifted for k-scaled sums.
Jet evaluate_jet(const ExpSum& sum, const CVec& z, int order);

// e^{-b_ref} * jet, computed with the exponent shift so nothing overflows for
// |b_ref|, |b(z)| up to ~1e6 as long as b(z) - b_ref stays within range.
Jet evaluate_jet_shifted(const ExpSum& sum, const CVec& z, int order, double b_ref);

// e^{-b(base)} (|mu(z)| + |dmu(z)|), the C^1 datum in the normalized norm.
double normalized_c1(const ExpSum& sum, const CVec& z, const CVec& base);

// Recenter at q (alpha_i += m_i.q - b(q); zero sets correspond under
// z -> z - q) and/or shift exponents by m_* (m_i -= m_*).  Recenter is
// applied first.  After recentering, b(0) == 0 exactly.
ExpSum transform(const ExpSum& sum, const std::optional<CVec>& shift,
                 const std::optional<CVec>& recenter);

// Restriction of the sum to terms that can matter on the closed disk
// |z - center| <= radius: keeps term i when
//   Re(alpha_i + m_i.center) >= b(center) - log_drop - radius*(|m_i| + max_j |m_j|).
// The bound uses |Re(m.(z-center))| <= |m| r, so dropped terms stay below
// e^{-log_drop} relative to the dominant one on the whole disk.
ExpSum pruned_for_disk(const ExpSum& sum, const CVec& center, double radius,
                       double log_drop = 45.0);

}  // namespace expskel
