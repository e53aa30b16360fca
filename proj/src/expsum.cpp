#include "expskel/expsum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace expskel {

namespace {

bool same_exponent(const CVec& a, const CVec& b) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (std::abs(a[i] - b[i]) > 1e-12) return false;
    }
    return true;
}

// log(e^a + e^b) for complex a, b, stable when real parts are large.  A
// merged coefficient below the double cancellation noise floor counts as
// exactly zero (e.g. e^{i pi} + 1 lands at ~1e-16, not 0).
Complex log_sum_exp(Complex a, Complex b) {
    if (b.real() > a.real()) std::swap(a, b);
    Complex w = 1.0 + std::exp(b - a);
    if (std::abs(w) < 1e-13) return {-std::numeric_limits<double>::infinity(), 0.0};
    return a + std::log(w);
}

}  // namespace

ExpSum::ExpSum(int dim, std::vector<ExpTerm> terms) : dim_(dim) {
    if (dim < 1) throw std::invalid_argument("ExpSum: dim must be >= 1");
    if (terms.empty()) throw std::invalid_argument("ExpSum: no terms");
    for (const auto& t : terms) {
        if (t.m.size() != dim) throw std::invalid_argument("ExpSum: exponent dimension mismatch");
        if (!finite(t.alpha) || !finite(t.m)) throw std::invalid_argument("ExpSum: non-finite term");
    }
    for (auto& t : terms) {
        bool merged = false;
        for (auto& kept : terms_) {
            if (same_exponent(kept.m, t.m)) {
                kept.alpha = log_sum_exp(kept.alpha, t.alpha);
                merged = true;
                break;
            }
        }
        if (!merged) terms_.push_back(std::move(t));
    }
    // Terms whose merged coefficient cancelled exactly carry alpha = -inf.
    auto it = std::remove_if(terms_.begin(), terms_.end(),
                             [](const ExpTerm& t) { return !std::isfinite(t.alpha.real()); });
    dropped_ = static_cast<int>(terms_.end() - it);
    terms_.erase(it, terms_.end());
    if (terms_.empty()) throw std::invalid_argument("ExpSum: all coefficients vanished");
    for (const auto& t : terms_) max_m_ = std::max(max_m_, t.m.norm());
}

double Dominance::second_gap() const {
    if (order.size() < 2) return std::numeric_limits<double>::infinity();
    return gap[static_cast<std::size_t>(order[1])];
}

double b_of(const ExpSum& sum, const CVec& z) {
    if (z.size() != sum.dim()) throw std::invalid_argument("b_of: dimension mismatch");
    double b = -std::numeric_limits<double>::infinity();
    for (const auto& t : sum.terms()) b = std::max(b, (t.alpha + cdot(t.m, z)).real());
    return b;
}

Dominance dominance(const ExpSum& sum, const CVec& z, double c, double tol_tie) {
    if (z.size() != sum.dim()) throw std::invalid_argument("dominance: dimension mismatch");
    if (c < 0.0) throw std::invalid_argument("dominance: c must be >= 0");
    int n = sum.term_count();
    Dominance d;
    std::vector<double> re(static_cast<std::size_t>(n));
    d.b = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        re[static_cast<std::size_t>(i)] = (sum.term(i).alpha + cdot(sum.term(i).m, z)).real();
        d.b = std::max(d.b, re[static_cast<std::size_t>(i)]);
    }
    d.gap.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double g = d.b - re[static_cast<std::size_t>(i)];
        d.gap[static_cast<std::size_t>(i)] = g;
        if (g <= tol_tie) d.argmax.push_back(i);
        if (g < c) d.near.push_back(i);
    }
    d.order.resize(static_cast<std::size_t>(n));
    std::iota(d.order.begin(), d.order.end(), 0);
    std::stable_sort(d.order.begin(), d.order.end(),
                     [&](int a, int b2) { return d.gap[static_cast<std::size_t>(a)] < d.gap[static_cast<std::size_t>(b2)]; });
    return d;
}

Jet evaluate_jet_shifted(const ExpSum& sum, const CVec& z, int order, double b_ref) {
    if (z.size() != sum.dim()) throw std::invalid_argument("evaluate_jet: dimension mismatch");
    if (order < 0 || order > 2) throw std::invalid_argument("evaluate_jet: order in {0,1,2}");
    int n = sum.dim();
    Jet jet;
    jet.order = order;
    if (order >= 1) jet.gradient = CVec::Zero(n);
    if (order == 2) jet.hessian = CMat::Zero(n, n);
    for (const auto& t : sum.terms()) {
        Complex e = t.alpha + cdot(t.m, z);
        double re = e.real() - b_ref;
        if (re < -700.0) continue;  // underflow guard
        Complex w = std::exp(e - b_ref);
        jet.value += w;
        if (order >= 1) jet.gradient += t.m * w;
        if (order == 2) jet.hessian += (t.m * t.m.transpose()) * w;
    }
    return jet;
}

Jet evaluate_jet(const ExpSum& sum, const CVec& z, int order) {
    double b = b_of(sum, z);
    if (b > 700.0)
        throw std::overflow_error("evaluate_jet: b(z) exceeds double range; use the shifted form");
    Jet jet = evaluate_jet_shifted(sum, z, order, b);
    double s = std::exp(b);
    jet.value *= s;
    if (order >= 1) jet.gradient *= s;
    if (order == 2) jet.hessian *= s;
    return jet;
}

double normalized_c1(const ExpSum& sum, const CVec& z, const CVec& base) {
    double bb = b_of(sum, base);
    double bz = b_of(sum, z);
    double shift = std::max(bb, bz);
    Jet jet = evaluate_jet_shifted(sum, z, 1, shift);
    double scale_log = shift - bb;
    double raw = std::abs(jet.value) + jet.gradient.norm();
    if (raw == 0.0) return 0.0;
    double lg = std::log(raw) + scale_log;
    if (lg > 700.0) return std::numeric_limits<double>::infinity();
    return std::exp(lg);
}

ExpSum transform(const ExpSum& sum, const std::optional<CVec>& shift,
                 const std::optional<CVec>& recenter) {
    if (!shift && !recenter)
        throw std::invalid_argument("transform: at least one of shift/recenter required");
    std::vector<ExpTerm> terms = sum.terms();
    if (recenter) {
        const CVec& q = *recenter;
        if (q.size() != sum.dim()) throw std::invalid_argument("transform: recenter dim mismatch");
        double bq = b_of(sum, q);
        // Grouped so the dominant term lands at exactly 0: b_of computes
        // Re(alpha + m.q) and we subtract its max from the same quantity.
        for (auto& t : terms) t.alpha = (t.alpha + cdot(t.m, q)) - bq;
    }
    if (shift) {
        const CVec& m = *shift;
        if (m.size() != sum.dim()) throw std::invalid_argument("transform: shift dim mismatch");
        for (auto& t : terms) t.m -= m;
    }
    return ExpSum(sum.dim(), std::move(terms));
}

ExpSum pruned_for_disk(const ExpSum& sum, const CVec& center, double radius, double log_drop) {
    double b = b_of(sum, center);
    double mm = sum.max_exponent_norm();
    std::vector<ExpTerm> kept;
    for (const auto& t : sum.terms()) {
        double re = (t.alpha + cdot(t.m, center)).real();
        if (re >= b - log_drop - radius * (t.m.norm() + mm)) kept.push_back(t);
    }
    if (kept.empty()) kept.push_back(sum.term(0));
    return ExpSum(sum.dim(), std::move(kept));
}

}  // namespace expskel
