#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace expskel {

using Complex = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

// Bilinear pairing a.b = sum a_i b_i (no conjugation; exponents pair with
// coordinates this way throughout).
inline Complex cdot(const CVec& a, const CVec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("cdot: dimension mismatch");
    Complex s = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline CVec cvec1(Complex z) {
    CVec v(1);
    v[0] = z;
    return v;
}

inline CVec cvec2(Complex z0, Complex z1) {
    CVec v(2);
    v[0] = z0;
    v[1] = z1;
    return v;
}

inline bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

inline bool finite(const CVec& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (!finite(v[i])) return false;
    return true;
}

struct Vec2 {
    double x = 0.0, y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

inline Vec2 to_vec2(Complex z) { return {z.real(), z.imag()}; }
inline Complex to_complex(Vec2 p) { return {p.x, p.y}; }

// Axis-aligned window [x0,x1] x [y0,y1].
struct Box {
    double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;

    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    double area() const { return width() * height(); }
    double diam() const { return std::hypot(width(), height()); }
    bool contains(Vec2 p, double pad = 0.0) const {
        return p.x >= x0 - pad && p.x <= x1 + pad && p.y >= y0 - pad && p.y <= y1 + pad;
    }
    bool contains(Complex z, double pad = 0.0) const { return contains(to_vec2(z), pad); }
    double boundary_distance(Vec2 p) const {
        double d = p.x - x0;
        d = std::min(d, x1 - p.x);
        d = std::min(d, p.y - y0);
        d = std::min(d, y1 - p.y);
        return d;  // negative outside
    }
};

}  // namespace expskel
