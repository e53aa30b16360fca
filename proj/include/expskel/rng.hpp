#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "expskel/types.hpp"

namespace expskel {

// All randomized routines take explicit 64-bit seeds and draw through these
// helpers, so runs are bit-reproducible independent of the standard library's
// distribution implementations.
using Rng = std::mt19937_64;

inline double rand_u01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double rand_range(Rng& rng, double a, double b) { return a + (b - a) * rand_u01(rng); }

inline Complex rand_phase(Rng& rng) {
    double th = rand_range(rng, 0.0, 2.0 * M_PI);
    return {std::cos(th), std::sin(th)};
}

// Uniform in the closed disk of the given radius about the center.
inline Complex rand_disk(Rng& rng, Complex center, double radius) {
    double r = radius * std::sqrt(rand_u01(rng));
    return center + r * rand_phase(rng);
}

inline Vec2 rand_in_box(Rng& rng, const Box& b) {
    return {rand_range(rng, b.x0, b.x1), rand_range(rng, b.y0, b.y1)};
}

}  // namespace expskel
