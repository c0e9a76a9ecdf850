#pragma once

#include <vector>

#include "vlp/error.hpp"

namespace vlp {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

struct Circle {
    Vec2 center;
    double radius = 0.0;

    bool contains(const Vec2& p, double slack = 1e-9) const;
};

// Algebraic least-squares circle fit (Kasa). Exact on noiseless circles and
// on any 3 non-collinear points. Throws insufficient_samples (n < 3) or
// degenerate_fit (collinear input).
Circle fit_circle_kasa(const std::vector<Vec2>& points);

// Unique minimum-radius circle containing all points (Welzl, expected linear
// time). Throws empty_input.
Circle smallest_enclosing_circle(const std::vector<Vec2>& points);

}  // namespace vlp
