#include "vlp/circle.hpp"

#include <algorithm>
#include <cmath>

#include "vlp/rng.hpp"

namespace vlp {

bool Circle::contains(const Vec2& p, double slack) const {
    return std::hypot(p.x - center.x, p.y - center.y) <= radius + slack;
}

Circle fit_circle_kasa(const std::vector<Vec2>& points) {
    const size_t n = points.size();
    require(n >= 3, errc::insufficient_samples, "circle fit needs at least 3 points");

    // Shift to the centroid first; keeps the normal equations well scaled.
    double mx = 0.0, my = 0.0;
    for (const auto& p : points) {
        mx += p.x;
        my += p.y;
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);

    // Minimize sum (x^2 + y^2 + D x + E y + F)^2 over D, E, F.
    double sxx = 0, sxy = 0, syy = 0, sx = 0, sy = 0;
    double sxz = 0, syz = 0, sz = 0;
    for (const auto& p : points) {
        const double x = p.x - mx;
        const double y = p.y - my;
        const double z = x * x + y * y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
        sx += x;
        sy += y;
        sxz += x * z;
        syz += y * z;
        sz += z;
    }
    const double nn = static_cast<double>(n);

    // Normal equations for [D E F]:
    //   [sxx sxy sx] [D]   [-sxz]
    //   [sxy syy sy] [E] = [-syz]
    //   [sx  sy  nn] [F]   [-sz ]
    double a[3][4] = {
        {sxx, sxy, sx, -sxz},
        {sxy, syy, sy, -syz},
        {sx, sy, nn, -sz},
    };
    double scale = 0.0;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) scale = std::max(scale, std::abs(a[r][c]));
    for (int col = 0; col < 3; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        if (std::abs(a[pivot][col]) <= 1e-12 * std::max(scale, 1.0))
            fail(errc::degenerate_fit, "circle fit points are collinear");
        if (pivot != col) std::swap(a[pivot], a[col]);
        for (int r = 0; r < 3; ++r) {
            if (r == col) continue;
            const double m = a[r][col] / a[col][col];
            for (int c = col; c < 4; ++c) a[r][c] -= m * a[col][c];
        }
    }
    const double d = a[0][3] / a[0][0];
    const double e = a[1][3] / a[1][1];
    const double f = a[2][3] / a[2][2];

    Circle out;
    out.center = {mx - d / 2.0, my - e / 2.0};
    const double r2 = (d * d + e * e) / 4.0 - f;
    out.radius = r2 > 0 ? std::sqrt(r2) : 0.0;
    return out;
}

namespace {

Circle circle_from_two(const Vec2& a, const Vec2& b) {
    Circle c;
    c.center = {(a.x + b.x) / 2.0, (a.y + b.y) / 2.0};
    c.radius = std::hypot(a.x - b.x, a.y - b.y) / 2.0;
    return c;
}

// Circumcircle of three points; radius < 0 marks a degenerate (collinear) triple.
Circle circle_from_three(const Vec2& a, const Vec2& b, const Vec2& c) {
    const double bx = b.x - a.x, by = b.y - a.y;
    const double cx = c.x - a.x, cy = c.y - a.y;
    const double d = 2.0 * (bx * cy - by * cx);
    if (d == 0.0) {
        Circle bad;
        bad.radius = -1.0;
        return bad;
    }
    const double b2 = bx * bx + by * by;
    const double c2 = cx * cx + cy * cy;
    const double ux = (cy * b2 - by * c2) / d;
    const double uy = (bx * c2 - cx * b2) / d;
    Circle out;
    out.center = {a.x + ux, a.y + uy};
    out.radius = std::hypot(ux, uy);
    return out;
}

constexpr double kWelzlSlack = 1e-9;

bool in_circle(const Circle& c, const Vec2& p) {
    return c.radius >= 0 && c.contains(p, kWelzlSlack * std::max(1.0, c.radius));
}

Circle mec_with_two(const std::vector<Vec2>& pts, size_t limit, const Vec2& p, const Vec2& q) {
    Circle c = circle_from_two(p, q);
    for (size_t i = 0; i < limit; ++i) {
        if (!in_circle(c, pts[i])) c = circle_from_three(p, q, pts[i]);
    }
    return c;
}

Circle mec_with_one(const std::vector<Vec2>& pts, size_t limit, const Vec2& p) {
    Circle c{{p.x, p.y}, 0.0};
    for (size_t i = 0; i < limit; ++i) {
        if (in_circle(c, pts[i])) continue;
        if (c.radius == 0.0)
            c = circle_from_two(p, pts[i]);
        else
            c = mec_with_two(pts, i, p, pts[i]);
    }
    return c;
}

}  // namespace

Circle smallest_enclosing_circle(const std::vector<Vec2>& points) {
    require(!points.empty(), errc::empty_input, "no points for enclosing circle");
    std::vector<Vec2> pts = points;
    // Random order gives Welzl its expected linear time; the minimum circle is
    // unique, so the fixed shuffle seed does not affect the result.
    Rng rng(0x5eed5eedULL);
    for (size_t i = pts.size() - 1; i > 0; --i) {
        const size_t j = rng.next_u64() % (i + 1);
        std::swap(pts[i], pts[j]);
    }

    Circle c{{pts[0].x, pts[0].y}, 0.0};
    for (size_t i = 1; i < pts.size(); ++i) {
        if (in_circle(c, pts[i])) continue;
        c = mec_with_one(pts, i, pts[i]);
    }
    return c;
}

}  // namespace vlp
