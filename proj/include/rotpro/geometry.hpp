#pragma once

// Per-dimension complex-plane primitives: 2-D rotation and the orthogonal
// projection onto an axis rotated by theta_p. The projection matrix is
//
//   M = S(theta_p)^-1 * diag(a, b) * S(theta_p),  S = plane rotation,
//
// expanded in closed form (S is orthonormal, so S^-1 = S^T and no runtime
// inversion is needed):
//
//   m00 = a*c^2 + b*s^2,  m01 = m10 = (b - a)*s*c,  m11 = a*s^2 + b*c^2.
//
// With a,b in {0,1} M is idempotent; with a=1,b=1 it is the identity and the
// whole transform degenerates to a pure rotation.

#include <cmath>

namespace rotpro {

struct Point2 {
    double x{0.0};
    double y{0.0};
};

struct ProjectionSpec {
    double a{1.0};
    double b{1.0};
    double theta_p{0.0};
};

struct Mat2 {
    double m00{1.0}, m01{0.0};
    double m10{0.0}, m11{1.0};
};

inline Point2 apply(const Mat2& m, Point2 p) {
    return {m.m00 * p.x + m.m01 * p.y, m.m10 * p.x + m.m11 * p.y};
}

inline Point2 rotate(Point2 p, double cos_t, double sin_t) {
    return {p.x * cos_t - p.y * sin_t, p.x * sin_t + p.y * cos_t};
}

inline Point2 rotate(Point2 p, double theta) {
    return rotate(p, std::cos(theta), std::sin(theta));
}

inline Mat2 projection_matrix(const ProjectionSpec& spec) {
    const double c = std::cos(spec.theta_p);
    const double s = std::sin(spec.theta_p);
    const double off = (spec.b - spec.a) * s * c;
    return {spec.a * c * c + spec.b * s * s, off,
            off, spec.a * s * s + spec.b * c * c};
}

inline Point2 project(Point2 p, const ProjectionSpec& spec) {
    // Exact identity path: keeps the a=b=1 configuration bit-identical to a
    // model that never projects at all.
    if (spec.a == 1.0 && spec.b == 1.0) return p;
    return apply(projection_matrix(spec), p);
}

} // namespace rotpro
