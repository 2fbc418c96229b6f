#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "effifit/errors.hpp"

namespace effifit {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

inline bool is_finite(const Point2& p) {
  return std::isfinite(p.x) && std::isfinite(p.y);
}

/// Circle in center-radius form (x-a)^2 + (y-b)^2 = R^2.
struct CircleParams {
  double a = 0.0;
  double b = 0.0;
  double R = 1.0;

  bool valid() const {
    return std::isfinite(a) && std::isfinite(b) && std::isfinite(R) && R > 0.0;
  }
};

/// Circle/line in the form A(x^2+y^2) + Bx + Cy + D = 0 with the
/// normalization B^2 + C^2 - 4AD = 1. A = 0 describes a line; the
/// parameters stay bounded as curvature vanishes.
struct AlgebraicCircleParams {
  double A = 0.0;
  double B = 0.0;
  double C = 0.0;
  double D = 0.0;

  double constraint_value() const { return B * B + C * C - 4.0 * A * D; }

  double evaluate(const Point2& p) const {
    return A * (p.x * p.x + p.y * p.y) + B * p.x + C * p.y + D;
  }

  /// Gradient of the defining polynomial with respect to (x, y).
  double gradient_norm_sq(const Point2& p) const {
    const double gx = 2.0 * A * p.x + B;
    const double gy = 2.0 * A * p.y + C;
    return gx * gx + gy * gy;
  }

  /// Rescale so the constraint holds exactly and fix the sign: A >= 0,
  /// ties broken by B >= 0, then C > 0.
  AlgebraicCircleParams normalized() const {
    const double s = constraint_value();
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw DegenerateConfiguration(
          "algebraic parameters not normalizable: B^2+C^2-4AD = " +
          std::to_string(s));
    }
    const double inv = 1.0 / std::sqrt(s);
    AlgebraicCircleParams q{A * inv, B * inv, C * inv, D * inv};
    double sign = 0.0;
    if (q.A != 0.0) {
      sign = q.A > 0.0 ? 1.0 : -1.0;
    } else if (q.B != 0.0) {
      sign = q.B > 0.0 ? 1.0 : -1.0;
    } else {
      sign = q.C > 0.0 ? 1.0 : -1.0;
    }
    if (sign < 0.0) {
      q = AlgebraicCircleParams{-q.A, -q.B, -q.C, -q.D};
    }
    return q;
  }
};

inline AlgebraicCircleParams to_algebraic(const CircleParams& c) {
  if (!c.valid()) {
    throw std::invalid_argument("to_algebraic: invalid circle parameters");
  }
  const double A = 1.0 / (2.0 * c.R);
  const double B = -c.a / c.R;
  const double C = -c.b / c.R;
  const double D = (c.a * c.a + c.b * c.b - c.R * c.R) / (2.0 * c.R);
  return AlgebraicCircleParams{A, B, C, D}.normalized();
}

inline CircleParams from_algebraic(const AlgebraicCircleParams& p) {
  if (!std::isfinite(p.A) || !std::isfinite(p.B) || !std::isfinite(p.C) ||
      !std::isfinite(p.D)) {
    throw std::invalid_argument("from_algebraic: non-finite parameters");
  }
  if (p.A == 0.0) {
    throw LineCase("from_algebraic: A = 0 describes a line, not a circle");
  }
  CircleParams c;
  c.a = -p.B / (2.0 * p.A);
  c.b = -p.C / (2.0 * p.A);
  c.R = 1.0 / (2.0 * std::abs(p.A));
  if (!c.valid()) {
    throw DegenerateConfiguration("from_algebraic: no finite circle");
  }
  return c;
}

/// Signed orthogonal distance: negative inside the circle, zero on it.
inline double signed_distance(const Point2& pt, const CircleParams& c) {
  if (!c.valid() || !is_finite(pt)) {
    throw std::invalid_argument("signed_distance: non-finite input");
  }
  return std::hypot(pt.x - c.a, pt.y - c.b) - c.R;
}

/// Generative description of true points: n points on an arc of
/// arc_angle radians whose midpoint sits at polar angle center_angle.
struct ArcSpec {
  CircleParams circle;
  double arc_angle = kTwoPi;
  int n = 20;
  double center_angle = 0.0;

  bool valid() const {
    return circle.valid() && n >= 3 && std::isfinite(arc_angle) &&
           arc_angle > 0.0 && arc_angle <= kTwoPi + 1e-12 &&
           std::isfinite(center_angle);
  }

  bool full_circle() const { return arc_angle >= kTwoPi - 1e-12; }
};

/// Equally spaced points on the arc. Partial arcs include both endpoints
/// (spacing arc_angle/(n-1)); the full circle omits the duplicate endpoint
/// (spacing 2*pi/n, first point at center_angle).
inline std::vector<Point2> sample_true_points(const ArcSpec& spec) {
  if (!spec.valid()) {
    throw std::invalid_argument("sample_true_points: invalid arc spec");
  }
  std::vector<Point2> pts;
  pts.reserve(static_cast<std::size_t>(spec.n));
  const CircleParams& c = spec.circle;
  if (spec.full_circle()) {
    for (int j = 0; j < spec.n; ++j) {
      const double t = spec.center_angle + kTwoPi * j / spec.n;
      pts.push_back({c.a + c.R * std::cos(t), c.b + c.R * std::sin(t)});
    }
  } else {
    const double start = spec.center_angle - 0.5 * spec.arc_angle;
    const double step = spec.arc_angle / (spec.n - 1);
    for (int j = 0; j < spec.n; ++j) {
      const double t = start + step * j;
      pts.push_back({c.a + c.R * std::cos(t), c.b + c.R * std::sin(t)});
    }
  }
  return pts;
}

/// Sagitta of the arc: h = R(1 - cos(arc_angle/2)); 2R for the full circle.
inline double arc_height(const ArcSpec& spec) {
  if (!spec.valid()) {
    throw std::invalid_argument("arc_height: invalid arc spec");
  }
  if (spec.full_circle()) {
    return 2.0 * spec.circle.R;
  }
  return spec.circle.R * (1.0 - std::cos(0.5 * spec.arc_angle));
}

}  // namespace effifit
