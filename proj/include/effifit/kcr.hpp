#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <vector>

#include "effifit/errors.hpp"
#include "effifit/fitters.hpp"
#include "effifit/geometry.hpp"

namespace effifit {

/// Lower-bound matrices for circle parameter estimation, parameter order
/// (a, b, R) throughout.
struct BoundMatrices {
  Eigen::Matrix3d d_min = Eigen::Matrix3d::Zero();
  std::optional<Eigen::Matrix3d> d2;
  double sigma = 1.0;

  Eigen::Matrix3d c_min() const { return sigma * sigma * d_min; }
};

namespace detail {

inline void require_on_circle(const std::vector<Point2>& pts,
                              const CircleParams& c) {
  if (!c.valid()) {
    throw std::invalid_argument("kcr: invalid circle");
  }
  if (pts.size() < 3) {
    throw DegenerateConfiguration("kcr: need at least 3 true points");
  }
  for (const Point2& p : pts) {
    if (std::abs(std::hypot(p.x - c.a, p.y - c.b) - c.R) > 1e-9 * c.R) {
      throw std::invalid_argument("kcr: true point off the circle");
    }
  }
}

/// Invert a symmetric positive definite 3x3 moment matrix; anything short
/// of positive definite is a degenerate configuration, not a pseudo-inverse.
inline Eigen::Matrix3d invert_spd(const Eigen::Matrix3d& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(M);
  const double emin = es.eigenvalues().minCoeff();
  const double emax = es.eigenvalues().maxCoeff();
  if (!(emin > 0.0) || emin <= 1e-14 * emax) {
    throw DegenerateConfiguration("kcr: singular moment matrix");
  }
  Eigen::LLT<Eigen::Matrix3d> llt(M);
  if (llt.info() != Eigen::Success) {
    throw DegenerateConfiguration("kcr: moment matrix not positive definite");
  }
  Eigen::Matrix3d inv = llt.solve(Eigen::Matrix3d::Identity());
  return 0.5 * (inv + inv.transpose());
}

}  // namespace detail

/// KCR bound from the circle-specialized moment matrix of the normalized
/// offsets u_i = (x_i-a)/R, v_i = (y_i-b)/R.
inline BoundMatrices kcr_circle(const std::vector<Point2>& true_points,
                                const CircleParams& circle,
                                double sigma = 1.0) {
  detail::require_on_circle(true_points, circle);
  double su = 0.0, sv = 0.0, suu = 0.0, svv = 0.0, suv = 0.0;
  for (const Point2& p : true_points) {
    const double u = (p.x - circle.a) / circle.R;
    const double v = (p.y - circle.b) / circle.R;
    su += u;
    sv += v;
    suu += u * u;
    svv += v * v;
    suv += u * v;
  }
  Eigen::Matrix3d Minv;
  Minv << suu, suv, su,
          suv, svv, sv,
          su, sv, static_cast<double>(true_points.size());
  BoundMatrices out;
  out.d_min = detail::invert_spd(Minv);
  out.sigma = sigma;
  return out;
}

/// KCR bound evaluated from the generic gradient formula
/// D_min^{-1} = sum (grad_Theta P)(grad_Theta P)^T / ||grad_x P||^2.
/// Agrees with kcr_circle to rounding; kept as an independent route.
inline BoundMatrices kcr_generic(const std::vector<Point2>& true_points,
                                 const CircleParams& circle,
                                 double sigma = 1.0) {
  detail::require_on_circle(true_points, circle);
  // on the curve ||grad_x P||^2 = 4[(x-a)^2+(y-b)^2] = 4R^2
  const double grad_x_sq = 4.0 * circle.R * circle.R;
  Eigen::Matrix3d G = Eigen::Matrix3d::Zero();
  for (const Point2& p : true_points) {
    const double dx = p.x - circle.a;
    const double dy = p.y - circle.b;
    const Eigen::Vector3d g(-2.0 * dx, -2.0 * dy, -2.0 * circle.R);
    G.noalias() += g * g.transpose() / grad_x_sq;
  }
  BoundMatrices out;
  out.d_min = detail::invert_spd(G);
  out.sigma = sigma;
  return out;
}

/// Asymptotic covariance factor D_2 of the weighted algebraic fit with
/// weight function w, evaluated at the true points:
/// D_2 = W1^{-1} W2 W1^{-1} with
/// W1 = sum w_i g_i g_i^T, W2 = sum w_i^2 ||grad_x P_i||^2 g_i g_i^T.
inline BoundMatrices d2_weighted(const std::vector<Point2>& true_points,
                                 const CircleParams& circle,
                                 const WeightFunction& w,
                                 double sigma = 1.0) {
  detail::require_on_circle(true_points, circle);
  const AlgebraicCircleParams theta = to_algebraic(circle);
  Eigen::Matrix3d W1 = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d W2 = Eigen::Matrix3d::Zero();
  for (const Point2& p : true_points) {
    const double wi = w(p, theta);
    if (!std::isfinite(wi) || wi <= 0.0) {
      throw InvalidWeight("d2_weighted: weight must be positive on true points");
    }
    const double dx = p.x - circle.a;
    const double dy = p.y - circle.b;
    const Eigen::Vector3d g(-2.0 * dx, -2.0 * dy, -2.0 * circle.R);
    const double grad_x_sq = 4.0 * (dx * dx + dy * dy);
    const Eigen::Matrix3d gg = g * g.transpose();
    W1.noalias() += wi * gg;
    W2.noalias() += wi * wi * grad_x_sq * gg;
  }
  const Eigen::Matrix3d W1inv = detail::invert_spd(W1);
  BoundMatrices out = kcr_generic(true_points, circle, sigma);
  const Eigen::Matrix3d d2 = W1inv * W2 * W1inv;
  out.d2 = 0.5 * (d2 + d2.transpose());
  return out;
}

/// True iff w * ||grad_x P||^2 is constant along the circle to relative
/// variation tol, i.e. w matches c(Theta)/||grad_x P||^2 on-curve.
inline bool efficiency_condition(const WeightFunction& w,
                                 const CircleParams& circle, double tol) {
  if (!circle.valid()) {
    throw std::invalid_argument("efficiency_condition: invalid circle");
  }
  const AlgebraicCircleParams theta = to_algebraic(circle);
  constexpr int kSamples = 360;
  double qmin = 0.0, qmax = 0.0, qsum = 0.0;
  for (int j = 0; j < kSamples; ++j) {
    const double t = kTwoPi * j / kSamples;
    const Point2 p{circle.a + circle.R * std::cos(t),
                   circle.b + circle.R * std::sin(t)};
    const double wi = w(p, theta);
    if (!std::isfinite(wi) || wi <= 0.0) {
      return false;
    }
    const double q = wi * theta.gradient_norm_sq(p);
    if (j == 0) {
      qmin = qmax = q;
    } else {
      qmin = std::min(qmin, q);
      qmax = std::max(qmax, q);
    }
    qsum += q;
  }
  const double mean = qsum / kSamples;
  if (!(mean > 0.0)) {
    return false;
  }
  return (qmax - qmin) / mean <= tol;
}

/// Delta-method lower bound on Var(A-hat)/sigma^2 for the curvature-type
/// parameter A = 1/(2R): J D_min J^T with J = (0, 0, -1/(2R^2)).
inline double kcr_for_A(const std::vector<Point2>& true_points,
                        const CircleParams& circle) {
  const BoundMatrices b = kcr_circle(true_points, circle);
  const double j = -1.0 / (2.0 * circle.R * circle.R);
  return j * j * b.d_min(2, 2);
}

}  // namespace effifit
