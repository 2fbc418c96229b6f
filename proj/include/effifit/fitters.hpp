#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "effifit/errors.hpp"
#include "effifit/geometry.hpp"

namespace effifit {

enum class FitMethod { OLSF, AF, Pratt, Taubin, GRAF, WeightedAF };

inline const char* to_string(FitMethod m) {
  switch (m) {
    case FitMethod::OLSF: return "olsf";
    case FitMethod::AF: return "af";
    case FitMethod::Pratt: return "pratt";
    case FitMethod::Taubin: return "taubin";
    case FitMethod::GRAF: return "graf";
    case FitMethod::WeightedAF: return "weighted_af";
  }
  return "unknown";
}

inline std::optional<FitMethod> fit_method_from_string(const std::string& s) {
  if (s == "olsf") return FitMethod::OLSF;
  if (s == "af") return FitMethod::AF;
  if (s == "pratt") return FitMethod::Pratt;
  if (s == "taubin") return FitMethod::Taubin;
  if (s == "graf") return FitMethod::GRAF;
  if (s == "weighted_af") return FitMethod::WeightedAF;
  return std::nullopt;
}

struct FitReport {
  AlgebraicCircleParams params;  // normalized: B^2+C^2-4AD = 1
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  FitMethod method = FitMethod::AF;

  /// Center-radius form; empty for the line case (A = 0).
  std::optional<CircleParams> circle() const {
    if (params.A == 0.0) return std::nullopt;
    return from_algebraic(params);
  }
};

/// Positive weight evaluated at a data point for given curve parameters.
using WeightFunction =
    std::function<double(const Point2&, const AlgebraicCircleParams&)>;

namespace detail {

inline void require_fit_input(const std::vector<Point2>& pts) {
  if (pts.size() < 3) {
    throw DegenerateConfiguration("need at least 3 points to fit a circle");
  }
  for (const Point2& p : pts) {
    if (!is_finite(p)) {
      throw std::invalid_argument("fit: non-finite data point");
    }
  }
  bool spread = false;
  for (const Point2& p : pts) {
    if (p.x != pts[0].x || p.y != pts[0].y) {
      spread = true;
      break;
    }
  }
  if (!spread) {
    throw DegenerateConfiguration("all data points coincide");
  }
}

inline Eigen::Vector2d centroid(const std::vector<Point2>& pts) {
  Eigen::Vector2d c(0.0, 0.0);
  for (const Point2& p : pts) {
    c.x() += p.x;
    c.y() += p.y;
  }
  return c / static_cast<double>(pts.size());
}

/// Quadratic form of the Pratt normalization B^2+C^2-4AD in (A,B,C,D).
inline Eigen::Matrix4d pratt_constraint_matrix() {
  Eigen::Matrix4d N = Eigen::Matrix4d::Zero();
  N(0, 3) = N(3, 0) = -2.0;
  N(1, 1) = N(2, 2) = 1.0;
  return N;
}

/// Translate normalized parameters from the frame x~ = x - t back to x.
inline AlgebraicCircleParams uncenter(const AlgebraicCircleParams& p,
                                      const Eigen::Vector2d& t) {
  AlgebraicCircleParams q;
  q.A = p.A;
  q.B = p.B - 2.0 * p.A * t.x();
  q.C = p.C - 2.0 * p.A * t.y();
  q.D = p.D + p.A * t.squaredNorm() - p.B * t.x() - p.C * t.y();
  return q;
}

/// Minimize theta^T M theta subject to theta^T N theta = 1 via the pencil
/// M theta = eta N theta. Picks the eigenvector of the smallest nonnegative
/// essentially-real eigenvalue (ties by smallest |eta|) and scales it onto
/// the constraint surface.
inline Eigen::Vector4d constrained_pencil_min(const Eigen::Matrix4d& M,
                                              const Eigen::Matrix4d& N) {
  Eigen::GeneralizedEigenSolver<Eigen::Matrix4d> ges;
  ges.compute(M, N, true);
  const auto alphas = ges.alphas();
  const auto betas = ges.betas();
  const double scale = M.norm() + N.norm();

  int best = -1;
  double best_eta = 0.0;
  const double neg_tol = 1e-9 * (1.0 + M.norm());
  for (int j = 0; j < 4; ++j) {
    if (std::abs(betas(j)) <= 1e-14 * scale) {
      continue;  // infinite eigenvalue (null direction of N)
    }
    const std::complex<double> eta_c = alphas(j) / betas(j);
    if (std::abs(eta_c.imag()) > 1e-8 * (1.0 + std::abs(eta_c.real()))) {
      continue;
    }
    const double eta = eta_c.real();
    if (eta < -neg_tol) {
      continue;
    }
    if (best < 0 || std::max(eta, 0.0) < std::max(best_eta, 0.0) ||
        (std::max(eta, 0.0) == std::max(best_eta, 0.0) &&
         std::abs(eta) < std::abs(best_eta))) {
      best = j;
      best_eta = eta;
    }
  }
  if (best < 0) {
    throw DegenerateConfiguration("constrained fit: no admissible eigenvalue");
  }
  Eigen::Vector4d theta = ges.eigenvectors().col(best).real();
  const double norm = theta.norm();
  if (!(norm > 0.0) || !theta.allFinite()) {
    throw DegenerateConfiguration("constrained fit: invalid eigenvector");
  }
  return theta / norm;
}

/// Shift solved parameters back to the original frame, renormalize, and
/// snap negligible curvature (|A| below rounding relative to the line
/// part) to the exact line case A = 0.
inline AlgebraicCircleParams finalize_params(const AlgebraicCircleParams& raw,
                                             const Eigen::Vector2d& t) {
  AlgebraicCircleParams q = uncenter(raw.normalized(), t).normalized();
  if (q.A != 0.0 && std::abs(q.A) < 1e-13 * std::hypot(q.B, q.C)) {
    q.A = 0.0;
    q = q.normalized();
  }
  return q;
}

/// One weighted constrained solve: minimize sum w_i P_i^2 under the Pratt
/// constraint. Points are centered internally for conditioning; weights are
/// given per point in the original frame.
inline AlgebraicCircleParams weighted_constrained_solve(
    const std::vector<Point2>& pts, const std::vector<double>& w,
    const Eigen::Vector2d& t) {
  Eigen::Matrix4d M = Eigen::Matrix4d::Zero();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double x = pts[i].x - t.x();
    const double y = pts[i].y - t.y();
    Eigen::Vector4d z(x * x + y * y, x, y, 1.0);
    M.noalias() += w[i] * z * z.transpose();
  }
  const Eigen::Vector4d theta = constrained_pencil_min(M, pratt_constraint_matrix());
  return finalize_params({theta(0), theta(1), theta(2), theta(3)}, t);
}

inline double param_distance(const AlgebraicCircleParams& p,
                             const AlgebraicCircleParams& q) {
  return std::sqrt((p.A - q.A) * (p.A - q.A) + (p.B - q.B) * (p.B - q.B) +
                   (p.C - q.C) * (p.C - q.C) + (p.D - q.D) * (p.D - q.D));
}

}  // namespace detail

/// Pratt fit: minimize sum P_i^2 subject to B^2+C^2-4AD = 1. Closed form
/// via a 4x4 generalized eigenproblem; degrades gracefully to a line (A=0)
/// on collinear data.
inline FitReport fit_pratt(const std::vector<Point2>& points) {
  detail::require_fit_input(points);
  const Eigen::Vector2d t = detail::centroid(points);
  std::vector<double> w(points.size(), 1.0);
  FitReport rep;
  rep.method = FitMethod::Pratt;
  rep.params = detail::weighted_constrained_solve(points, w, t);
  double obj = 0.0;
  for (const Point2& p : points) {
    const double r = rep.params.evaluate(p);
    obj += r * r;
  }
  rep.objective = obj;
  rep.iterations = 0;
  rep.converged = true;
  return rep;
}

/// Taubin fit: minimize sum P_i^2 normalized by the data-averaged squared
/// gradient, as a 4x4 generalized eigenproblem. Output is renormalized to
/// the Pratt constraint.
inline FitReport fit_taubin(const std::vector<Point2>& points) {
  detail::require_fit_input(points);
  const Eigen::Vector2d t = detail::centroid(points);
  const double n = static_cast<double>(points.size());

  Eigen::Matrix4d M = Eigen::Matrix4d::Zero();
  Eigen::Matrix4d N = Eigen::Matrix4d::Zero();
  for (const Point2& p : points) {
    const double x = p.x - t.x();
    const double y = p.y - t.y();
    const double z = x * x + y * y;
    Eigen::Vector4d v(z, x, y, 1.0);
    M.noalias() += v * v.transpose();
    // ||grad_x P||^2 = 4A^2 z + 4ABx + 4ACy + B^2 + C^2 as a form in theta
    N(0, 0) += 4.0 * z;
    N(0, 1) += 2.0 * x;
    N(1, 0) += 2.0 * x;
    N(0, 2) += 2.0 * y;
    N(2, 0) += 2.0 * y;
    N(1, 1) += 1.0;
    N(2, 2) += 1.0;
  }
  N /= n;

  const Eigen::Vector4d theta = detail::constrained_pencil_min(M, N);
  FitReport rep;
  rep.method = FitMethod::Taubin;
  rep.params =
      detail::finalize_params({theta(0), theta(1), theta(2), theta(3)}, t);
  double num = 0.0;
  double den = 0.0;
  for (const Point2& p : points) {
    const double r = rep.params.evaluate(p);
    num += r * r;
    den += rep.params.gradient_norm_sq(p);
  }
  rep.objective = den > 0.0 ? num * n / den : num;
  rep.iterations = 0;
  rep.converged = true;
  return rep;
}

/// Simple algebraic (Kasa) fit: the linear normal equations minimizing
/// sum [(x-a)^2 + (y-b)^2 - R^2]^2. Exact, no iteration.
inline FitReport fit_af(const std::vector<Point2>& points) {
  detail::require_fit_input(points);
  const Eigen::Vector2d t = detail::centroid(points);

  Eigen::Matrix3d N = Eigen::Matrix3d::Zero();
  Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
  for (const Point2& p : points) {
    const double x = p.x - t.x();
    const double y = p.y - t.y();
    const double z = x * x + y * y;
    Eigen::Vector3d v(x, y, 1.0);
    N.noalias() += v * v.transpose();
    rhs.noalias() -= z * v;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(N);
  const double emin = es.eigenvalues().minCoeff();
  const double emax = es.eigenvalues().maxCoeff();
  if (!(emin > 0.0) || emax / emin > 1e12) {
    throw DegenerateConfiguration("af: singular normal matrix (collinear data)");
  }
  const Eigen::Vector3d beta = N.ldlt().solve(rhs);

  CircleParams c;
  c.a = -0.5 * beta(0);
  c.b = -0.5 * beta(1);
  const double r2 = c.a * c.a + c.b * c.b - beta(2);
  if (!(r2 > 0.0)) {
    throw DegenerateConfiguration("af: nonpositive squared radius");
  }
  c.R = std::sqrt(r2);
  c.a += t.x();
  c.b += t.y();

  FitReport rep;
  rep.method = FitMethod::AF;
  rep.params = to_algebraic(c);
  double obj = 0.0;
  for (const Point2& p : points) {
    const double d = (p.x - c.a) * (p.x - c.a) + (p.y - c.b) * (p.y - c.b) -
                     c.R * c.R;
    obj += d * d;
  }
  rep.objective = obj;
  rep.iterations = 0;
  rep.converged = true;
  return rep;
}

/// Weighted algebraic fit: freeze the weights at the current iterate, solve
/// the constrained 4x4 eigenproblem, repeat to a fixed point. This solves
/// the reduced estimating equation sum w_i P_i grad P_i = eta * N theta;
/// the dropped grad_Theta(w) term shifts estimates only at second order in
/// the noise.
inline FitReport fit_weighted_af(
    const std::vector<Point2>& points, const WeightFunction& w,
    std::optional<AlgebraicCircleParams> init = std::nullopt,
    FitMethod tag = FitMethod::WeightedAF, int max_iterations = 50) {
  detail::require_fit_input(points);
  const Eigen::Vector2d t = detail::centroid(points);

  AlgebraicCircleParams theta =
      init ? init->normalized() : fit_taubin(points).params;

  FitReport rep;
  rep.method = tag;
  rep.converged = false;

  std::vector<double> weights(points.size());
  for (int iter = 1; iter <= max_iterations; ++iter) {
    rep.iterations = iter;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double wi = w(points[i], theta);
      if (!std::isfinite(wi) || wi <= 0.0) {
        throw InvalidWeight("weighted fit: weight must be positive and finite");
      }
      weights[i] = wi;
    }
    const AlgebraicCircleParams next =
        detail::weighted_constrained_solve(points, weights, t);
    const double delta = detail::param_distance(next, theta);
    theta = next;
    if (delta <= 1e-12) {
      rep.converged = true;
      break;
    }
  }

  rep.params = theta;
  double obj = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double r = theta.evaluate(points[i]);
    obj += w(points[i], theta) * r * r;
  }
  rep.objective = obj;
  return rep;
}

/// Gradient-weighted algebraic fit, Eq. weights 1/||grad_x P||^2 refreshed
/// each sweep. The +1e-12 floor (one unit of the constraint value) guards
/// against a data point sitting on the current center.
inline FitReport fit_graf(const std::vector<Point2>& points,
                          std::optional<AlgebraicCircleParams> init = std::nullopt) {
  const WeightFunction w = [](const Point2& p, const AlgebraicCircleParams& q) {
    return 1.0 / (q.gradient_norm_sq(p) + 1e-12);
  };
  return fit_weighted_af(points, w, init, FitMethod::GRAF, 50);
}

/// Orthogonal least squares fit: damped Gauss-Newton on (a, b, R) for the
/// sum of squared geometric distances. Seeded from Taubin when no initial
/// circle is supplied. Non-convergence is reported, not thrown. When given,
/// objective_trace records the objective after each accepted step.
inline FitReport fit_olsf(const std::vector<Point2>& points,
                          std::optional<CircleParams> init = std::nullopt,
                          std::vector<double>* objective_trace = nullptr) {
  detail::require_fit_input(points);

  CircleParams c;
  if (init) {
    if (!init->valid()) {
      throw std::invalid_argument("olsf: invalid initial circle");
    }
    c = *init;
  } else {
    const FitReport seed = fit_taubin(points);
    if (seed.params.A == 0.0) {
      throw DegenerateConfiguration("olsf: initial fit is a line");
    }
    c = from_algebraic(seed.params);
  }

  const std::size_t n = points.size();
  Eigen::MatrixXd J(n, 3);
  Eigen::VectorXd r(n);

  const auto objective = [&points](const CircleParams& q) {
    double f = 0.0;
    for (const Point2& p : points) {
      const double d = std::hypot(p.x - q.a, p.y - q.b) - q.R;
      f += d * d;
    }
    return f;
  };

  double F = objective(c);
  double lambda = 1e-3;
  if (objective_trace) {
    objective_trace->push_back(F);
  }
  FitReport rep;
  rep.method = FitMethod::OLSF;
  rep.converged = false;

  for (int iter = 1; iter <= 100; ++iter) {
    rep.iterations = iter;
    for (std::size_t i = 0; i < n; ++i) {
      const double dx = points[i].x - c.a;
      const double dy = points[i].y - c.b;
      const double rho = std::hypot(dx, dy);
      r(i) = rho - c.R;
      if (rho > 0.0) {
        J(i, 0) = -dx / rho;
        J(i, 1) = -dy / rho;
      } else {
        J(i, 0) = 0.0;
        J(i, 1) = 0.0;
      }
      J(i, 2) = -1.0;
    }
    const Eigen::Matrix3d H = J.transpose() * J;
    const Eigen::Vector3d g = J.transpose() * r;

    bool stepped = false;
    for (int attempt = 0; attempt < 60; ++attempt) {
      const Eigen::Vector3d delta =
          (H + lambda * Eigen::Matrix3d::Identity()).ldlt().solve(-g);
      const double pnorm =
          std::sqrt(c.a * c.a + c.b * c.b + c.R * c.R);
      if (delta.norm() <= 1e-12 * (1.0 + pnorm)) {
        rep.converged = true;
        break;
      }
      CircleParams trial{c.a + delta(0), c.b + delta(1), c.R + delta(2)};
      if (trial.R > 0.0) {
        const double Ft = objective(trial);
        if (Ft < F) {
          c = trial;
          F = Ft;
          lambda = std::max(lambda * 0.1, 1e-14);
          stepped = true;
          if (objective_trace) {
            objective_trace->push_back(F);
          }
          if (delta.norm() <= 1e-12 * (1.0 + pnorm)) {
            rep.converged = true;
          }
          break;
        }
      }
      lambda *= 10.0;
      if (lambda > 1e14) {
        break;
      }
    }
    if (rep.converged || !stepped) {
      break;
    }
  }

  rep.params = to_algebraic(c);
  rep.objective = F;
  return rep;
}

/// Dispatch by method tag; olsf/graf run with their default initialization.
inline FitReport fit_circle(const std::vector<Point2>& points, FitMethod m) {
  switch (m) {
    case FitMethod::OLSF: return fit_olsf(points);
    case FitMethod::AF: return fit_af(points);
    case FitMethod::Pratt: return fit_pratt(points);
    case FitMethod::Taubin: return fit_taubin(points);
    case FitMethod::GRAF: return fit_graf(points);
    case FitMethod::WeightedAF:
      return fit_weighted_af(
          points, [](const Point2&, const AlgebraicCircleParams&) { return 1.0; });
  }
  throw std::invalid_argument("fit_circle: unknown method");
}

}  // namespace effifit
