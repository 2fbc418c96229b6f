#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "effifit/psd.hpp"
#include "effifit/rng.hpp"

namespace effifit {

/// Random instance of the rank-one lower-bound theorem: n nonzero
/// direction vectors u_i in R^m and n vectors v_i spanning R^k.
struct LAInstance {
  int k = 1;
  int m = 1;
  int n = 1;
  std::vector<Eigen::VectorXd> u;
  std::vector<Eigen::VectorXd> v;

  Eigen::MatrixXd x_matrix(int i) const {
    return v[i] * u[i].transpose() / u[i].squaredNorm();
  }

  /// B = sum v_i v_i^T / (u_i^T u_i); symmetric positive definite when the
  /// v_i span R^k.
  Eigen::MatrixXd b_matrix() const {
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(k, k);
    for (int i = 0; i < n; ++i) {
      B.noalias() += v[i] * v[i].transpose() / u[i].squaredNorm();
    }
    return B;
  }

  Eigen::MatrixXd b_inverse() const {
    return b_matrix().llt().solve(Eigen::MatrixXd::Identity(k, k));
  }
};

/// A set of rank-one matrices A_i = z_i u_i^T with sum z_i v_i^T = -I.
struct ProperSet {
  std::vector<Eigen::VectorXd> z;

  Eigen::MatrixXd a_matrix(const LAInstance& inst, int i) const {
    return z[i] * inst.u[i].transpose();
  }

  /// D = sum A_i A_i^T, the matrix bounded below by B^{-1}.
  Eigen::MatrixXd d_matrix(const LAInstance& inst) const {
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(inst.k, inst.k);
    for (int i = 0; i < inst.n; ++i) {
      const Eigen::MatrixXd A = a_matrix(inst, i);
      D.noalias() += A * A.transpose();
    }
    return D;
  }

  /// || sum z_i v_i^T + I ||, zero for a proper set.
  double properness_residual(const LAInstance& inst) const {
    Eigen::MatrixXd S = Eigen::MatrixXd::Identity(inst.k, inst.k);
    for (int i = 0; i < inst.n; ++i) {
      S.noalias() += z[i] * inst.v[i].transpose();
    }
    return S.norm();
  }
};

namespace detail {

inline Eigen::VectorXd random_vector(Rng& rng, int dim) {
  Eigen::VectorXd x(dim);
  for (int i = 0; i < dim; ++i) {
    x(i) = rng.next_gaussian();
  }
  return x;
}

}  // namespace detail

/// Draw an instance with all invariants enforced (nonzero vectors, v_i
/// spanning R^k, B safely invertible); deterministic given the seed.
inline LAInstance random_instance(int k, int m, int n, std::uint64_t seed) {
  if (!(n >= k && k >= 1 && m >= 1)) {
    throw std::invalid_argument("random_instance: need n >= k >= 1, m >= 1");
  }
  Rng rng(substream_seed(seed, 0x1a));
  for (int attempt = 0; attempt < 1000; ++attempt) {
    LAInstance inst;
    inst.k = k;
    inst.m = m;
    inst.n = n;
    inst.u.reserve(n);
    inst.v.reserve(n);
    bool ok = true;
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd ui = detail::random_vector(rng, m);
      Eigen::VectorXd vi = detail::random_vector(rng, k);
      // a tiny u blows up the 1/(u^T u) weights and washes out the
      // double-precision identities the checks assert
      if (ui.norm() < 1e-2 || vi.norm() < 1e-2) {
        ok = false;
        break;
      }
      inst.u.push_back(std::move(ui));
      inst.v.push_back(std::move(vi));
    }
    if (!ok) {
      continue;
    }
    Eigen::MatrixXd V(k, n);
    for (int i = 0; i < n; ++i) {
      V.col(i) = inst.v[i];
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(V);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) < 1e-2 * sv(0)) {
      continue;  // v_i do not span R^k robustly
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(inst.b_matrix());
    const double emin = es.eigenvalues().minCoeff();
    const double emax = es.eigenvalues().maxCoeff();
    if (!(emin > 0.0) || emin / emax < 1e-3) {
      continue;  // regenerate on a near-singular B
    }
    return inst;
  }
  throw std::runtime_error("random_instance: failed to draw a valid instance");
}

/// The equality case of the theorem: z_i = -B^{-1} v_i / (u_i^T u_i),
/// i.e. A_i = -B^{-1} X_i, for which D = B^{-1}.
inline ProperSet optimal_proper_set(const LAInstance& inst) {
  const Eigen::MatrixXd Binv = inst.b_inverse();
  ProperSet ps;
  ps.z.reserve(inst.n);
  for (int i = 0; i < inst.n; ++i) {
    ps.z.push_back(-Binv * inst.v[i] / inst.u[i].squaredNorm());
  }
  return ps;
}

/// Random proper set: the optimal set plus `amplitude` times a random
/// direction inside the affine variety sum z_i v_i^T = -I. The correction
/// is an exact linear projection, not rejection sampling. amplitude = 0
/// reproduces the optimal set.
inline ProperSet random_proper_set(const LAInstance& inst, std::uint64_t seed,
                                   double amplitude = 1.0) {
  Rng rng(substream_seed(seed, 0x2b));
  std::vector<Eigen::VectorXd> tilde;
  tilde.reserve(inst.n);
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(inst.k, inst.k);
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(inst.k, inst.k);
  for (int i = 0; i < inst.n; ++i) {
    tilde.push_back(amplitude * detail::random_vector(rng, inst.k));
    T.noalias() += tilde.back() * inst.v[i].transpose();
    G.noalias() += inst.v[i] * inst.v[i].transpose();
  }
  const Eigen::MatrixXd Ginv =
      G.llt().solve(Eigen::MatrixXd::Identity(inst.k, inst.k));

  ProperSet ps = optimal_proper_set(inst);
  const Eigen::MatrixXd TGinv = T * Ginv;
  for (int i = 0; i < inst.n; ++i) {
    ps.z[i] += tilde[i] - TGinv * inst.v[i];
  }
  // one refinement pass soaks up rounding from badly scaled draws
  for (int pass = 0; pass < 3 && ps.properness_residual(inst) > 1e-13; ++pass) {
    Eigen::MatrixXd S = Eigen::MatrixXd::Identity(inst.k, inst.k);
    for (int i = 0; i < inst.n; ++i) {
      S.noalias() += ps.z[i] * inst.v[i].transpose();
    }
    const Eigen::MatrixXd SGinv = S * Ginv;
    for (int i = 0; i < inst.n; ++i) {
      ps.z[i] -= SGinv * inst.v[i];
    }
  }
  return ps;
}

struct BoundCheck {
  double min_eig = 0.0;        // smallest eigenvalue of D - B^{-1}
  double cross_residual = 0.0; // || sum A_i X_i^T + I ||
};

/// Evaluate the theorem's inequality D >= B^{-1} and the cross-term
/// identity sum A_i X_i^T = -I for a proper set.
inline BoundCheck check_bound(const LAInstance& inst, const ProperSet& ps) {
  const Eigen::MatrixXd D = ps.d_matrix(inst);
  const Eigen::MatrixXd Binv = inst.b_inverse();
  BoundCheck out;
  out.min_eig = min_eigenvalue(D - Binv);
  Eigen::MatrixXd S = Eigen::MatrixXd::Identity(inst.k, inst.k);
  for (int i = 0; i < inst.n; ++i) {
    S.noalias() += ps.a_matrix(inst, i) * inst.x_matrix(i).transpose();
  }
  out.cross_residual = S.norm();
  return out;
}

struct CorollaryCheck {
  double residual = 0.0;  // max_i || A_i n_i n_i^T A_i^T - A_i A_i^T ||
  double scale = 0.0;     // max_i || A_i ||^2
};

/// Rank-one identity behind the Cartesian/radial equivalence: projecting
/// onto the unit direction n_i = u_i/||u_i|| does not change A_i A_i^T.
inline CorollaryCheck check_corollary(const LAInstance& inst,
                                      const ProperSet& ps) {
  CorollaryCheck out;
  for (int i = 0; i < inst.n; ++i) {
    const Eigen::MatrixXd A = ps.a_matrix(inst, i);
    const Eigen::VectorXd n = inst.u[i] / inst.u[i].norm();
    const Eigen::MatrixXd lhs = (A * n) * (n.transpose() * A.transpose());
    const double res = (lhs - A * A.transpose()).norm();
    out.residual = std::max(out.residual, res);
    out.scale = std::max(out.scale, A.squaredNorm());
  }
  return out;
}

}  // namespace effifit
