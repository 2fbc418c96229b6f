#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "effifit/geometry.hpp"
#include "effifit/rng.hpp"

namespace effifit {

enum class NoiseModel {
  Cartesian,  // isotropic N(0, sigma^2 I) on both coordinates
  Radial,     // N(0, sigma^2) along the curve normal at the true point
};

struct NoiseSpec {
  NoiseModel model = NoiseModel::Cartesian;
  double sigma = 0.0;
  std::uint64_t seed = 0;

  bool valid() const { return std::isfinite(sigma) && sigma >= 0.0; }
};

/// Perturb true points on `circle` according to `noise`. Each point's
/// displacement is drawn from its own (seed, index) substream, so the
/// result does not depend on evaluation order. The radial normal is taken
/// at the true point, which must lie on the circle to 1e-9 * R.
inline std::vector<Point2> perturb(const std::vector<Point2>& points,
                                   const CircleParams& circle,
                                   const NoiseSpec& noise) {
  if (!noise.valid() || !circle.valid()) {
    throw std::invalid_argument("perturb: invalid noise or circle spec");
  }
  if (noise.sigma == 0.0) {
    return points;
  }
  std::vector<Point2> out;
  out.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Point2& p = points[i];
    if (!is_finite(p)) {
      throw std::invalid_argument("perturb: non-finite input point");
    }
    Rng rng(substream_seed(noise.seed, i));
    if (noise.model == NoiseModel::Cartesian) {
      const GaussPair g = rng.next_gaussian_pair();
      out.push_back({p.x + noise.sigma * g.z0, p.y + noise.sigma * g.z1});
    } else {
      const double dx = p.x - circle.a;
      const double dy = p.y - circle.b;
      const double rho = std::hypot(dx, dy);
      if (std::abs(rho - circle.R) > 1e-9 * circle.R) {
        throw std::invalid_argument(
            "perturb: radial model requires true points on the circle");
      }
      const double xi = noise.sigma * rng.next_gaussian();
      out.push_back({p.x + xi * dx / rho, p.y + xi * dy / rho});
    }
  }
  return out;
}

}  // namespace effifit
