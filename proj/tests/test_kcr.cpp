#include <catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>

#include "effifit/geometry.hpp"
#include "effifit/kcr.hpp"
#include "effifit/psd.hpp"
#include "effifit/rng.hpp"

using namespace effifit;

namespace {

ArcSpec random_spec(Rng& rng) {
  const CircleParams c{2.0 * rng.next_gaussian(), 2.0 * rng.next_gaussian(),
                       0.5 + 2.0 * rng.next_unit()};
  const double arc = 1.0 + (kTwoPi - 1.0) * rng.next_unit();
  const int n = 4 + static_cast<int>(rng.next_unit() * 30);
  return {c, arc, n, rng.next_gaussian()};
}

}  // namespace

TEST_CASE("kcr_circle: n=20 full circle closed form") {
  const ArcSpec spec{{0.0, 0.0, 1.0}, kTwoPi, 20, 0.0};
  const auto pts = sample_true_points(spec);

  // independent summation oracle for the moment matrix
  double su = 0.0, sv = 0.0, suu = 0.0, svv = 0.0, suv = 0.0;
  for (const Point2& p : pts) {
    su += p.x;
    sv += p.y;
    suu += p.x * p.x;
    svv += p.y * p.y;
    suv += p.x * p.y;
  }
  CHECK(std::abs(su) <= 1e-13);
  CHECK(std::abs(sv) <= 1e-13);
  CHECK(std::abs(suv) <= 1e-13);
  CHECK(suu == Catch::Approx(10.0).epsilon(1e-13));
  CHECK(svv == Catch::Approx(10.0).epsilon(1e-13));

  const BoundMatrices b = kcr_circle(pts, spec.circle);
  const Eigen::Matrix3d expected =
      Eigen::Vector3d(0.1, 0.1, 0.05).asDiagonal();
  CHECK((b.d_min - expected).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((b.d_min - b.d_min.transpose()).norm() == 0.0);
}

TEST_CASE("kcr_circle equals kcr_generic everywhere") {
  Rng rng(246);
  for (int i = 0; i < 100; ++i) {
    const ArcSpec spec = random_spec(rng);
    const auto pts = sample_true_points(spec);
    const auto a = kcr_circle(pts, spec.circle);
    const auto g = kcr_generic(pts, spec.circle);
    CHECK((a.d_min - g.d_min).norm() <= 1e-12 * a.d_min.norm());
  }
}

TEST_CASE("kcr: rotation invariance of R-entry and center-block trace") {
  const ArcSpec spec{{0.0, 0.0, 1.3}, 2.4, 15, 0.7};
  const auto pts = sample_true_points(spec);
  const auto base = kcr_circle(pts, spec.circle);

  const double phi = 0.83;
  const double cp = std::cos(phi), sp = std::sin(phi);
  std::vector<Point2> rot(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    rot[i] = {cp * pts[i].x - sp * pts[i].y, sp * pts[i].x + cp * pts[i].y};
  }
  const auto rotated = kcr_circle(rot, spec.circle);  // center at origin stays
  CHECK(rotated.d_min(2, 2) ==
        Catch::Approx(base.d_min(2, 2)).epsilon(1e-12));
  CHECK(rotated.d_min(0, 0) + rotated.d_min(1, 1) ==
        Catch::Approx(base.d_min(0, 0) + base.d_min(1, 1)).epsilon(1e-12));
}

TEST_CASE("kcr: conditioning grows as the arc shrinks") {
  double prev_cond = 0.0;
  for (double deg = 180.0; deg >= 30.0; deg -= 30.0) {
    const ArcSpec spec{{0.0, 0.0, 1.0}, deg * std::numbers::pi / 180.0, 20,
                       std::numbers::pi / 2};
    const auto pts = sample_true_points(spec);
    const auto b = kcr_circle(pts, spec.circle);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(b.d_min);
    const double cond =
        es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff();
    CHECK(cond > prev_cond);
    prev_cond = cond;
  }
}

TEST_CASE("kcr: degenerate and invalid inputs") {
  const CircleParams c{0.0, 0.0, 1.0};
  const std::vector<Point2> two{{1.0, 0.0}, {-1.0, 0.0}};
  CHECK_THROWS_AS(kcr_circle(two, c), DegenerateConfiguration);
  const std::vector<Point2> same{{1.0, 0.0}, {1.0, 0.0}, {1.0, 0.0}};
  CHECK_THROWS_AS(kcr_circle(same, c), DegenerateConfiguration);
  const std::vector<Point2> off{{1.0, 0.0}, {0.0, 1.0}, {0.5, 0.5}};
  CHECK_THROWS_AS(kcr_circle(off, c), std::invalid_argument);
}

TEST_CASE("d2_weighted: efficient weights attain the bound") {
  const ArcSpec spec{{0.3, -0.2, 1.7}, 1.9 * std::numbers::pi, 17, 0.3};
  const auto pts = sample_true_points(spec);
  const auto dmin = kcr_circle(pts, spec.circle).d_min;

  SECTION("w proportional to 1/||grad_x P||^2") {
    const auto b = d2_weighted(pts, spec.circle,
                               [](const Point2& p, const AlgebraicCircleParams& q) {
                                 return 1.0 / q.gradient_norm_sq(p);
                               });
    REQUIRE(b.d2.has_value());
    CHECK((*b.d2 - dmin).norm() <= 1e-12 * dmin.norm());
  }
  SECTION("constant weight is efficient on a circle") {
    const auto b = d2_weighted(pts, spec.circle,
                               [](const Point2&, const AlgebraicCircleParams&) {
                                 return 1.0;
                               });
    CHECK((*b.d2 - dmin).norm() <= 1e-12 * dmin.norm());
  }
  SECTION("weight varying along the curve is strictly inefficient") {
    const auto b = d2_weighted(pts, spec.circle,
                               [](const Point2& p, const AlgebraicCircleParams&) {
                                 return 1.0 + p.x * p.x;
                               });
    CHECK(min_eigenvalue(*b.d2 - dmin) > 0.0);
  }
}

TEST_CASE("d2_weighted: random positive weights never beat the bound") {
  const ArcSpec spec{{0.0, 0.0, 1.0}, 2.2, 14, 1.0};
  const auto pts = sample_true_points(spec);
  const auto dmin = kcr_circle(pts, spec.circle).d_min;
  Rng rng(31);
  for (int i = 0; i < 30; ++i) {
    const double c0 = 0.1 + rng.next_unit();
    const double c1 = rng.next_gaussian();
    const double c2 = rng.next_gaussian();
    const auto b = d2_weighted(pts, spec.circle,
                               [=](const Point2& p, const AlgebraicCircleParams&) {
                                 return c0 + 0.5 * std::abs(c1) *
                                                 (1.0 + std::sin(c2 * (p.x + p.y)));
                               });
    CHECK(min_eigenvalue(*b.d2 - dmin) >= -1e-10 * dmin.trace());
  }
  CHECK_THROWS_AS(
      d2_weighted(pts, spec.circle,
                  [](const Point2&, const AlgebraicCircleParams&) { return 0.0; }),
      InvalidWeight);
}

TEST_CASE("efficiency_condition") {
  const CircleParams c{0.4, 0.1, 2.0};
  CHECK(efficiency_condition(
      [](const Point2&, const AlgebraicCircleParams&) { return 1.0; }, c, 1e-9));
  CHECK(efficiency_condition(
      [](const Point2& p, const AlgebraicCircleParams& q) {
        return 1.0 / q.gradient_norm_sq(p);
      },
      c, 1e-9));
  CHECK(!efficiency_condition(
      [](const Point2& p, const AlgebraicCircleParams&) { return 1.0 + p.x * p.x; },
      c, 1e-9));
}

TEST_CASE("d2 equals d_min exactly when the condition holds, on a family") {
  const ArcSpec spec{{0.0, 0.0, 1.0}, 2.0, 12, 0.2};
  const auto pts = sample_true_points(spec);
  const auto dmin = kcr_circle(pts, spec.circle).d_min;
  struct Case {
    WeightFunction w;
    bool efficient;
  };
  const std::vector<Case> cases{
      {[](const Point2&, const AlgebraicCircleParams&) { return 2.5; }, true},
      {[](const Point2& p, const AlgebraicCircleParams& q) {
         return 3.0 / q.gradient_norm_sq(p);
       },
       true},
      {[](const Point2& p, const AlgebraicCircleParams&) { return 1.0 + 0.2 * p.y * p.y; },
       false},
      {[](const Point2& p, const AlgebraicCircleParams&) {
         return std::exp(0.3 * p.x);
       },
       false}};
  for (const auto& cs : cases) {
    const bool cond = efficiency_condition(cs.w, spec.circle, 1e-9);
    CHECK(cond == cs.efficient);
    const auto b = d2_weighted(pts, spec.circle, cs.w);
    const bool attained = (*b.d2 - dmin).norm() <= 1e-9 * dmin.norm();
    CHECK(attained == cs.efficient);
  }
}

TEST_CASE("kcr monotone in the point set (PSD order)") {
  const CircleParams c{0.0, 0.0, 1.0};
  const auto small = sample_true_points({c, 2.5, 10, 0.3});
  auto big = small;
  const auto extra = sample_true_points({c, 1.2, 8, -1.1});
  big.insert(big.end(), extra.begin(), extra.end());
  const auto ds = kcr_circle(small, c).d_min;
  const auto db = kcr_circle(big, c).d_min;
  CHECK(min_eigenvalue(ds - db) >= -1e-10 * ds.trace());
}

TEST_CASE("kcr_for_A") {
  const ArcSpec spec{{0.0, 0.0, 1.0}, kTwoPi, 20, 0.0};
  const auto pts = sample_true_points(spec);
  CHECK(kcr_for_A(pts, spec.circle) == Catch::Approx(0.0125).epsilon(1e-12));

  // scales as R^-4 at fixed geometry
  const double R = 3.0;
  const ArcSpec scaled{{0.0, 0.0, R}, kTwoPi, 20, 0.0};
  const auto spts = sample_true_points(scaled);
  const double ratio = kcr_for_A(pts, spec.circle) / kcr_for_A(spts, scaled.circle);
  CHECK(ratio == Catch::Approx(std::pow(R, 4)).epsilon(1e-9));

  Rng rng(77);
  for (int i = 0; i < 20; ++i) {
    const ArcSpec s = random_spec(rng);
    CHECK(kcr_for_A(sample_true_points(s), s.circle) > 0.0);
  }
}

TEST_CASE("c_min scales d_min by sigma squared") {
  const ArcSpec spec{{0.0, 0.0, 1.0}, kTwoPi, 20, 0.0};
  const auto pts = sample_true_points(spec);
  const auto b = kcr_circle(pts, spec.circle, 0.1);
  CHECK((b.c_min() - 0.01 * b.d_min).norm() <= 1e-15);
}
