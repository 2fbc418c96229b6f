// Generate a noisy half-circle, run every fitter, and print the estimates
// next to the truth and the KCR bound.

#include <iomanip>
#include <iostream>

#include "effifit/effifit.hpp"

int main() {
  using namespace effifit;

  const CircleParams truth{1.0, -0.5, 2.0};
  const ArcSpec arc{truth, std::numbers::pi, 24, 0.8};
  const NoiseSpec noise{NoiseModel::Cartesian, 0.04, 20240817};

  const auto true_points = sample_true_points(arc);
  const auto data = perturb(true_points, truth, noise);

  std::cout << std::fixed << std::setprecision(5);
  std::cout << "truth:      a=" << truth.a << " b=" << truth.b
            << " R=" << truth.R << "\n";

  for (FitMethod m : {FitMethod::AF, FitMethod::Pratt, FitMethod::Taubin,
                      FitMethod::GRAF, FitMethod::OLSF}) {
    const FitReport rep = fit_circle(data, m);
    const auto c = rep.circle();
    std::cout << std::setw(10) << to_string(m) << ": a=" << c->a
              << " b=" << c->b << " R=" << c->R
              << "  iters=" << rep.iterations << "\n";
  }

  const BoundMatrices bounds = kcr_circle(true_points, truth, noise.sigma);
  std::cout << "\nKCR center variance bound: "
            << bounds.c_min()(0, 0) + bounds.c_min()(1, 1) << "\n";
  return 0;
}
