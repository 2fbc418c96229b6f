#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "effifit/errors.hpp"
#include "effifit/fitters.hpp"
#include "effifit/geometry.hpp"
#include "effifit/kcr.hpp"
#include "effifit/noise.hpp"
#include "effifit/rng.hpp"

namespace effifit {

enum class EfficiencyTarget { Center, CurvatureA };

struct ExperimentConfig {
  ArcSpec arc;
  NoiseSpec noise;  // per-trial streams derive from master_seed, not noise.seed
  std::vector<FitMethod> methods{FitMethod::OLSF, FitMethod::AF,
                                 FitMethod::Pratt, FitMethod::Taubin};
  long trials = 10000;
  std::uint64_t master_seed = 0;
  EfficiencyTarget target = EfficiencyTarget::Center;
  double trim_fraction = 0.0;  // optional trimmed mean; 0 = plain mean
  bool self_test = false;      // replace the MC denominator by the bound
  int threads = 0;             // 0 = hardware concurrency

  bool valid() const {
    return arc.valid() && noise.valid() && trials >= 1 && !methods.empty();
  }
};

struct MethodEfficiency {
  FitMethod method = FitMethod::AF;
  double efficiency = 0.0;
  double mse = 0.0;    // mean squared center (or A) error
  double bound = 0.0;  // sigma^2 (D11+D22), or sigma^2 * KCR bound for A
  long failures = 0;   // degenerate or non-converged trials
  long trials_used = 0;
  bool suspicious = false;  // efficiency > 1.05 (only Monte Carlo noise can do that)
};

struct EfficiencyReport {
  std::vector<MethodEfficiency> methods;
  double sigma = 0.0;
  double arc_deg = 0.0;
  long trials = 0;
  EfficiencyTarget target = EfficiencyTarget::Center;
};

namespace detail {

/// Order-independent sum: fixed pairwise reduction tree, so the result is
/// bit-identical no matter how many threads produced the slots.
inline double pairwise_sum(std::span<const double> x) {
  if (x.size() <= 8) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  const std::size_t mid = x.size() / 2;
  return pairwise_sum(x.first(mid)) + pairwise_sum(x.subspan(mid));
}

inline void parallel_for(long count, int threads,
                         const std::function<void(long)>& body) {
  int nt = threads > 0 ? threads
                       : static_cast<int>(std::thread::hardware_concurrency());
  if (nt < 1) nt = 1;
  if (nt > count) nt = static_cast<int>(count);
  if (nt <= 1) {
    for (long i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(nt);
  for (int t = 0; t < nt; ++t) {
    pool.emplace_back([=, &body]() {
      for (long i = t; i < count; i += nt) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

/// True-point layout used by the experiments. The full circle keeps the
/// canonical 2*pi/n spacing; a partial arc is subdivided into n equal
/// steps of arc/n with the left endpoint included, which is the layout
/// the reference efficiency tables correspond to.
inline std::vector<Point2> experiment_true_points(const ArcSpec& spec) {
  if (!spec.valid()) {
    throw std::invalid_argument("experiment_true_points: invalid arc spec");
  }
  if (spec.full_circle()) {
    return sample_true_points(spec);
  }
  std::vector<Point2> pts;
  pts.reserve(static_cast<std::size_t>(spec.n));
  const CircleParams& c = spec.circle;
  const double start = spec.center_angle - 0.5 * spec.arc_angle;
  const double step = spec.arc_angle / spec.n;
  for (int j = 0; j < spec.n; ++j) {
    const double t = start + step * j;
    pts.push_back({c.a + c.R * std::cos(t), c.b + c.R * std::sin(t)});
  }
  return pts;
}

struct TrialFit {
  double a = std::numeric_limits<double>::quiet_NaN();
  double b = std::numeric_limits<double>::quiet_NaN();
  double R = std::numeric_limits<double>::quiet_NaN();
  double A = std::numeric_limits<double>::quiet_NaN();
  bool ok = false;         // fit produced parameters
  bool converged = false;
};

/// Run all trials of a config; outcome[m][t] is method m on trial t.
/// Trial t's noise comes from substream (master_seed, t); results do not
/// depend on thread count.
inline std::vector<std::vector<TrialFit>> run_trials(
    const ExperimentConfig& cfg, const std::vector<Point2>& true_points) {
  std::vector<std::vector<TrialFit>> outcome(cfg.methods.size());
  for (auto& v : outcome) v.resize(cfg.trials);

  parallel_for(cfg.trials, cfg.threads, [&](long t) {
    NoiseSpec trial_noise = cfg.noise;
    trial_noise.seed = substream_seed(cfg.master_seed, static_cast<std::uint64_t>(t));
    const std::vector<Point2> data =
        perturb(true_points, cfg.arc.circle, trial_noise);
    for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
      TrialFit& slot = outcome[m][t];
      try {
        const FitReport rep = fit_circle(data, cfg.methods[m]);
        slot.ok = true;
        slot.converged = rep.converged;
        slot.A = rep.params.A;
        if (const auto c = rep.circle()) {
          slot.a = c->a;
          slot.b = c->b;
          slot.R = c->R;
        }
      } catch (const DegenerateConfiguration&) {
      } catch (const LineCase&) {
      }
    }
  });
  return outcome;
}

inline double reduce_mean(std::vector<double>& values, double trim_fraction) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  if (trim_fraction > 0.0) {
    const auto drop = static_cast<std::size_t>(trim_fraction * values.size());
    if (drop > 0 && drop < values.size()) {
      std::nth_element(values.begin(), values.end() - drop, values.end());
      values.resize(values.size() - drop);
    }
  }
  return pairwise_sum(values) / static_cast<double>(values.size());
}

}  // namespace detail

/// Monte Carlo efficiency E = sigma^2 (D11 + D22) / <(a^-a)^2 + (b^-b)^2>
/// (or its curvature analog) against the KCR bound at the true
/// configuration. Non-converged fits are included in the average; trials
/// that yield no estimate at all count as failures and are excluded.
inline EfficiencyReport run_efficiency(const ExperimentConfig& cfg) {
  if (!cfg.valid()) {
    throw std::invalid_argument("run_efficiency: invalid config");
  }
  const std::vector<Point2> true_points = detail::experiment_true_points(cfg.arc);
  const CircleParams& circle = cfg.arc.circle;
  const double sigma = cfg.noise.sigma;

  double bound_factor = 0.0;
  try {
    if (cfg.target == EfficiencyTarget::Center) {
      const BoundMatrices b = kcr_circle(true_points, circle);
      bound_factor = b.d_min(0, 0) + b.d_min(1, 1);
    } else {
      bound_factor = kcr_for_A(true_points, circle);
    }
  } catch (const DegenerateConfiguration& e) {
    // no meaningful bound exists, so no trial can be scored
    throw ExperimentFailed(std::string("run_efficiency: ") + e.what());
  }
  const double bound = sigma * sigma * bound_factor;

  const auto outcome = detail::run_trials(cfg, true_points);

  EfficiencyReport report;
  report.sigma = sigma;
  report.arc_deg = cfg.arc.arc_angle * 180.0 / std::numbers::pi;
  report.trials = cfg.trials;
  report.target = cfg.target;

  long total_used = 0;
  for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
    MethodEfficiency me;
    me.method = cfg.methods[m];
    me.bound = bound;
    std::vector<double> errs;
    errs.reserve(cfg.trials);
    for (const detail::TrialFit& tf : outcome[m]) {
      double err = std::numeric_limits<double>::quiet_NaN();
      if (tf.ok) {
        if (cfg.target == EfficiencyTarget::Center) {
          const double da = tf.a - circle.a;
          const double db = tf.b - circle.b;
          err = da * da + db * db;
        } else {
          const double dA = tf.A - 1.0 / (2.0 * circle.R);
          err = dA * dA;
        }
      }
      if (std::isfinite(err)) {
        errs.push_back(err);
        if (!tf.converged) ++me.failures;
      } else {
        ++me.failures;
      }
    }
    me.trials_used = static_cast<long>(errs.size());
    total_used += me.trials_used;
    me.mse = detail::reduce_mean(errs, cfg.trim_fraction);
    if (cfg.self_test) {
      me.mse = bound;
    }
    if (sigma == 0.0) {
      me.efficiency = 1.0;  // zero-noise guard: 0/0 defined as exact efficiency
    } else {
      me.efficiency = bound / me.mse;
    }
    me.suspicious = me.efficiency > 1.05;
    report.methods.push_back(me);
  }
  if (total_used == 0) {
    throw ExperimentFailed("run_efficiency: every trial failed for every method");
  }
  return report;
}

struct BiasScanEntry {
  double sigma = 0.0;
  Eigen::Vector3d bias = Eigen::Vector3d::Zero();  // mean(a,b,R) - truth
  double bias_norm = 0.0;
  long trials_used = 0;
};

struct MethodBiasScan {
  FitMethod method = FitMethod::AF;
  std::vector<BiasScanEntry> entries;
  double loglog_slope = 0.0;  // of ||bias|| against sigma, sigma > 0 only
};

struct BiasScan {
  std::vector<MethodBiasScan> methods;
};

/// Empirical bias against sigma; the log-log slope exposes the O(sigma^2)
/// bias order. Needs at least 3 positive sigmas spanning a decade.
inline BiasScan run_bias_scan(const ExperimentConfig& cfg,
                              const std::vector<double>& sigma_list) {
  if (!cfg.valid()) {
    throw std::invalid_argument("run_bias_scan: invalid config");
  }
  std::vector<double> positive;
  for (double s : sigma_list) {
    if (s < 0.0 || !std::isfinite(s)) {
      throw std::invalid_argument("run_bias_scan: invalid sigma");
    }
    if (s > 0.0) positive.push_back(s);
  }
  if (positive.size() < 3 ||
      *std::max_element(positive.begin(), positive.end()) <
          10.0 * (1.0 - 1e-12) *
              *std::min_element(positive.begin(), positive.end())) {
    throw std::invalid_argument(
        "run_bias_scan: need >= 3 positive sigmas spanning a decade");
  }

  const std::vector<Point2> true_points = detail::experiment_true_points(cfg.arc);
  const CircleParams& circle = cfg.arc.circle;

  BiasScan scan;
  scan.methods.resize(cfg.methods.size());
  for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
    scan.methods[m].method = cfg.methods[m];
  }

  for (std::size_t si = 0; si < sigma_list.size(); ++si) {
    ExperimentConfig c = cfg;
    c.noise.sigma = sigma_list[si];
    c.master_seed = substream_seed(cfg.master_seed, 0x5C41 + si);
    const auto outcome = detail::run_trials(c, true_points);
    for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
      BiasScanEntry e;
      e.sigma = sigma_list[si];
      std::vector<double> va, vb, vR;
      for (const detail::TrialFit& tf : outcome[m]) {
        if (tf.ok && std::isfinite(tf.a) && std::isfinite(tf.b) &&
            std::isfinite(tf.R)) {
          va.push_back(tf.a);
          vb.push_back(tf.b);
          vR.push_back(tf.R);
        }
      }
      e.trials_used = static_cast<long>(va.size());
      if (e.trials_used > 0) {
        e.bias(0) = detail::pairwise_sum(va) / e.trials_used - circle.a;
        e.bias(1) = detail::pairwise_sum(vb) / e.trials_used - circle.b;
        e.bias(2) = detail::pairwise_sum(vR) / e.trials_used - circle.R;
      }
      e.bias_norm = e.bias.norm();
      scan.methods[m].entries.push_back(e);
    }
  }

  for (auto& ms : scan.methods) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int cnt = 0;
    for (const auto& e : ms.entries) {
      if (e.sigma > 0.0 && e.bias_norm > 0.0 && e.trials_used > 0) {
        const double lx = std::log(e.sigma);
        const double ly = std::log(e.bias_norm);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++cnt;
      }
    }
    ms.loglog_slope =
        cnt >= 2 ? (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx) : 0.0;
  }
  return scan;
}

struct EfficiencyGrid {
  std::vector<double> arc_deg;   // row coordinates
  std::vector<double> c_values;  // column coordinates (sigma = c * arc height)
  std::vector<FitMethod> methods;
  std::vector<Eigen::MatrixXd> efficiency;  // one matrix per method; NaN = failed cell
  std::vector<Eigen::MatrixXi> failures;
  EfficiencyTarget target = EfficiencyTarget::Center;
};

/// Sweep an (arc angle x noise coefficient) lattice; per-cell noise level
/// is sigma = c * arc_height. Failed cells become NaN, never an abort.
inline EfficiencyGrid run_sweep(double arc_min_deg, double arc_max_deg,
                                double c_min, double c_max, int n_arc,
                                int n_c, const ExperimentConfig& base) {
  if (!(arc_min_deg > 0.0) || arc_max_deg < arc_min_deg || n_arc < 2 ||
      n_c < 2 || c_min < 0.0 || c_max < c_min) {
    throw std::invalid_argument("run_sweep: invalid grid");
  }
  EfficiencyGrid grid;
  grid.methods = base.methods;
  grid.target = base.target;
  for (int i = 0; i < n_arc; ++i) {
    grid.arc_deg.push_back(arc_min_deg +
                           (arc_max_deg - arc_min_deg) * i / (n_arc - 1));
  }
  for (int j = 0; j < n_c; ++j) {
    grid.c_values.push_back(c_min + (c_max - c_min) * j / (n_c - 1));
  }
  for (std::size_t m = 0; m < base.methods.size(); ++m) {
    grid.efficiency.emplace_back(
        Eigen::MatrixXd::Constant(n_arc, n_c,
                                  std::numeric_limits<double>::quiet_NaN()));
    grid.failures.emplace_back(Eigen::MatrixXi::Zero(n_arc, n_c));
  }

  for (int i = 0; i < n_arc; ++i) {
    for (int j = 0; j < n_c; ++j) {
      ExperimentConfig cell = base;
      cell.arc.arc_angle = grid.arc_deg[i] * std::numbers::pi / 180.0;
      cell.noise.sigma = grid.c_values[j] * arc_height(cell.arc);
      cell.master_seed =
          substream_seed(base.master_seed, static_cast<std::uint64_t>(i) * n_c + j);
      try {
        const EfficiencyReport rep = run_efficiency(cell);
        for (std::size_t m = 0; m < rep.methods.size(); ++m) {
          const MethodEfficiency& me = rep.methods[m];
          grid.failures[m](i, j) = static_cast<int>(me.failures);
          if (me.trials_used > 0) {
            grid.efficiency[m](i, j) = me.efficiency;
          }
        }
      } catch (const ExperimentFailed&) {
        // cell stays NaN for every method
      }
    }
  }
  return grid;
}

struct CovarianceComparison {
  FitMethod method = FitMethod::Pratt;
  Eigen::Matrix3d cov_cartesian = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d cov_radial = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d se_cartesian = Eigen::Matrix3d::Zero();  // MC standard errors
  Eigen::Matrix3d se_radial = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d reference = Eigen::Matrix3d::Zero();  // sigma^2 * D2(weight)
  long used_cartesian = 0;
  long used_radial = 0;
};

namespace detail {

struct EmpiricalCov {
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d se = Eigen::Matrix3d::Zero();
  long used = 0;
};

inline EmpiricalCov covariance_of(const std::vector<TrialFit>& fits) {
  std::vector<double> va, vb, vR;
  for (const TrialFit& tf : fits) {
    if (tf.ok && std::isfinite(tf.a) && std::isfinite(tf.b) &&
        std::isfinite(tf.R)) {
      va.push_back(tf.a);
      vb.push_back(tf.b);
      vR.push_back(tf.R);
    }
  }
  EmpiricalCov out;
  out.used = static_cast<long>(va.size());
  if (out.used < 2) return out;
  const double n = static_cast<double>(out.used);
  const Eigen::Vector3d mean(pairwise_sum(va) / n, pairwise_sum(vb) / n,
                             pairwise_sum(vR) / n);
  const std::array<const std::vector<double>*, 3> cols{&va, &vb, &vR};
  for (int r = 0; r < 3; ++r) {
    for (int c = r; c < 3; ++c) {
      std::vector<double> prod(va.size());
      for (std::size_t i = 0; i < va.size(); ++i) {
        prod[i] = ((*cols[r])[i] - mean(r)) * ((*cols[c])[i] - mean(c));
      }
      const double cov = pairwise_sum(prod) / (n - 1.0);
      out.cov(r, c) = out.cov(c, r) = cov;
    }
  }
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      out.se(r, c) = std::sqrt(
          (out.cov(r, r) * out.cov(c, c) + out.cov(r, c) * out.cov(r, c)) / n);
    }
  }
  return out;
}

}  // namespace detail

/// Empirical covariance of one fitter under Cartesian vs radial noise,
/// with sigma^2 D_2 as the asymptotic reference. Valid in the small-noise
/// regime (sigma <= 0.05 R).
inline CovarianceComparison compare_covariance(const ExperimentConfig& cfg,
                                               const WeightFunction& ref_weight) {
  if (!cfg.valid() || cfg.methods.empty()) {
    throw std::invalid_argument("compare_covariance: invalid config");
  }
  if (cfg.noise.sigma > 0.05 * cfg.arc.circle.R) {
    throw std::invalid_argument(
        "compare_covariance: requires sigma <= 0.05 R (asymptotic regime)");
  }
  const std::vector<Point2> true_points = detail::experiment_true_points(cfg.arc);

  CovarianceComparison out;
  out.method = cfg.methods.front();

  ExperimentConfig one = cfg;
  one.methods = {out.method};

  one.noise.model = NoiseModel::Cartesian;
  const auto cart = detail::covariance_of(detail::run_trials(one, true_points)[0]);
  one.noise.model = NoiseModel::Radial;
  const auto rad = detail::covariance_of(detail::run_trials(one, true_points)[0]);

  out.cov_cartesian = cart.cov;
  out.se_cartesian = cart.se;
  out.used_cartesian = cart.used;
  out.cov_radial = rad.cov;
  out.se_radial = rad.se;
  out.used_radial = rad.used;

  const BoundMatrices b =
      d2_weighted(true_points, cfg.arc.circle, ref_weight, cfg.noise.sigma);
  out.reference = cfg.noise.sigma * cfg.noise.sigma * b.d2.value();
  return out;
}

}  // namespace effifit
