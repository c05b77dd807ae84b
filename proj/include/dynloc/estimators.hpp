#pragma once

#include <cstdint>
#include <vector>

#include "dynloc/disorder.hpp"
#include "dynloc/dynamics.hpp"
#include "dynloc/green.hpp"

namespace dynloc {

struct FitWindow {
  double t_lo = 1;
  double t_hi = 10;
};

struct WindowSlope {
  FitWindow window;
  double slope = 0;
  double intercept = 0;
  double r2 = 1;
  double slope_se = 0;  // realization bootstrap
  int points = 0;
};

struct ExponentFit {
  std::vector<WindowSlope> windows;
  double sigma_minus = 0;  // min window slope
  double sigma_plus = 0;   // max window slope
  double sigma_minus_se = 0;
  double sigma_plus_se = 0;
};

// Least squares of log mean Cesaro value against log T per window. Windows
// must span at least half a decade and hold >= 8 Cesaro points; the averaged
// values must be positive. Standard errors come from resampling realizations
// (fixed sub-seed, 200 resamples by default).
ExponentFit fit_exponents(const AveragedTrace& avg, const std::vector<FitWindow>& windows,
                          int bootstrap_resamples = 200, std::uint64_t bootstrap_seed = 0x5eedULL);

struct DynlocStatistic {
  double mean_sup = 0;  // disorder mean of the per-realization sup over sampled T
  double se = 0;
  double stability_ratio = 0;  // last-decade max/min of the averaged Cesaro curve
  double ratio_threshold = 1.05;
  bool bounded_verdict = false;
};

// Finite-sample boundedness surrogate. The sampled T grid must reach 1e3.
DynlocStatistic dynloc_statistic(const AveragedTrace& avg, double ratio_threshold = 1.05,
                                 double min_t_reach = 1e3);

struct AbelTrendPoint {
  double eps = 0;
  double mean = 0;
  double se = 0;
};

struct AbelTrend {
  std::vector<AbelTrendPoint> points;       // ordered by decreasing eps
  double slope = 0;                          // d log(value) / d log(eps)
  double slope_se = 0;
  bool vanishing_verdict = false;            // decreasing toward eps -> 0 with slope > se
};

// Trend of the disorder-averaged Abel functional across an eps list; the
// per-realization value matrix has one row per realization, columns matching
// the eps list (strictly decreasing).
AbelTrend abel_trend(const std::vector<double>& eps_list, const Eigen::MatrixXd& per_realization,
                     int bootstrap_resamples = 200, std::uint64_t bootstrap_seed = 0xabe1ULL);

struct WegnerResult {
  double energy = 0;
  std::vector<double> eta;       // strictly decreasing
  std::vector<double> estimate;  // mean of the eigenvalue-count product
  std::vector<double> se;
  std::vector<double> bound_ratio;  // estimate / (eta^2 |box1| |box2|)
  double fitted_power = 0;          // log estimate vs log eta slope
  double fitted_constant = 0;       // max bound ratio
  int box1_sites = 0;
  int box2_sites = 0;
};

// Pair statistic of eigenvalue counts of two disjoint Dirichlet boxes in the
// window [E-eta, E+eta], disorder averaged, with the eta-power fit and the
// fitted envelope constant. Boxes must be separated by at least min_gap sites.
WegnerResult wegner_pair(const LatticeSpec& lattice, const DisorderSpec& disorder, double energy,
                         std::vector<double> eta_list, const Box& box1, const Box& box2,
                         int realizations, int min_gap = 1, int workers = 1);

}  // namespace dynloc
