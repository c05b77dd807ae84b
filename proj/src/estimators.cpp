#include "dynloc/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dynloc/runner.hpp"
#include "dynloc/stats.hpp"

namespace dynloc {

namespace {

// Window fit over the mean curve built from the given realization rows.
double window_slope(const Eigen::MatrixXd& per_real_C, const std::vector<int>& rows,
                    const std::vector<double>& logT, const std::vector<int>& cols) {
  std::vector<double> x, y;
  x.reserve(cols.size());
  y.reserve(cols.size());
  for (int c : cols) {
    double mean = 0;
    for (int r : rows) mean += per_real_C(r, c);
    mean /= static_cast<double>(rows.size());
    if (!(mean > 0)) throw std::invalid_argument("nonpositive Cesaro average in fit window");
    x.push_back(logT[static_cast<std::size_t>(c)]);
    y.push_back(std::log(mean));
  }
  return ols(x, y).slope;
}

}  // namespace

ExponentFit fit_exponents(const AveragedTrace& avg, const std::vector<FitWindow>& windows,
                          int bootstrap_resamples, std::uint64_t bootstrap_seed) {
  if (windows.empty()) throw std::invalid_argument("no fit windows");
  const int nc = static_cast<int>(avg.cesaro_T.size());
  std::vector<double> logT(static_cast<std::size_t>(nc));
  for (int c = 0; c < nc; ++c) logT[static_cast<std::size_t>(c)] = std::log(avg.cesaro_T[static_cast<std::size_t>(c)]);

  std::vector<int> all_rows(static_cast<std::size_t>(avg.per_realization_C.rows()));
  for (std::size_t r = 0; r < all_rows.size(); ++r) all_rows[r] = static_cast<int>(r);
  const auto resamples = bootstrap_indices(static_cast<int>(all_rows.size()), bootstrap_resamples,
                                           bootstrap_seed);

  ExponentFit fit;
  std::vector<std::vector<double>> boot_slopes(windows.size());
  for (std::size_t w = 0; w < windows.size(); ++w) {
    const auto& win = windows[w];
    if (!(win.t_hi >= win.t_lo * std::sqrt(10.0)))
      throw std::invalid_argument("fit window must span at least half a decade");
    std::vector<int> cols;
    for (int c = 0; c < nc; ++c) {
      const double T = avg.cesaro_T[static_cast<std::size_t>(c)];
      if (T >= win.t_lo * (1 - 1e-12) && T <= win.t_hi * (1 + 1e-12)) cols.push_back(c);
    }
    if (cols.size() < 8) throw std::invalid_argument("fit window holds fewer than 8 Cesaro points");

    WindowSlope ws;
    ws.window = win;
    ws.points = static_cast<int>(cols.size());
    std::vector<double> x, y;
    for (int c : cols) {
      const double mean = avg.mean_C[static_cast<std::size_t>(c)];
      if (!(mean > 0)) throw std::invalid_argument("nonpositive Cesaro average in fit window");
      x.push_back(logT[static_cast<std::size_t>(c)]);
      y.push_back(std::log(mean));
    }
    const OlsFit f = ols(x, y);
    ws.slope = f.slope;
    ws.intercept = f.intercept;
    ws.r2 = f.r2;

    auto& bs = boot_slopes[w];
    bs.reserve(resamples.size());
    for (const auto& rows : resamples) bs.push_back(window_slope(avg.per_realization_C, rows, logT, cols));
    ws.slope_se = sample_std(bs);
    fit.windows.push_back(ws);
  }

  fit.sigma_minus = fit.windows.front().slope;
  fit.sigma_plus = fit.windows.front().slope;
  for (const auto& ws : fit.windows) {
    fit.sigma_minus = std::min(fit.sigma_minus, ws.slope);
    fit.sigma_plus = std::max(fit.sigma_plus, ws.slope);
  }
  // Bootstrap the extremes jointly across windows.
  std::vector<double> boot_min, boot_max;
  for (std::size_t r = 0; r < boot_slopes.front().size(); ++r) {
    double mn = boot_slopes[0][r], mx = boot_slopes[0][r];
    for (const auto& bs : boot_slopes) {
      mn = std::min(mn, bs[r]);
      mx = std::max(mx, bs[r]);
    }
    boot_min.push_back(mn);
    boot_max.push_back(mx);
  }
  fit.sigma_minus_se = sample_std(boot_min);
  fit.sigma_plus_se = sample_std(boot_max);
  if (fit.sigma_minus > fit.sigma_plus) throw std::logic_error("slope extremes out of order");
  return fit;
}

DynlocStatistic dynloc_statistic(const AveragedTrace& avg, double ratio_threshold,
                                 double min_t_reach) {
  if (avg.cesaro_T.empty() || avg.cesaro_T.back() < min_t_reach)
    throw std::invalid_argument("Cesaro grid does not reach the required horizon");
  DynlocStatistic out;
  out.mean_sup = avg.mean_sup_C;
  out.se = avg.se_sup_C;
  out.ratio_threshold = ratio_threshold;
  const double t_hi = avg.cesaro_T.back();
  const double t_lo = t_hi / 10.0;
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  for (std::size_t c = 0; c < avg.cesaro_T.size(); ++c) {
    if (avg.cesaro_T[c] >= t_lo * (1 - 1e-12)) {
      lo = std::min(lo, avg.mean_C[c]);
      hi = std::max(hi, avg.mean_C[c]);
    }
  }
  out.stability_ratio = lo > 0 ? hi / lo : std::numeric_limits<double>::infinity();
  out.bounded_verdict = out.stability_ratio <= ratio_threshold;
  return out;
}

AbelTrend abel_trend(const std::vector<double>& eps_list, const Eigen::MatrixXd& per_realization,
                     int bootstrap_resamples, std::uint64_t bootstrap_seed) {
  if (eps_list.size() < 3) throw std::invalid_argument("abel trend needs >= 3 eps points");
  for (std::size_t i = 1; i < eps_list.size(); ++i)
    if (!(eps_list[i] < eps_list[i - 1]))
      throw std::invalid_argument("eps list must be strictly decreasing");
  if (per_realization.cols() != static_cast<int>(eps_list.size()))
    throw std::invalid_argument("value matrix does not match the eps list");

  AbelTrend out;
  std::vector<double> log_eps, log_mean;
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    std::vector<double> col(static_cast<std::size_t>(per_realization.rows()));
    for (int r = 0; r < per_realization.rows(); ++r) col[static_cast<std::size_t>(r)] = per_realization(r, static_cast<int>(i));
    const MeanSe ms = mean_se(col);
    out.points.push_back({eps_list[i], ms.mean, ms.se});
    if (!(ms.mean > 0)) throw std::invalid_argument("abel trend needs positive averages");
    log_eps.push_back(std::log(eps_list[i]));
    log_mean.push_back(std::log(ms.mean));
  }
  out.slope = ols(log_eps, log_mean).slope;

  const auto resamples = bootstrap_indices(static_cast<int>(per_realization.rows()),
                                           bootstrap_resamples, bootstrap_seed);
  std::vector<double> boot;
  boot.reserve(resamples.size());
  for (const auto& rows : resamples) {
    std::vector<double> lm;
    lm.reserve(eps_list.size());
    bool positive = true;
    for (std::size_t i = 0; i < eps_list.size() && positive; ++i) {
      double mean = 0;
      for (int r : rows) mean += per_realization(r, static_cast<int>(i));
      mean /= static_cast<double>(rows.size());
      positive = mean > 0;
      if (positive) lm.push_back(std::log(mean));
    }
    if (positive) boot.push_back(ols(log_eps, lm).slope);
  }
  out.slope_se = sample_std(boot);

  bool decreasing = true;
  for (std::size_t i = 1; i < out.points.size(); ++i)
    decreasing = decreasing && out.points[i].mean < out.points[i - 1].mean;
  out.vanishing_verdict = decreasing && out.slope - out.slope_se > 0;
  return out;
}

WegnerResult wegner_pair(const LatticeSpec& lattice, const DisorderSpec& disorder, double energy,
                         std::vector<double> eta_list, const Box& box1, const Box& box2,
                         int realizations, int min_gap, int workers) {
  if (eta_list.empty()) throw std::invalid_argument("empty eta list");
  for (std::size_t i = 1; i < eta_list.size(); ++i)
    if (!(eta_list[i] < eta_list[i - 1]))
      throw std::invalid_argument("eta list must be strictly decreasing");

  // Boxes must be disjoint with the configured gap of sites between them.
  double gap = std::numeric_limits<double>::infinity();
  for (int a = 0; a < lattice.dimension; ++a) {
    const double lo1 = box1.center[a] - box1.radius, hi1 = box1.center[a] + box1.radius;
    const double lo2 = box2.center[a] - box2.radius, hi2 = box2.center[a] + box2.radius;
    const double axis_gap = std::max(lo2 - hi1, lo1 - hi2) - 1.0;
    gap = std::min(gap, std::max(axis_gap, -1.0));
  }
  if (gap < min_gap)
    throw std::invalid_argument("boxes overlap or sit closer than the configured separation");

  const std::size_t ne = eta_list.size();
  Eigen::MatrixXd products(realizations, static_cast<int>(ne));
  std::vector<int> sites1(1), sites2(1);
  {
    const DisorderField probe = sample_field(disorder, lattice, 0);
    const LatticeOperator op = assemble(lattice, probe);
    sites1[0] = restrict_to_box(op, box1).dim();
    sites2[0] = restrict_to_box(op, box2).dim();
  }

  parallel_for_indexed(realizations, workers, [&](std::int64_t i) {
    const DisorderField field = sample_field(disorder, lattice, i);
    const LatticeOperator op = assemble(lattice, field);
    const LatticeOperator sub1 = restrict_to_box(op, box1);
    const LatticeOperator sub2 = restrict_to_box(op, box2);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es1(Eigen::MatrixXd(sub1.matrix),
                                                       Eigen::EigenvaluesOnly);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es2(Eigen::MatrixXd(sub2.matrix),
                                                       Eigen::EigenvaluesOnly);
    for (std::size_t e = 0; e < ne; ++e) {
      const double lo = energy - eta_list[e], hi = energy + eta_list[e];
      auto count = [&](const Eigen::VectorXd& ev) {
        int c = 0;
        for (int k = 0; k < ev.size(); ++k)
          if (ev[k] >= lo && ev[k] <= hi) ++c;
        return c;
      };
      products(static_cast<int>(i), static_cast<int>(e)) =
          static_cast<double>(count(es1.eigenvalues())) * count(es2.eigenvalues());
    }
  });

  WegnerResult out;
  out.energy = energy;
  out.eta = eta_list;
  out.box1_sites = sites1[0];
  out.box2_sites = sites2[0];
  const double volume = static_cast<double>(out.box1_sites) * out.box2_sites;
  std::vector<double> log_eta, log_est;
  for (std::size_t e = 0; e < ne; ++e) {
    std::vector<double> col(static_cast<std::size_t>(realizations));
    for (int r = 0; r < realizations; ++r) col[static_cast<std::size_t>(r)] = products(r, static_cast<int>(e));
    const MeanSe ms = mean_se(col);
    out.estimate.push_back(ms.mean);
    out.se.push_back(ms.se);
    out.bound_ratio.push_back(ms.mean / (eta_list[e] * eta_list[e] * volume));
    if (ms.mean > 0) {
      log_eta.push_back(std::log(eta_list[e]));
      log_est.push_back(std::log(ms.mean));
    }
  }
  // Monotone in eta per realization, hence for the averages.
  for (std::size_t e = 1; e < ne; ++e)
    if (out.estimate[e] > out.estimate[e - 1] + 1e-12)
      throw std::logic_error("pair statistic increased for a nested interval");
  if (log_eta.size() >= 2) out.fitted_power = ols(log_eta, log_est).slope;
  out.fitted_constant = *std::max_element(out.bound_ratio.begin(), out.bound_ratio.end());
  return out;
}

}  // namespace dynloc
