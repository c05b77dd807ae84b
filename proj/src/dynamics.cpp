#include "dynloc/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dynloc/green.hpp"
#include "dynloc/quadrature.hpp"
#include "dynloc/stats.hpp"

namespace dynloc {

namespace {
constexpr double kPi = 3.14159265358979323846;

// Weighted norms of evolved states over the whole grid, blocked so the dense
// phase matrix stays small: out(j, w) = sum_x weights[w](x) |psi_t_j(x)|^2.
// leak(j) collects mass outside the safe radius when a mask is given.
void evolved_weighted_norms(const SpectralDecomposition& decomp, const Eigen::VectorXcd& psi0,
                            const TimeGrid& grid, const std::vector<Eigen::VectorXd>& weights,
                            const Eigen::VectorXd* leak_mask, Eigen::MatrixXd& out,
                            Eigen::VectorXd* leak) {
  const int n = static_cast<int>(decomp.eigenvalues.size());
  const auto nw = static_cast<int>(weights.size());
  out.resize(grid.count, nw);
  if (leak) leak->resize(grid.count);

  const Eigen::VectorXcd coeff = decomp.eigenvectors.transpose() * psi0;
  const int block = std::max(1, std::min(grid.count, (1 << 19) / std::max(n, 1)));

  Eigen::MatrixXd cr(n, block), ci(n, block);
  for (int j0 = 0; j0 < grid.count; j0 += block) {
    const int nb = std::min(block, grid.count - j0);
    for (int b = 0; b < nb; ++b) {
      const double t = grid.t(j0 + b);
      for (int k = 0; k < n; ++k) {
        const double phase = -decomp.eigenvalues[k] * t;
        const std::complex<double> v =
            coeff[k] * std::complex<double>(std::cos(phase), std::sin(phase));
        cr(k, b) = v.real();
        ci(k, b) = v.imag();
      }
    }
    const Eigen::MatrixXd pr = decomp.eigenvectors * cr.leftCols(nb);
    const Eigen::MatrixXd pi = decomp.eigenvectors * ci.leftCols(nb);
    const double target = psi0.squaredNorm();
    for (int b = 0; b < nb; ++b) {
      const Eigen::ArrayXd dens = pr.col(b).array().square() + pi.col(b).array().square();
      if (std::abs(dens.sum() - target) > 1e-10 * std::max(1.0, target))
        throw std::runtime_error("evolution lost unitarity beyond 1e-10 along the grid");
      for (int w = 0; w < nw; ++w) out(j0 + b, w) = (dens * weights[static_cast<std::size_t>(w)].array()).sum();
      if (leak) (*leak)[j0 + b] = (dens * leak_mask->array()).sum();
    }
  }
}

}  // namespace

TimeGrid TimeGrid::uniform(double t_max, double step) {
  if (step <= 0 || t_max < 0) throw std::invalid_argument("bad time grid");
  TimeGrid g;
  g.step = step;
  g.count = static_cast<int>(std::round(t_max / step)) + 1;
  return g;
}

Eigen::VectorXcd evolve(const SpectralDecomposition& decomp, const Eigen::VectorXcd& psi0,
                        double t) {
  Eigen::VectorXcd coeff = decomp.eigenvectors.transpose() * psi0;
  for (int k = 0; k < coeff.size(); ++k) {
    const double phase = -decomp.eigenvalues[k] * t;
    coeff[k] *= std::complex<double>(std::cos(phase), std::sin(phase));
  }
  Eigen::VectorXcd out = decomp.eigenvectors * coeff;
  if (std::abs(out.norm() - psi0.norm()) > 1e-10 * std::max(1.0, psi0.norm()))
    throw std::runtime_error("evolution lost unitarity beyond 1e-10");
  return out;
}

DynamicsTrace second_moment_trace(const LatticeOperator& op, const SpectralDecomposition& decomp,
                                  const Eigen::VectorXcd& psi0, const TimeGrid& grid,
                                  const TraceOptions& opts) {
  if (grid.count < 1) throw std::invalid_argument("empty time grid");
  DynamicsTrace tr;
  tr.grid = grid;
  tr.psi_norm = psi0.norm();

  const Eigen::VectorXd w2 = op.second_moment_weights();
  const double safe_radius = op.lattice.half() - opts.leak_margin;
  Eigen::VectorXd mask(op.dim());
  for (int r = 0; r < op.dim(); ++r) {
    const Site s = op.site_at_row(r);
    double linf = 0;
    for (int a = 0; a < op.lattice.dimension; ++a) linf = std::max(linf, std::abs(static_cast<double>(s[a])));
    mask[r] = linf > safe_radius ? 1.0 : 0.0;
  }

  Eigen::MatrixXd vals;
  Eigen::VectorXd leak;
  evolved_weighted_norms(decomp, psi0, grid, {w2}, &mask, vals, &leak);

  tr.m.resize(static_cast<std::size_t>(grid.count));
  for (int j = 0; j < grid.count; ++j) {
    tr.m[static_cast<std::size_t>(j)] = vals(j, 0);
    if (leak[j] > opts.leak_threshold) {
      const double safe_tmax = j > 0 ? grid.t(j - 1) : 0.0;
      throw std::runtime_error(
          "boundary leak " + std::to_string(leak[j]) + " above threshold at t=" +
          std::to_string(grid.t(j)) + "; largest safe T_max on this window is " +
          std::to_string(safe_tmax));
    }
    tr.max_leak = std::max(tr.max_leak, leak[j]);
  }

  // m(0) must equal | |X| psi0 |^2; the ballistic ceiling holds throughout.
  const double m0_direct = (psi0.cwiseAbs2().array() * w2.array()).sum();
  if (std::abs(tr.m[0] - m0_direct) > 1e-9 * std::max(1.0, m0_direct))
    throw std::runtime_error("trace start disagrees with direct second moment");
  const double d = op.lattice.dimension;
  for (int j = 0; j < grid.count; ++j) {
    const double ceiling = std::sqrt(m0_direct) + grid.t(j) * 2.0 * d * tr.psi_norm;
    if (tr.m[static_cast<std::size_t>(j)] > ceiling * ceiling * (1.0 + 1e-12) + 1e-12)
      throw std::runtime_error("second moment exceeded the ballistic ceiling");
  }
  return tr;
}

std::vector<double> geometric_times(double lo, double hi, int per_decade) {
  if (lo <= 0 || hi < lo || per_decade < 1) throw std::invalid_argument("bad geometric grid");
  std::vector<double> t;
  const double ratio = std::pow(10.0, 1.0 / per_decade);
  for (double v = lo; v <= hi * (1 + 1e-12); v *= ratio) t.push_back(std::min(v, hi));
  if (t.back() < hi * (1 - 1e-12)) t.push_back(hi);
  return t;
}

void fill_cesaro(DynamicsTrace& trace, const std::vector<double>& targets) {
  trace.cesaro_T.clear();
  trace.cesaro_C.clear();
  trace.cesaro_err.clear();
  int prev_idx = 0;
  for (double target : targets) {
    if (target < trace.grid.step / 2 || target > trace.grid.t_max() * (1 + 1e-12))
      throw std::invalid_argument("cesaro target time outside the trace range");
    int idx = static_cast<int>(std::round(target / trace.grid.step));
    idx = std::clamp(idx, 1, trace.grid.count - 1);
    if (idx <= prev_idx && !trace.cesaro_T.empty()) continue;  // snapped duplicate
    prev_idx = idx;
    const double T = trace.grid.t(idx);
    const QuadratureEstimate q = simpson_with_error(trace.m, trace.grid.step, idx);
    const double c = q.value / T;

    double lo = trace.m[0], hi = trace.m[0];
    for (int j = 0; j <= idx; ++j) {
      lo = std::min(lo, trace.m[static_cast<std::size_t>(j)]);
      hi = std::max(hi, trace.m[static_cast<std::size_t>(j)]);
    }
    if (c < lo - 1e-9 * (1 + hi) || c > hi + 1e-9 * (1 + hi))
      throw std::runtime_error("cesaro mean left the min/max envelope of the trace");

    trace.cesaro_T.push_back(T);
    trace.cesaro_C.push_back(c);
    trace.cesaro_err.push_back(q.refinement_error / T);
  }
}

BallisticReport ballistic_bound_check(const LatticeOperator& op,
                                      const SpectralDecomposition& decomp,
                                      const Eigen::VectorXcd& psi0, const TimeGrid& grid) {
  const int d = op.lattice.dimension;
  std::vector<Eigen::VectorXd> weights;
  for (int a = 0; a < d; ++a) {
    Eigen::VectorXd xa = op.axis_values(a);
    weights.push_back(xa.cwiseProduct(xa));
  }
  Eigen::MatrixXd vals;
  evolved_weighted_norms(decomp, psi0, grid, weights, nullptr, vals, nullptr);

  BallisticReport rep;
  rep.min_slack = std::numeric_limits<double>::infinity();
  const double nrm = psi0.norm();
  std::vector<double> base(static_cast<std::size_t>(d));
  for (int a = 0; a < d; ++a) {
    base[static_cast<std::size_t>(a)] =
        std::sqrt((psi0.cwiseAbs2().array() * weights[static_cast<std::size_t>(a)].array()).sum());
    rep.commutator_norms.push_back(commutator_norm_bound(op, a));
  }
  for (int j = 0; j < grid.count; ++j) {
    rep.times.push_back(grid.t(j));
    std::vector<double> row(static_cast<std::size_t>(d));
    for (int a = 0; a < d; ++a) {
      const double lhs = std::sqrt(vals(j, a));
      const double bound =
          base[static_cast<std::size_t>(a)] + grid.t(j) * rep.commutator_norms[static_cast<std::size_t>(a)] * nrm;
      row[static_cast<std::size_t>(a)] = bound - lhs;
      rep.min_slack = std::min(rep.min_slack, row[static_cast<std::size_t>(a)]);
    }
    rep.slack.push_back(std::move(row));
  }
  rep.pass = rep.min_slack >= -1e-10;
  return rep;
}

AveragedTrace disorder_average(const std::vector<DynamicsTrace>& traces) {
  if (traces.empty()) throw std::invalid_argument("no traces to average");
  const auto& first = traces.front();
  for (const auto& tr : traces) {
    if (!(tr.grid == first.grid) || tr.cesaro_T != first.cesaro_T ||
        tr.initial_state != first.initial_state)
      throw std::invalid_argument("traces disagree on grids or initial-state descriptor");
  }
  AveragedTrace avg;
  avg.realizations = static_cast<int>(traces.size());
  avg.initial_state = first.initial_state;
  avg.grid = first.grid;
  avg.cesaro_T = first.cesaro_T;

  const std::size_t nt = first.m.size();
  const std::size_t nc = first.cesaro_T.size();
  avg.mean_m.resize(nt);
  avg.se_m.resize(nt);
  avg.mean_C.resize(nc);
  avg.se_C.resize(nc);
  avg.per_realization_C.resize(static_cast<int>(traces.size()), static_cast<int>(nc));

  std::vector<double> col(traces.size());
  for (std::size_t j = 0; j < nt; ++j) {
    for (std::size_t r = 0; r < traces.size(); ++r) col[r] = traces[r].m[j];
    const MeanSe ms = mean_se(col);
    avg.mean_m[j] = ms.mean;
    avg.se_m[j] = ms.se;
    double lo = col[0], hi = col[0];
    for (double v : col) { lo = std::min(lo, v); hi = std::max(hi, v); }
    if (ms.mean < lo - 1e-12 || ms.mean > hi + 1e-12)
      throw std::runtime_error("average left the per-realization envelope");
  }
  std::vector<double> sups(traces.size());
  for (std::size_t r = 0; r < traces.size(); ++r) {
    double s = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < nc; ++j) {
      avg.per_realization_C(static_cast<int>(r), static_cast<int>(j)) = traces[r].cesaro_C[j];
      s = std::max(s, traces[r].cesaro_C[j]);
    }
    sups[r] = s;
  }
  for (std::size_t j = 0; j < nc; ++j) {
    for (std::size_t r = 0; r < traces.size(); ++r) col[r] = traces[r].cesaro_C[j];
    const MeanSe ms = mean_se(col);
    avg.mean_C[j] = ms.mean;
    avg.se_C[j] = ms.se;
  }
  if (nc > 0) {
    const MeanSe ms = mean_se(sups);
    avg.mean_sup_C = ms.mean;
    avg.se_sup_C = ms.se;
  }
  return avg;
}

TimeAverageAbelReport time_average_abel_check(const LatticeOperator& op,
                                              const SpectralDecomposition& decomp,
                                              const Eigen::VectorXcd& psi, double T, double t_step,
                                              double rel_tol, const TraceOptions& opts) {
  if (T <= 0) throw std::invalid_argument("T must be positive");
  TimeAverageAbelReport rep;
  rep.eps = 1.0 / T;

  const TimeGrid grid = TimeGrid::uniform(T, t_step);
  const DynamicsTrace tr = second_moment_trace(op, decomp, psi, grid, opts);
  const QuadratureEstimate lhs = simpson_with_error(tr.m, grid.step, grid.count - 1);
  rep.time_average = lhs.value / grid.t_max();
  rep.lhs_error = lhs.refinement_error / grid.t_max();

  // Truncating the energy range only shrinks the right-hand side, so the
  // comparison stays conservative.
  const auto hull = spectral_hull(op);
  const double pad = 2.0 + 8.0 * rep.eps;
  const QuadratureEstimate rhs = weighted_resolvent_energy_integral(
      op, psi, op.second_moment_weights(), hull.first - pad, hull.second + pad, -rep.eps / 2,
      rep.eps / 4);
  const double scale = std::exp(1.0) * rep.eps / (2.0 * kPi);
  rep.energy_bound = scale * rhs.value;
  rep.rhs_error = scale * rhs.refinement_error;
  rep.pass = rep.time_average <= rep.energy_bound * (1.0 + rel_tol) + rep.lhs_error + rep.rhs_error;
  return rep;
}

EnvelopeCheck cesaro_envelope_check(const std::vector<double>& T, const std::vector<double>& C,
                                    const std::vector<double>& A, double tol_rel) {
  if (T.size() != C.size() || T.size() != A.size() || T.size() < 6)
    throw std::invalid_argument("envelope check needs >= 6 aligned points");
  const std::size_t half = T.size() / 2;
  EnvelopeCheck out;
  const OlsFit fit = ols(std::span(A).subspan(0, half), std::span(C).subspan(0, half));
  out.gain = std::max(fit.slope, 0.0);
  out.offset = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < half; ++i) out.offset = std::max(out.offset, C[i] - out.gain * A[i]);
  double scale = 0;
  for (double c : C) scale = std::max(scale, std::abs(c));
  out.worst_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t i = half; i < T.size(); ++i)
    out.worst_excess = std::max(out.worst_excess, C[i] - out.gain * A[i] - out.offset);
  out.pass = out.worst_excess <= tol_rel * scale;
  return out;
}

}  // namespace dynloc
