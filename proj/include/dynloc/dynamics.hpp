#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "dynloc/hamiltonian.hpp"

namespace dynloc {

// Uniform time grid t_j = j * step, j = 0..count-1.
struct TimeGrid {
  double step = 0.05;
  int count = 0;

  static TimeGrid uniform(double t_max, double step);
  double t(int j) const { return step * j; }
  double t_max() const { return step * (count - 1); }
  bool operator==(const TimeGrid&) const = default;
};

// e^{-itH} psi as an exact eigen-expansion; norm preserved to 1e-10.
Eigen::VectorXcd evolve(const SpectralDecomposition& decomp, const Eigen::VectorXcd& psi0,
                        double t);

struct TraceOptions {
  double leak_threshold = 1e-8;
  double leak_margin = 2.0;  // safe radius = half extent - margin
};

struct DynamicsTrace {
  std::int64_t realization = 0;
  std::string initial_state;
  TimeGrid grid;
  std::vector<double> m;  // second moments along the grid
  double psi_norm = 0;
  double max_leak = 0;
  std::vector<double> cesaro_T;    // snapped to grid times
  std::vector<double> cesaro_C;
  std::vector<double> cesaro_err;  // quadrature refinement estimates
};

// Second moments of position along the grid. Fails loudly, naming the
// largest safe horizon, if probability mass beyond the safe radius exceeds
// the leak threshold (the finite window no longer emulates the full lattice).
DynamicsTrace second_moment_trace(const LatticeOperator& op, const SpectralDecomposition& decomp,
                                  const Eigen::VectorXcd& psi0, const TimeGrid& grid,
                                  const TraceOptions& opts = {});

// Geometric set of times between lo and hi.
std::vector<double> geometric_times(double lo, double hi, int per_decade);

// Fills the Cesaro means C(T) = (1/T) * integral of m over [0,T] at the
// target times (snapped to the trace grid) by composite Simpson.
void fill_cesaro(DynamicsTrace& trace, const std::vector<double>& targets);

struct BallisticReport {
  std::vector<double> times;
  // slack[j][axis] = bound - measured displacement norm at times[j]
  std::vector<std::vector<double>> slack;
  std::vector<double> commutator_norms;  // per axis, used in the bound
  double min_slack = 0;
  bool pass = false;  // min_slack >= -1e-10 (reported, never thrown)
};

// Checks |X_a e^{-itH} psi| <= |X_a psi| + t * |[H,X_a]| * |psi| per axis on
// the grid, using the window's exact commutator norm.
BallisticReport ballistic_bound_check(const LatticeOperator& op,
                                      const SpectralDecomposition& decomp,
                                      const Eigen::VectorXcd& psi0, const TimeGrid& grid);

struct AveragedTrace {
  int realizations = 0;
  std::string initial_state;
  TimeGrid grid;
  std::vector<double> mean_m, se_m;
  std::vector<double> cesaro_T;
  std::vector<double> mean_C, se_C;
  Eigen::MatrixXd per_realization_C;  // rows = realizations (kept for bootstrap)
  double mean_sup_C = 0;              // sup over sampled T taken per realization first
  double se_sup_C = 0;
};

// Pointwise disorder averages with standard errors; the sup over the sampled
// Cesaro grid is taken per realization before averaging.
AveragedTrace disorder_average(const std::vector<DynamicsTrace>& traces);

struct TimeAverageAbelReport {
  double eps = 0;            // 1/T
  double time_average = 0;   // (1/T) integral of m over [0, T]
  double energy_bound = 0;   // (e*eps/2pi) * energy integral of |X| R psi
  double lhs_error = 0;
  double rhs_error = 0;
  bool pass = false;
};

// Laplace-transform domination of the finite time average by the resolvent
// energy integral at eps = 1/T, both sides by quadrature.
TimeAverageAbelReport time_average_abel_check(const LatticeOperator& op,
                                              const SpectralDecomposition& decomp,
                                              const Eigen::VectorXcd& psi, double T, double t_step,
                                              double rel_tol = 1e-3,
                                              const TraceOptions& opts = {});

struct EnvelopeCheck {
  double offset = 0;      // fitted constant part
  double gain = 0;        // fitted nonnegative coefficient on the energy term
  double worst_excess = 0;
  bool pass = false;
};

// Fits C(T) <= offset + gain * A(T) as an exact envelope on the first half of
// the T grid and checks the second half within tol_rel of the C scale.
EnvelopeCheck cesaro_envelope_check(const std::vector<double>& T, const std::vector<double>& C,
                                    const std::vector<double>& A, double tol_rel = 0.1);

}  // namespace dynloc
