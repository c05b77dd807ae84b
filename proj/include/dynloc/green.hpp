#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <memory>
#include <vector>

#include "dynloc/hamiltonian.hpp"
#include "dynloc/quadrature.hpp"

namespace dynloc {

using Complex = std::complex<double>;

// Direct solver for (H - z) x = rhs at varying shifts z. d=1 windows are
// tridiagonal and solved in O(n) with a residual-checked elimination; anything
// else (or a failed elimination) goes through sparse LU.
class ShiftedSolver {
 public:
  explicit ShiftedSolver(const LatticeOperator& op);
  Eigen::VectorXcd solve(Complex z, const Eigen::VectorXcd& rhs, double* residual = nullptr) const;

 private:
  const LatticeOperator& op_;
  bool tridiagonal_ = false;
  Eigen::VectorXd diag_;
  Eigen::SparseMatrix<Complex> pattern_;  // H as complex, shift applied per solve
  double residual_norm(Complex z, const Eigen::VectorXcd& x, const Eigen::VectorXcd& rhs) const;
};

// Column (H - E - i eps)^{-1} delta_q. Residual <= 1e-10 is enforced.
Eigen::VectorXcd resolve(const LatticeOperator& op, const Site& q, double energy, double eps,
                         double* residual = nullptr);

// A resolvent-element request: G(target, source; E + i eps), optionally on a
// Dirichlet box restriction.
struct GreenQuery {
  double energy = 0;
  double eps = 0;  // must be nonzero
  Site source{0, 0, 0};
  Site target{0, 0, 0};
  std::optional<Box> box;

  void validate() const;
};

Complex green_element(const LatticeOperator& op, const GreenQuery& query);

// Absolute residual of the lattice geometric resolvent identity relating the
// full Green element G(q', q; z), the Dirichlet box resolvent on the box
// around q', and the bonds crossing the box face. Exact in exact arithmetic.
// `drop_pairs` removes trailing boundary pairs (negative-control hook).
double gre_identity_residual(const LatticeOperator& op, const Box& box, const Site& q,
                             double energy, double eps, int drop_pairs = 0);

struct EpsProbeGrid {
  double eps_min = 1e-6;
  int points = 13;  // geometric in [eps_min, 1]
  std::vector<double> values() const;
};

struct RegularityVerdict {
  double energy = 0;
  double box_radius = 0;
  Site center{0, 0, 0};
  double measured_norm = 0;   // sup over the probe grid of |1_q D_{L,q}(E+i eps)|
  double eps_at_max = 0;
  double threshold = 0;       // rho(L)^{1/2}
  double guard_distance = 0;  // dist(E, spec(H_box))
  bool guard_ok = false;
  bool pass = false;
};

// Reusable per-box state: Dirichlet restriction, its spectrum (for the
// eigenvalue-proximity guard) and the boundary pair bookkeeping.
class BoxRegularityTester {
 public:
  BoxRegularityTester(const LatticeOperator& op, const Box& box);
  // Norm of the boundary-coupling operator row at the box center, maximized
  // over the eps probe grid. E at distance < eps_min from the box spectrum is
  // auto-failed (the true sup over eps != 0 diverges there).
  RegularityVerdict test(double energy, double norm_threshold, const EpsProbeGrid& grid) const;
  double boundary_norm(double energy, double eps) const;
  double spectrum_distance(double energy) const;
  const LatticeOperator& restricted() const { return sub_; }

 private:
  Box box_;
  LatticeOperator sub_;
  std::unique_ptr<ShiftedSolver> solver_;
  Eigen::VectorXd box_eigenvalues_;
  int center_row_ = -1;
  // Interior rows adjacent to each exterior boundary site, grouped.
  std::vector<std::vector<int>> exterior_groups_;
};

RegularityVerdict regularity_test(const LatticeOperator& op, const Box& box, double energy,
                                  double norm_threshold, const EpsProbeGrid& grid);

struct AllEnergyVerdict {
  bool pass = false;
  double worst_energy = 0;
  double worst_margin = 0;  // max over grid of measured/threshold
  std::vector<RegularityVerdict> per_energy;
};

// Conjunction of regularity over an energy grid; spacing must not exceed
// eps_min/4 so the between-grid excursion stays controlled.
AllEnergyVerdict variable_energy_regularity(const LatticeOperator& op, const Box& box,
                                            std::vector<double> energies, double norm_threshold,
                                            const EpsProbeGrid& grid);

// Gershgorin hull of the spectrum.
std::pair<double, double> spectral_hull(const LatticeOperator& op);

// Integral over [e_lo, e_hi] of sum_x w_x |( (H - E - i eps)^{-1} psi )(x)|^2
// by trapezoid at the given spacing, with a refinement error estimate.
QuadratureEstimate weighted_resolvent_energy_integral(const LatticeOperator& op,
                                                      const Eigen::VectorXcd& psi,
                                                      const Eigen::VectorXd& weights, double e_lo,
                                                      double e_hi, double eps, double spacing);

struct ResiduumResult {
  double integral = 0;
  double bound = 0;  // pi / |eps|
  double quadrature_tolerance = 0;
  bool pass = false;
};

// Energy integral of the squared resolvent against a normalized state,
// checked against its universal pi/eps bound.
ResiduumResult residuum_check(const LatticeOperator& op, const Eigen::VectorXcd& psi, double e_lo,
                              double e_hi, double eps);

struct AbelResult {
  double eps = 0;
  double value = 0;            // eps^2 * integral
  double companion_value = 0;  // eps * integral
  double refinement_error = 0; // on the eps^2-scaled value
  int points = 0;
};

// Abel-regularized weighted resolvent functional on an explicit energy grid
// [e_lo, e_hi] with the given spacing (<= eps/4 enforced).
AbelResult abel_functional(const LatticeOperator& op, const Eigen::VectorXcd& psi, double eps,
                           double e_lo, double e_hi, double spacing);

// Default grid span for the Abel functional: spectrum +- 10/eps.
std::pair<double, double> abel_default_range(const LatticeOperator& op, double eps);

}  // namespace dynloc
