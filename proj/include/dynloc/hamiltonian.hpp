#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <optional>
#include <vector>

#include "dynloc/disorder.hpp"
#include "dynloc/lattice.hpp"

namespace dynloc {

// H = -Delta_d + V on the lattice window, in sparse symmetric form.
// The hopping convention is pure off-diagonal: every nearest-neighbor entry
// is exactly 1, the diagonal holds the on-site couplings (no 2d shift).
struct LatticeOperator {
  LatticeSpec lattice;
  std::vector<std::int64_t> sites;  // row -> global lattice site index, ascending
  Eigen::SparseMatrix<double> matrix;
  std::optional<Box> box;  // set when this is a Dirichlet restriction

  int dim() const { return static_cast<int>(matrix.rows()); }
  Site site_at_row(int row) const { return lattice.site_of(sites[static_cast<std::size_t>(row)]); }
  int row_of_site(const Site& s) const;  // -1 if absent

  // Per-row observable weights.
  Eigen::VectorXd second_moment_weights() const;  // |x|^2
  Eigen::VectorXd axis_values(int axis) const;    // x_axis
};

LatticeOperator assemble(const LatticeSpec& lattice, const DisorderField& field);

// Principal submatrix on the box sites (crossing bonds deleted).
LatticeOperator restrict_to_box(const LatticeOperator& op, const Box& box);

double gershgorin_bound(const LatticeOperator& op);

// Exact operator norm of [H, X_axis] on the operator's site window. The
// commutator only sees the axis hops, so it reduces to the path-graph value
// 2 cos(pi/(n+1)) with n the number of distinct axis coordinates.
double commutator_norm_bound(const LatticeOperator& op, int axis);

// Same norm measured from the assembled commutator matrix (dense Hermitian
// eigensolve; intended for moderate dimensions).
double commutator_matrix_norm(const LatticeOperator& op, int axis);

// Operator norm of the axis hop commutator on the infinite lattice, obtained
// by maximizing its symbol numerically.
double commutator_symbol_norm();

struct SpectralDecomposition {
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXd eigenvectors;  // columns, orthonormal
  double max_residual = 0;       // max_k |H v_k - theta_k v_k|
  double gram_deviation = 0;     // max |V^T V - I|
};

// Dense symmetric eigendecomposition; throws above the cap with a pointer to
// the polynomial propagator path.
SpectralDecomposition diagonalize(const LatticeOperator& op, int cap = 4096);

// Smooth compactly supported energy filter on I = [lo, hi]: identically 1 on
// the plateau [lo+margin, hi-margin], identically 0 outside I, C-infinity.
struct FilterSpec {
  double lo = -1.0;
  double hi = 1.0;
  double margin = 0.25;

  void validate() const;
  double value(double energy) const;
};

// f(H) psi as an exact eigen-expansion.
Eigen::VectorXcd apply_filter(const FilterSpec& spec, const SpectralDecomposition& decomp,
                              const Eigen::VectorXcd& psi);

// Unit vector concentrated at one site of the operator's window.
Eigen::VectorXcd delta_state(const LatticeOperator& op, const Site& site);

}  // namespace dynloc
