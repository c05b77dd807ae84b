#include "dynloc/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace dynloc {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

int LatticeOperator::row_of_site(const Site& s) const {
  if (!lattice.contains(s)) return -1;
  const std::int64_t idx = lattice.index_of(s);
  auto it = std::lower_bound(sites.begin(), sites.end(), idx);
  if (it == sites.end() || *it != idx) return -1;
  return static_cast<int>(it - sites.begin());
}

Eigen::VectorXd LatticeOperator::second_moment_weights() const {
  Eigen::VectorXd w(dim());
  for (int r = 0; r < dim(); ++r) {
    const Site s = site_at_row(r);
    double v = 0;
    for (int a = 0; a < lattice.dimension; ++a) v += static_cast<double>(s[a]) * s[a];
    w[r] = v;
  }
  return w;
}

Eigen::VectorXd LatticeOperator::axis_values(int axis) const {
  if (axis < 0 || axis >= lattice.dimension) throw std::invalid_argument("axis out of range");
  Eigen::VectorXd w(dim());
  for (int r = 0; r < dim(); ++r) w[r] = site_at_row(r)[axis];
  return w;
}

LatticeOperator assemble(const LatticeSpec& lattice, const DisorderField& field) {
  if (static_cast<std::int64_t>(field.values.size()) != lattice.site_count())
    throw std::invalid_argument("disorder field size does not match lattice site count");
  LatticeOperator op;
  op.lattice = lattice;
  const std::int64_t n = lattice.site_count();
  op.sites.resize(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) op.sites[static_cast<std::size_t>(i)] = i;

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(n) * (2 * lattice.dimension + 1));
  for (std::int64_t i = 0; i < n; ++i) {
    const Site s = lattice.site_of(i);
    trip.emplace_back(static_cast<int>(i), static_cast<int>(i),
                      field.values[static_cast<std::size_t>(i)]);
    for (int a = 0; a < lattice.dimension; ++a)
      for (int dir : {-1, +1}) {
        Site nb = s;
        nb[a] += dir;
        if (lattice.contains(nb))
          trip.emplace_back(static_cast<int>(i), static_cast<int>(lattice.index_of(nb)), 1.0);
      }
  }
  op.matrix.resize(static_cast<int>(n), static_cast<int>(n));
  op.matrix.setFromTriplets(trip.begin(), trip.end());
  op.matrix.makeCompressed();
  return op;
}

LatticeOperator restrict_to_box(const LatticeOperator& op, const Box& box) {
  std::vector<int> rows;
  for (int r = 0; r < op.dim(); ++r)
    if (box.contains(op.site_at_row(r), op.lattice.dimension)) rows.push_back(r);
  if (rows.empty()) throw std::invalid_argument("box restriction selects no sites");

  LatticeOperator sub;
  sub.lattice = op.lattice;
  sub.box = box;
  sub.sites.reserve(rows.size());
  for (int r : rows) sub.sites.push_back(op.sites[static_cast<std::size_t>(r)]);

  std::vector<int> to_sub(static_cast<std::size_t>(op.dim()), -1);
  for (std::size_t k = 0; k < rows.size(); ++k) to_sub[static_cast<std::size_t>(rows[k])] = static_cast<int>(k);

  std::vector<Eigen::Triplet<double>> trip;
  for (int col = 0; col < op.matrix.outerSize(); ++col) {
    const int sc = to_sub[static_cast<std::size_t>(col)];
    if (sc < 0) continue;
    for (Eigen::SparseMatrix<double>::InnerIterator it(op.matrix, col); it; ++it) {
      const int sr = to_sub[static_cast<std::size_t>(it.row())];
      if (sr >= 0) trip.emplace_back(sr, sc, it.value());
    }
  }
  sub.matrix.resize(static_cast<int>(rows.size()), static_cast<int>(rows.size()));
  sub.matrix.setFromTriplets(trip.begin(), trip.end());
  sub.matrix.makeCompressed();
  return sub;
}

double gershgorin_bound(const LatticeOperator& op) {
  double bound = 0;
  for (int col = 0; col < op.matrix.outerSize(); ++col) {
    double center = 0, radius = 0;
    for (Eigen::SparseMatrix<double>::InnerIterator it(op.matrix, col); it; ++it) {
      if (it.row() == it.col()) center = it.value();
      else radius += std::abs(it.value());
    }
    bound = std::max(bound, std::abs(center) + radius);
  }
  return bound;
}

double commutator_norm_bound(const LatticeOperator& op, int axis) {
  if (axis < 0 || axis >= op.lattice.dimension) throw std::invalid_argument("axis out of range");
  std::vector<int> coords;
  coords.reserve(op.sites.size());
  for (int r = 0; r < op.dim(); ++r) coords.push_back(op.site_at_row(r)[axis]);
  std::sort(coords.begin(), coords.end());
  coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
  const auto n = static_cast<double>(coords.size());
  return 2.0 * std::cos(kPi / (n + 1.0));
}

double commutator_matrix_norm(const LatticeOperator& op, int axis) {
  const int n = op.dim();
  if (n > 2048) throw std::invalid_argument("commutator matrix norm capped at dimension 2048");
  const Eigen::VectorXd x = op.axis_values(axis);
  // i[H, X_axis] is Hermitian: entries i * H(u,v) * (x_v - x_u).
  Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(n, n);
  for (int col = 0; col < op.matrix.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(op.matrix, col); it; ++it) {
      if (it.row() == it.col()) continue;
      c(it.row(), it.col()) =
          std::complex<double>(0.0, it.value() * (x[it.col()] - x[it.row()]));
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(c, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return std::max(std::abs(ev[0]), std::abs(ev[n - 1]));
}

double commutator_symbol_norm() {
  // Symbol of the axis hop commutator is 2 sin(k); golden-section maximum.
  auto f = [](double k) { return 2.0 * std::abs(std::sin(k)); };
  double a = 0.0, b = kPi;
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  for (int it = 0; it < 200; ++it) {
    if (f(c) > f(d)) b = d;
    else a = c;
    c = b - gr * (b - a);
    d = a + gr * (b - a);
  }
  return f(0.5 * (a + b));
}

SpectralDecomposition diagonalize(const LatticeOperator& op, int cap) {
  if (op.dim() > cap)
    throw std::invalid_argument(
        "operator dimension " + std::to_string(op.dim()) + " exceeds the dense cap " +
        std::to_string(cap) + "; use the polynomial propagator path for matrices this large");
  const Eigen::MatrixXd dense = Eigen::MatrixXd(op.matrix);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");

  SpectralDecomposition d;
  d.eigenvalues = es.eigenvalues();
  d.eigenvectors = es.eigenvectors();
  const Eigen::MatrixXd resid = dense * d.eigenvectors - d.eigenvectors * d.eigenvalues.asDiagonal();
  d.max_residual = resid.colwise().norm().maxCoeff();
  Eigen::MatrixXd gram = d.eigenvectors.transpose() * d.eigenvectors;
  gram.diagonal().array() -= 1.0;
  d.gram_deviation = gram.cwiseAbs().maxCoeff();

  const double scale = std::max(gershgorin_bound(op), 1.0);
  if (d.max_residual > 1e-10 * scale)
    throw std::runtime_error("eigendecomposition residual above tolerance");
  if (d.gram_deviation > 1e-10)
    throw std::runtime_error("eigenvector Gram deviation above tolerance");
  return d;
}

void FilterSpec::validate() const {
  if (!(hi > lo)) throw std::invalid_argument("filter interval is empty");
  if (!(margin > 0) || 2 * margin >= hi - lo)
    throw std::invalid_argument("filter margin must be positive and leave a plateau");
}

namespace {
// s(u) = g(u)/(g(u)+g(1-u)) with g(u) = exp(-1/u): 0 for u<=0, 1 for u>=1.
double smooth_step(double u) {
  if (u <= 0) return 0.0;
  if (u >= 1) return 1.0;
  const double g = std::exp(-1.0 / u);
  const double h = std::exp(-1.0 / (1.0 - u));
  return g / (g + h);
}
}  // namespace

double FilterSpec::value(double energy) const {
  if (energy <= lo || energy >= hi) return 0.0;
  return smooth_step((energy - lo) / margin) * smooth_step((hi - energy) / margin);
}

Eigen::VectorXcd apply_filter(const FilterSpec& spec, const SpectralDecomposition& decomp,
                              const Eigen::VectorXcd& psi) {
  spec.validate();
  Eigen::VectorXcd coeff = decomp.eigenvectors.transpose() * psi;
  for (int k = 0; k < coeff.size(); ++k) coeff[k] *= spec.value(decomp.eigenvalues[k]);
  return decomp.eigenvectors * coeff;
}

Eigen::VectorXcd delta_state(const LatticeOperator& op, const Site& site) {
  const int row = op.row_of_site(site);
  if (row < 0) throw std::invalid_argument("site not present in operator window");
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(op.dim());
  psi[row] = 1.0;
  return psi;
}

}  // namespace dynloc
