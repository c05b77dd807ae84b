#include "dynloc/green.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace dynloc {

namespace {
constexpr double kPi = 3.14159265358979323846;

Eigen::VectorXcd apply_real_sparse(const Eigen::SparseMatrix<double>& a,
                                   const Eigen::VectorXcd& x) {
  Eigen::VectorXd re = a * x.real();
  Eigen::VectorXd im = a * x.imag();
  Eigen::VectorXcd y(re.size());
  y.real() = re;
  y.imag() = im;
  return y;
}

bool is_contiguous_chain(const LatticeOperator& op) {
  if (op.lattice.dimension != 1) return false;
  for (std::size_t i = 1; i < op.sites.size(); ++i)
    if (op.sites[i] != op.sites[i - 1] + 1) return false;
  return true;
}

}  // namespace

ShiftedSolver::ShiftedSolver(const LatticeOperator& op) : op_(op) {
  tridiagonal_ = is_contiguous_chain(op);
  diag_ = Eigen::VectorXd(op.matrix.diagonal());
  if (!tridiagonal_) {
    pattern_ = op.matrix.cast<Complex>();
    // Make sure the diagonal exists in the pattern so the shift always lands.
    for (int i = 0; i < pattern_.rows(); ++i) pattern_.coeffRef(i, i) = diag_[i];
    pattern_.makeCompressed();
  }
}

double ShiftedSolver::residual_norm(Complex z, const Eigen::VectorXcd& x,
                                    const Eigen::VectorXcd& rhs) const {
  Eigen::VectorXcd y = apply_real_sparse(op_.matrix, x) - z * x - rhs;
  return y.norm();
}

Eigen::VectorXcd ShiftedSolver::solve(Complex z, const Eigen::VectorXcd& rhs,
                                      double* residual) const {
  const int n = op_.dim();
  if (rhs.size() != n) throw std::invalid_argument("rhs size mismatch");
  Eigen::VectorXcd x(n);
  bool ok = false;
  if (tridiagonal_) {
    // Thomas elimination on (diag - z) with unit off-diagonals.
    Eigen::VectorXcd c(n), d(n);
    Complex denom = diag_[0] - z;
    if (std::abs(denom) > 1e-300) {
      c[0] = (n > 1) ? 1.0 / denom : 0.0;
      d[0] = rhs[0] / denom;
      ok = true;
      for (int i = 1; i < n && ok; ++i) {
        denom = (diag_[i] - z) - c[i - 1];
        if (std::abs(denom) < 1e-300) { ok = false; break; }
        if (i + 1 < n) c[i] = 1.0 / denom;
        d[i] = (rhs[i] - d[i - 1]) / denom;
      }
      if (ok) {
        x[n - 1] = d[n - 1];
        for (int i = n - 2; i >= 0; --i) x[i] = d[i] - c[i] * x[i + 1];
        ok = residual_norm(z, x, rhs) <= 1e-11 * (1.0 + rhs.norm());
      }
    }
  }
  if (!ok) {
    Eigen::SparseMatrix<Complex> a =
        tridiagonal_ ? op_.matrix.cast<Complex>() : pattern_;
    for (int i = 0; i < n; ++i) a.coeffRef(i, i) = diag_[i] - z;
    a.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<Complex>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) throw std::runtime_error("sparse LU factorization failed");
    x = lu.solve(rhs);
  }
  const double res = residual_norm(z, x, rhs);
  if (residual) *residual = res;
  // Solution norms may never exceed the resolvent bound |rhs| / |Im z|.
  if (z.imag() != 0 && x.norm() > rhs.norm() / std::abs(z.imag()) * (1.0 + 1e-9) + 1e-300)
    throw std::runtime_error("solve violated the resolvent norm bound");
  return x;
}

Eigen::VectorXcd resolve(const LatticeOperator& op, const Site& q, double energy, double eps,
                         double* residual) {
  if (eps == 0) throw std::invalid_argument("resolvent half-width eps must be nonzero");
  const int row = op.row_of_site(q);
  if (row < 0) throw std::invalid_argument("source site not in operator window");
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(op.dim());
  rhs[row] = 1.0;
  ShiftedSolver solver(op);
  double res = 0;
  Eigen::VectorXcd x = solver.solve(Complex(energy, eps), rhs, &res);
  if (res > 1e-10) throw std::runtime_error("resolvent solve residual above 1e-10");
  if (residual) *residual = res;
  return x;
}

void GreenQuery::validate() const {
  if (eps == 0) throw std::invalid_argument("green query requires eps != 0");
}

Complex green_element(const LatticeOperator& op, const GreenQuery& query) {
  query.validate();
  if (!query.box) {
    const Eigen::VectorXcd col = resolve(op, query.source, query.energy, query.eps);
    const int row = op.row_of_site(query.target);
    if (row < 0) throw std::invalid_argument("target site not in operator window");
    return col[row];
  }
  const LatticeOperator sub = restrict_to_box(op, *query.box);
  const Eigen::VectorXcd col = resolve(sub, query.source, query.energy, query.eps);
  const int row = sub.row_of_site(query.target);
  if (row < 0) throw std::invalid_argument("target site not in the box restriction");
  return col[row];
}

double gre_identity_residual(const LatticeOperator& op, const Box& box, const Site& q,
                             double energy, double eps, int drop_pairs) {
  const Site qp = box.center;
  double sep = 0;
  for (int a = 0; a < op.lattice.dimension; ++a)
    sep = std::max(sep, std::abs(static_cast<double>(q[a]) - qp[a]));
  if (!(sep > 2 * box.radius))
    throw std::invalid_argument("geometric resolvent identity requires |q - q'| > 2L");

  auto pairs = boundary_pairs(box, op.lattice);
  if (drop_pairs > 0) pairs.resize(pairs.size() - static_cast<std::size_t>(drop_pairs));

  const Complex z(energy, eps);
  const Eigen::VectorXcd full_col = resolve(op, q, energy, eps);  // G(., q)
  const LatticeOperator sub = restrict_to_box(op, box);
  const Eigen::VectorXcd box_col = resolve(sub, qp, energy, eps);  // G_box(., q') = G_box(q', .)

  const int row_qp = op.row_of_site(qp);
  Complex sum = full_col[row_qp];
  for (const auto& p : pairs) {
    const int u = sub.row_of_site(p.inside);
    const int up = op.row_of_site(p.outside);
    // Crossing bond amplitude is 1 by assembly; the decoupling identity
    // carries it with a minus sign relative to the full Green element.
    sum += box_col[u] * full_col[up];
  }
  return std::abs(sum);
}

std::vector<double> EpsProbeGrid::values() const {
  if (eps_min <= 0 || eps_min > 1) throw std::invalid_argument("eps_min must lie in (0, 1]");
  if (points < 1) throw std::invalid_argument("eps grid needs >= 1 point");
  std::vector<double> v;
  if (points == 1) return {eps_min};
  const double ratio = std::pow(1.0 / eps_min, 1.0 / (points - 1));
  double e = eps_min;
  for (int i = 0; i < points; ++i) {
    v.push_back(std::min(e, 1.0));
    e *= ratio;
  }
  return v;
}

BoxRegularityTester::BoxRegularityTester(const LatticeOperator& op, const Box& box)
    : box_(box), sub_(restrict_to_box(op, box)) {
  solver_ = std::make_unique<ShiftedSolver>(sub_);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(sub_.matrix),
                                                    Eigen::EigenvaluesOnly);
  box_eigenvalues_ = es.eigenvalues();
  center_row_ = sub_.row_of_site(box.center);
  if (center_row_ < 0) throw std::invalid_argument("box center not inside the lattice window");

  std::map<std::int64_t, std::vector<int>> groups;
  for (const auto& p : boundary_pairs(box, op.lattice)) {
    groups[op.lattice.index_of(p.outside)].push_back(sub_.row_of_site(p.inside));
  }
  exterior_groups_.reserve(groups.size());
  for (auto& [key, rows] : groups) exterior_groups_.push_back(std::move(rows));
}

double BoxRegularityTester::spectrum_distance(double energy) const {
  double d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < box_eigenvalues_.size(); ++i)
    d = std::min(d, std::abs(box_eigenvalues_[i] - energy));
  return d;
}

double BoxRegularityTester::boundary_norm(double energy, double eps) const {
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(sub_.dim());
  rhs[center_row_] = 1.0;
  const Eigen::VectorXcd col = solver_->solve(Complex(energy, eps), rhs);
  double s = 0;
  for (const auto& rows : exterior_groups_) {
    Complex c = 0;
    for (int r : rows) c += col[r];
    s += std::norm(c);
  }
  return std::sqrt(s);
}

RegularityVerdict BoxRegularityTester::test(double energy, double norm_threshold,
                                            const EpsProbeGrid& grid) const {
  RegularityVerdict v;
  v.energy = energy;
  v.box_radius = box_.radius;
  v.center = box_.center;
  v.threshold = norm_threshold;
  v.guard_distance = spectrum_distance(energy);
  v.guard_ok = v.guard_distance >= grid.eps_min;
  if (!v.guard_ok) {
    // The sup over eps != 0 diverges at box eigenvalues; fail conservatively.
    v.measured_norm = std::numeric_limits<double>::infinity();
    v.pass = false;
    return v;
  }
  for (double e : grid.values()) {
    const double norm = boundary_norm(energy, e);
    if (norm > v.measured_norm) {
      v.measured_norm = norm;
      v.eps_at_max = e;
    }
  }
  v.pass = v.measured_norm <= norm_threshold;
  return v;
}

RegularityVerdict regularity_test(const LatticeOperator& op, const Box& box, double energy,
                                  double norm_threshold, const EpsProbeGrid& grid) {
  return BoxRegularityTester(op, box).test(energy, norm_threshold, grid);
}

AllEnergyVerdict variable_energy_regularity(const LatticeOperator& op, const Box& box,
                                            std::vector<double> energies, double norm_threshold,
                                            const EpsProbeGrid& grid) {
  if (energies.empty()) throw std::invalid_argument("energy grid is empty");
  std::sort(energies.begin(), energies.end());
  for (std::size_t i = 1; i < energies.size(); ++i) {
    if (energies[i] - energies[i - 1] > grid.eps_min / 4 * (1 + 1e-12))
      throw std::invalid_argument("energy grid spacing must be <= eps_min/4");
  }
  BoxRegularityTester tester(op, box);
  AllEnergyVerdict out;
  out.pass = true;
  out.worst_margin = 0;
  for (double e : energies) {
    RegularityVerdict v = tester.test(e, norm_threshold, grid);
    const double margin = v.measured_norm / std::max(norm_threshold, 1e-300);
    if (margin >= out.worst_margin) {
      out.worst_margin = margin;
      out.worst_energy = e;
    }
    out.pass = out.pass && v.pass;
    out.per_energy.push_back(std::move(v));
  }
  return out;
}

std::pair<double, double> spectral_hull(const LatticeOperator& op) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (int col = 0; col < op.matrix.outerSize(); ++col) {
    double center = 0, radius = 0;
    for (Eigen::SparseMatrix<double>::InnerIterator it(op.matrix, col); it; ++it) {
      if (it.row() == it.col()) center = it.value();
      else radius += std::abs(it.value());
    }
    lo = std::min(lo, center - radius);
    hi = std::max(hi, center + radius);
  }
  return {lo, hi};
}

QuadratureEstimate weighted_resolvent_energy_integral(const LatticeOperator& op,
                                                      const Eigen::VectorXcd& psi,
                                                      const Eigen::VectorXd& weights, double e_lo,
                                                      double e_hi, double eps, double spacing) {
  if (!(e_hi >= e_lo)) throw std::invalid_argument("empty energy interval");
  if (e_hi == e_lo) return {0.0, 0.0};
  if (spacing <= 0) throw std::invalid_argument("spacing must be positive");
  const int count = std::max(2, static_cast<int>(std::ceil((e_hi - e_lo) / spacing)) + 1);
  const double h = (e_hi - e_lo) / (count - 1);
  ShiftedSolver solver(op);
  std::vector<double> f(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double energy = e_lo + h * i;
    const Eigen::VectorXcd x = solver.solve(Complex(energy, eps), psi);
    f[static_cast<std::size_t>(i)] = x.cwiseAbs2().dot(weights);
  }
  return trapezoid_with_error(f, h);
}

ResiduumResult residuum_check(const LatticeOperator& op, const Eigen::VectorXcd& psi, double e_lo,
                              double e_hi, double eps) {
  if (eps == 0) throw std::invalid_argument("eps must be nonzero");
  if (std::abs(psi.norm() - 1.0) > 1e-12) throw std::invalid_argument("state must be normalized");
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(op.dim());
  const QuadratureEstimate q = weighted_resolvent_energy_integral(op, psi, ones, e_lo, e_hi, eps,
                                                                  std::abs(eps) / 4);
  ResiduumResult r;
  r.integral = q.value;
  r.bound = kPi / std::abs(eps);
  r.quadrature_tolerance = q.refinement_error / r.bound + 1e-9;
  r.pass = r.integral <= r.bound * (1.0 + r.quadrature_tolerance);
  return r;
}

AbelResult abel_functional(const LatticeOperator& op, const Eigen::VectorXcd& psi, double eps,
                           double e_lo, double e_hi, double spacing) {
  if (eps <= 0) throw std::invalid_argument("abel functional needs eps > 0");
  if (spacing > eps / 4 * (1 + 1e-12))
    throw std::invalid_argument("energy grid spacing must be <= eps/4");
  const QuadratureEstimate q =
      weighted_resolvent_energy_integral(op, psi, op.second_moment_weights(), e_lo, e_hi, eps,
                                         spacing);
  AbelResult a;
  a.eps = eps;
  a.value = eps * eps * q.value;
  a.companion_value = eps * q.value;
  a.refinement_error = eps * eps * q.refinement_error;
  a.points = static_cast<int>(std::ceil((e_hi - e_lo) / spacing)) + 1;
  return a;
}

std::pair<double, double> abel_default_range(const LatticeOperator& op, double eps) {
  const auto hull = spectral_hull(op);
  return {hull.first - 10.0 / eps, hull.second + 10.0 / eps};
}

}  // namespace dynloc
