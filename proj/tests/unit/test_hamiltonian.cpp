#include "doctest.h"

#include <cmath>

#include "dynloc/hamiltonian.hpp"
#include "dynloc/rng.hpp"

using namespace dynloc;

namespace {
constexpr double kPi = 3.14159265358979323846;

DisorderField zero_field(const LatticeSpec& lat) {
  DisorderField f;
  f.values.assign(static_cast<std::size_t>(lat.site_count()), 0.0);
  return f;
}

DisorderField uniform_field(const LatticeSpec& lat, double m, std::uint64_t seed) {
  DisorderSpec spec;
  spec.kind = DisorderKind::IidUniform;
  spec.half_width = m;
  spec.master_seed = seed;
  return sample_field(spec, lat, 0);
}

// Closed-form spectrum of the open chain with unit hops and zero diagonal.
std::vector<double> path_graph_eigenvalues(int n) {
  std::vector<double> ev;
  for (int k = 1; k <= n; ++k) ev.push_back(2.0 * std::cos(k * kPi / (n + 1)));
  std::sort(ev.begin(), ev.end());
  return ev;
}

}  // namespace

TEST_CASE("zero-disorder chain of 5 is tridiagonal with unit hops") {
  const LatticeSpec lat(1, 5);
  const LatticeOperator op = assemble(lat, zero_field(lat));
  const Eigen::MatrixXd dense = Eigen::MatrixXd(op.matrix);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      const double expect = std::abs(i - j) == 1 ? 1.0 : 0.0;
      CHECK(dense(i, j) == expect);
    }
  CHECK((dense - dense.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("interior rows carry exactly 2d unit off-diagonals") {
  const LatticeSpec lat(2, 9);
  const LatticeOperator op = assemble(lat, zero_field(lat));
  const Eigen::MatrixXd dense = Eigen::MatrixXd(op.matrix);
  const int row = op.row_of_site(make_site(1, -2));
  int count = 0;
  for (int j = 0; j < dense.cols(); ++j)
    if (j != row && dense(row, j) != 0) {
      CHECK(dense(row, j) == 1.0);
      ++count;
    }
  CHECK(count == 4);
}

TEST_CASE("field/lattice size mismatch is an error") {
  const LatticeSpec lat(1, 11);
  DisorderField f;
  f.values.assign(7, 0.0);
  CHECK_THROWS(assemble(lat, f));
}

TEST_CASE("gershgorin bound dominates the spectrum for sampled realizations") {
  const LatticeSpec lat(1, 65);
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    const DisorderField f = uniform_field(lat, 2.0, seed);
    const LatticeOperator op = assemble(lat, f);
    double max_abs = 0;
    for (double v : f.values) max_abs = std::max(max_abs, std::abs(v));
    CHECK(gershgorin_bound(op) <= 2 * lat.dimension + max_abs + 1e-12);
    const SpectralDecomposition d = diagonalize(op);
    CHECK(std::abs(d.eigenvalues[0]) <= gershgorin_bound(op) + 1e-12);
    CHECK(std::abs(d.eigenvalues[d.eigenvalues.size() - 1]) <= gershgorin_bound(op) + 1e-12);
  }
}

TEST_CASE("open-chain spectrum matches the closed form to 1e-10") {
  const int n = 40;
  const LatticeSpec lat(1, n + (n % 2 == 0 ? 1 : 0));  // 41 sites
  const LatticeOperator op = assemble(lat, zero_field(lat));
  const SpectralDecomposition d = diagonalize(op);
  const auto expect = path_graph_eigenvalues(lat.extent);
  for (int k = 0; k < d.eigenvalues.size(); ++k)
    CHECK(d.eigenvalues[k] == doctest::Approx(expect[static_cast<std::size_t>(k)]).epsilon(1e-10));
}

TEST_CASE("restriction is the principal submatrix with crossing bonds removed") {
  const LatticeSpec lat(1, 21);
  const LatticeOperator op = assemble(lat, uniform_field(lat, 1.0, 5));
  const Box box{make_site(2), 3.0};
  const LatticeOperator sub = restrict_to_box(op, box);
  REQUIRE(sub.dim() == 7);
  const Eigen::MatrixXd dense = Eigen::MatrixXd(sub.matrix);
  for (int i = 0; i < sub.dim(); ++i) {
    const Site si = sub.site_at_row(i);
    for (int j = 0; j < sub.dim(); ++j) {
      const Site sj = sub.site_at_row(j);
      double expect = 0;
      if (i == j) expect = op.matrix.coeff(op.row_of_site(si), op.row_of_site(si));
      else if (std::abs(si[0] - sj[0]) == 1) expect = 1.0;
      CHECK(dense(i, j) == expect);
    }
  }
  CHECK(gershgorin_bound(sub) <= gershgorin_bound(op) + 1e-15);
  CHECK_THROWS(restrict_to_box(op, Box{make_site(15), 1.0}));  // off-window box
}

TEST_CASE("two-site zero-disorder restriction has eigenvalues -1 and 1") {
  const LatticeSpec lat(1, 11);
  const LatticeOperator op = assemble(lat, zero_field(lat));
  // A box clipped by the window edge keeps exactly the sites {4, 5}.
  const LatticeOperator sub = restrict_to_box(op, Box{make_site(5), 1.0});
  REQUIRE(sub.dim() == 2);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(sub.matrix));
  CHECK(es.eigenvalues()[0] == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(es.eigenvalues()[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("diagonal operator diagonalizes to its sorted couplings") {
  const LatticeSpec lat(1, 9);
  DisorderField f = zero_field(lat);
  f.values = {3.0, -1.0, 2.0, 0.5, -2.5, 1.5, 0.0, 4.0, -3.0};
  LatticeOperator op = assemble(lat, f);
  // Remove the hops to make it purely diagonal.
  std::vector<Eigen::Triplet<double>> trip;
  for (int i = 0; i < op.dim(); ++i) trip.emplace_back(i, i, f.values[static_cast<std::size_t>(i)]);
  op.matrix.setZero();
  op.matrix.setFromTriplets(trip.begin(), trip.end());
  const SpectralDecomposition d = diagonalize(op);
  std::vector<double> sorted = f.values;
  std::sort(sorted.begin(), sorted.end());
  for (int k = 0; k < d.eigenvalues.size(); ++k)
    CHECK(d.eigenvalues[k] == doctest::Approx(sorted[static_cast<std::size_t>(k)]).epsilon(1e-14));
}

TEST_CASE("trace is preserved by diagonalization") {
  const LatticeSpec lat(1, 33);
  const LatticeOperator op = assemble(lat, uniform_field(lat, 2.0, 8));
  const SpectralDecomposition d = diagonalize(op);
  double trace = 0;
  for (double v : Eigen::VectorXd(op.matrix.diagonal())) trace += v;
  CHECK(d.eigenvalues.sum() == doctest::Approx(trace).epsilon(1e-9));
}

TEST_CASE("dimension cap yields an instructive error") {
  const LatticeSpec lat(1, 65);
  const LatticeOperator op = assemble(lat, zero_field(lat));
  CHECK_THROWS_WITH_AS(diagonalize(op, 10), doctest::Contains("polynomial propagator"),
                       std::invalid_argument);
}

TEST_CASE("filter profile: plateau, exact zeros outside, bounded differences") {
  FilterSpec f;
  f.lo = -1.0;
  f.hi = 2.0;
  f.margin = 0.5;
  f.validate();
  CHECK(f.value(-1.0) == 0.0);
  CHECK(f.value(2.0) == 0.0);
  CHECK(f.value(-1.5) == 0.0);
  CHECK(f.value(0.0) == 1.0);   // plateau [-0.5, 1.5]
  CHECK(f.value(1.49) == 1.0);
  for (double e = -2.0; e <= 3.0; e += 0.001) {
    CHECK(f.value(e) >= 0.0);
    CHECK(f.value(e) <= 1.0);
  }
  // Finite differences up to order 4 stay bounded on a 1e4 grid.
  const int n = 10000;
  const double h = 5.0 / n;
  std::vector<double> grid(static_cast<std::size_t>(n) + 5);
  for (int i = 0; i < n + 5; ++i) grid[static_cast<std::size_t>(i)] = f.value(-2.0 + h * i);
  double worst = 0;
  for (int order = 1; order <= 4; ++order) {
    for (std::size_t i = 0; i + 4 < grid.size(); ++i) {
      double diff = 0;
      const double binom[5][5] = {{1, 0, 0, 0, 0},
                                  {-1, 1, 0, 0, 0},
                                  {1, -2, 1, 0, 0},
                                  {-1, 3, -3, 1, 0},
                                  {1, -4, 6, -4, 1}};
      for (int k = 0; k <= order; ++k) diff += binom[order][k] * grid[i + static_cast<std::size_t>(k)];
      worst = std::max(worst, std::abs(diff / std::pow(h, order)));
    }
    CHECK(std::isfinite(worst));
  }
  CHECK(worst < 1e7);  // C-infinity profile with margin 0.5
  CHECK_THROWS(FilterSpec{0.0, 1.0, 0.6}.validate());  // no plateau left
}

TEST_CASE("filter application: identity, annihilation, spectral Parseval") {
  const LatticeSpec lat(1, 33);
  const LatticeOperator op = assemble(lat, uniform_field(lat, 1.0, 13));
  const SpectralDecomposition d = diagonalize(op);
  const Eigen::VectorXcd psi = delta_state(op, make_site(2));

  FilterSpec whole;
  whole.lo = d.eigenvalues[0] - 2.0;
  whole.hi = d.eigenvalues[d.eigenvalues.size() - 1] + 2.0;
  whole.margin = 0.5;
  // Plateau covers the full spectrum: f(H) acts as the identity.
  CHECK((apply_filter(whole, d, psi) - psi).norm() < 1e-12);

  FilterSpec below;
  below.lo = d.eigenvalues[0] - 3.0;
  below.hi = d.eigenvalues[0] - 1.0;
  below.margin = 0.25;
  CHECK(apply_filter(below, d, psi).norm() == 0.0);

  FilterSpec band;
  band.lo = -1.0;
  band.hi = 0.5;
  band.margin = 0.3;
  const Eigen::VectorXcd out = apply_filter(band, d, psi);
  CHECK(out.norm() <= psi.norm() + 1e-14);
  // Direct spectral-sum oracle for the output norm.
  const Eigen::VectorXcd coeff = d.eigenvectors.transpose() * psi;
  double expect = 0;
  for (int k = 0; k < coeff.size(); ++k)
    expect += std::norm(coeff[k]) * band.value(d.eigenvalues[k]) * band.value(d.eigenvalues[k]);
  CHECK(out.squaredNorm() == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("commutator norms: window value, symbol value, and the 2d bound") {
  const LatticeSpec lat(1, 201);
  const LatticeOperator op = assemble(lat, uniform_field(lat, 2.0, 3));
  const double bound = commutator_norm_bound(op, 0);
  CHECK(bound == doctest::Approx(2.0 * std::cos(kPi / 202.0)).epsilon(1e-14));
  CHECK(bound <= 2.0 * lat.dimension);
  CHECK(commutator_symbol_norm() == doctest::Approx(2.0).epsilon(1e-10));

  // Measured matrix norm agrees with the product-structure value.
  const LatticeSpec small(1, 41);
  const LatticeOperator small_op = assemble(small, uniform_field(small, 2.0, 4));
  CHECK(commutator_matrix_norm(small_op, 0) ==
        doctest::Approx(commutator_norm_bound(small_op, 0)).epsilon(1e-10));

  const LatticeSpec lat2(2, 9);
  const LatticeOperator op2 = assemble(lat2, zero_field(lat2));
  for (int axis : {0, 1}) {
    CHECK(commutator_matrix_norm(op2, axis) ==
          doctest::Approx(commutator_norm_bound(op2, axis)).epsilon(1e-10));
    CHECK(commutator_matrix_norm(op2, axis) <= 2.0 * lat2.dimension);
  }
}

TEST_CASE("restriction never increases the Gershgorin bound") {
  const LatticeSpec lat(2, 13);
  const LatticeOperator op = assemble(lat, uniform_field(lat, 3.0, 21));
  for (double radius : {1.0, 2.0, 3.5}) {
    const LatticeOperator sub = restrict_to_box(op, Box{make_site(1, 1), radius});
    CHECK(gershgorin_bound(sub) <= gershgorin_bound(op) + 1e-15);
  }
}

TEST_CASE("assembled matrices are exactly symmetric in any dimension") {
  for (int d : {1, 2, 3}) {
    const LatticeSpec lat(d, d == 3 ? 5 : 11);
    const LatticeOperator op = assemble(lat, uniform_field(lat, 2.0, 99));
    const Eigen::MatrixXd dense = Eigen::MatrixXd(op.matrix);
    CHECK((dense - dense.transpose()).cwiseAbs().maxCoeff() == 0.0);
  }
}
