#include "doctest.h"

#include <cmath>
#include <complex>

#include "dynloc/dynamics.hpp"
#include "dynloc/green.hpp"
#include "dynloc/rng.hpp"

using namespace dynloc;

namespace {
constexpr double kPi = 3.14159265358979323846;

DisorderField zero_field(const LatticeSpec& lat) {
  DisorderField f;
  f.values.assign(static_cast<std::size_t>(lat.site_count()), 0.0);
  return f;
}

DisorderField uniform_field(const LatticeSpec& lat, double m, std::uint64_t seed,
                            std::int64_t index = 0) {
  DisorderSpec spec;
  spec.kind = DisorderKind::IidUniform;
  spec.half_width = m;
  spec.master_seed = seed;
  return sample_field(spec, lat, index);
}

LatticeOperator diagonal_operator(const LatticeSpec& lat, const std::vector<double>& diag) {
  DisorderField f;
  f.values = diag;
  LatticeOperator op = assemble(lat, f);
  std::vector<Eigen::Triplet<double>> trip;
  for (int i = 0; i < op.dim(); ++i) trip.emplace_back(i, i, diag[static_cast<std::size_t>(i)]);
  op.matrix.setZero();
  op.matrix.setFromTriplets(trip.begin(), trip.end());
  return op;
}

}  // namespace

TEST_CASE("resolvent of a diagonal operator decouples site by site") {
  const LatticeSpec lat(1, 7);
  const std::vector<double> diag{1.0, -0.5, 2.0, 0.25, -1.5, 3.0, 0.0};
  const LatticeOperator op = diagonal_operator(lat, diag);
  const double E = 0.3, eps = 0.2;
  const Site q = make_site(1);  // row 4
  const Eigen::VectorXcd x = resolve(op, q, E, eps);
  const int row = op.row_of_site(q);
  const std::complex<double> expect = 1.0 / (diag[static_cast<std::size_t>(row)] -
                                             std::complex<double>(E, eps));
  CHECK(std::abs(x[row] - expect) < 1e-13);
  for (int i = 0; i < op.dim(); ++i)
    if (i != row) CHECK(std::abs(x[i]) == 0.0);
}

TEST_CASE("resolvent norm is bounded by 1/eps") {
  const LatticeSpec lat(1, 65);
  const LatticeOperator op = assemble(lat, uniform_field(lat, 2.0, 5));
  SplitMix rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const double E = 8.0 * rng.next_u01() - 4.0;
    const double eps = 0.01 + rng.next_u01();
    const Eigen::VectorXcd x = resolve(op, make_site(3), E, eps);
    CHECK(x.norm() <= 1.0 / eps + 1e-12);
  }
  CHECK_THROWS(resolve(op, make_site(3), 0.0, 0.0));
}

TEST_CASE("two-site resolvent matches the hand inversion") {
  // Clipped edge box gives H = [[0,1],[1,0]]; at z = i the resolvent column
  // from the first site is (i/2, 1/2).
  const LatticeSpec lat(1, 11);
  const LatticeOperator full = assemble(lat, zero_field(lat));
  const LatticeOperator op = restrict_to_box(full, Box{make_site(5), 1.0});
  REQUIRE(op.dim() == 2);
  const Eigen::VectorXcd x = resolve(op, make_site(4), 0.0, 1.0);
  CHECK(std::abs(x[0] - std::complex<double>(0.0, 0.5)) < 1e-13);
  CHECK(std::abs(x[1] - std::complex<double>(0.5, 0.0)) < 1e-13);
}

TEST_CASE("geometric resolvent identity: numerically exact, sensitive to mutilation") {
  // d = 1 instances.
  const LatticeSpec lat1(1, 65);
  for (std::int64_t i = 0; i < 5; ++i) {
    const LatticeOperator op = assemble(lat1, uniform_field(lat1, 1.0, 40, i));
    const Box box{make_site(0), 8.0};
    const Site q = make_site(17 + static_cast<int>(3 * i));
    const double r = gre_identity_residual(op, box, q, 0.5, 0.5);
    CHECK(r <= 1e-10);
    const double control = gre_identity_residual(op, box, q, 0.5, 0.5, 1);
    CHECK(control > 1e-8);  // dropping one boundary pair breaks the identity
  }
  // d = 2 instance.
  const LatticeSpec lat2(2, 21);
  const LatticeOperator op2 = assemble(lat2, uniform_field(lat2, 1.0, 41));
  const Box box2{make_site(0, 0), 3.0};
  const Site q2 = make_site(8, -1);
  CHECK(gre_identity_residual(op2, box2, q2, 0.3, 0.4) <= 1e-10);
  CHECK(gre_identity_residual(op2, box2, q2, 0.3, 0.4, 1) > 1e-8);

  // Separation precondition.
  CHECK_THROWS(gre_identity_residual(op2, box2, make_site(4, 0), 0.3, 0.4));
}

TEST_CASE("green elements obey conjugation symmetry") {
  const LatticeSpec lat(1, 65);
  const LatticeOperator op = assemble(lat, uniform_field(lat, 2.0, 55));
  const Eigen::VectorXcd plus = resolve(op, make_site(5), 0.7, 0.3);
  const Eigen::VectorXcd minus = resolve(op, make_site(5), 0.7, -0.3);
  CHECK((plus - minus.conjugate()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("eps probe grid is geometric from eps_min to 1") {
  EpsProbeGrid g;
  g.eps_min = 1e-4;
  g.points = 5;
  const auto v = g.values();
  REQUIRE(v.size() == 5);
  CHECK(v.front() == doctest::Approx(1e-4));
  CHECK(v.back() == doctest::Approx(1.0));
  for (std::size_t i = 1; i < v.size(); ++i)
    CHECK(v[i] / v[i - 1] == doctest::Approx(10.0).epsilon(1e-9));
}

TEST_CASE("regularity: vacuous threshold passes whenever the guard passes") {
  const LatticeSpec lat(1, 65);
  const LatticeOperator op = assemble(lat, uniform_field(lat, 2.0, 60));
  const Box box{make_site(0), 6.0};
  EpsProbeGrid grid;
  grid.eps_min = 1e-6;
  const double huge = 4.0 / grid.eps_min;
  const RegularityVerdict v = regularity_test(op, box, 0.37, huge, grid);
  if (v.guard_ok) CHECK(v.pass);
  CHECK(v.threshold == huge);
}

TEST_CASE("regularity: mid-band free states never decay") {
  const LatticeSpec lat(1, 129);
  const LatticeOperator op = assemble(lat, zero_field(lat));
  EpsProbeGrid grid;
  grid.eps_min = 1e-4;
  for (double L : {8.0, 16.0}) {
    // Stretched-exponential threshold at nu = 1/2.
    const double threshold = std::exp(-std::pow(L, 0.5));
    const RegularityVerdict v = regularity_test(op, Box{make_site(0), L}, 0.0, threshold, grid);
    CHECK_FALSE(v.pass);
    if (v.guard_ok) CHECK(v.measured_norm > threshold);
  }
}

TEST_CASE("regularity: guard fails exactly at box eigenvalues") {
  const LatticeSpec lat(1, 65);
  const LatticeOperator op = assemble(lat, zero_field(lat));
  const Box box{make_site(0), 4.0};  // 9 sites
  // Mid-spectrum eigenvalue of the 9-site chain: 2 cos(5 pi / 10) = 0.
  EpsProbeGrid grid;
  grid.eps_min = 1e-6;
  const RegularityVerdict v = regularity_test(op, box, 0.0, 1e6, grid);
  CHECK_FALSE(v.guard_ok);
  CHECK_FALSE(v.pass);
  CHECK(v.guard_distance < grid.eps_min);
}

TEST_CASE("regularity threshold monotonicity on identical data") {
  const LatticeSpec lat(1, 65);
  const LatticeOperator op = assemble(lat, uniform_field(lat, 4.0, 61));
  const Box box{make_site(0), 8.0};
  EpsProbeGrid grid;
  grid.eps_min = 1e-5;
  const RegularityVerdict tight = regularity_test(op, box, -3.9, 1e-4, grid);
  const RegularityVerdict loose = regularity_test(op, box, -3.9, 1e-1, grid);
  CHECK(tight.measured_norm == loose.measured_norm);
  if (tight.pass) CHECK(loose.pass);
}

TEST_CASE("variable-energy regularity: gap intervals pass, conjunction semantics") {
  const LatticeSpec lat(1, 65);
  const LatticeOperator op = assemble(lat, uniform_field(lat, 1.0, 62));
  EpsProbeGrid grid;
  grid.eps_min = 0.02;
  // Interval far outside the spectrum: the resolvent is uniformly bounded.
  std::vector<double> far;
  for (int i = 0; i < 9; ++i) far.push_back(8.0 + 0.004 * i);
  const AllEnergyVerdict gap = variable_energy_regularity(op, Box{make_site(0), 8.0}, far, 0.5, grid);
  CHECK(gap.pass);

  // Conjunction: make one grid energy fail by picking the threshold between
  // the per-energy measured norms. A single coarse probe keeps the grid
  // spacing precondition satisfiable at this energy separation.
  EpsProbeGrid coarse;
  coarse.eps_min = 1.0;
  coarse.points = 1;
  const BoxRegularityTester tester(op, Box{make_site(0), 8.0});
  const double n1 = tester.test(8.0, 1.0, coarse).measured_norm;
  const double n2 = tester.test(8.2, 1.0, coarse).measured_norm;
  REQUIRE(n1 != n2);
  const double between = 0.5 * (std::min(n1, n2) + std::max(n1, n2));
  const AllEnergyVerdict mixed =
      variable_energy_regularity(op, Box{make_site(0), 8.0}, {8.0, 8.2}, between, coarse);
  CHECK_FALSE(mixed.pass);
  CHECK(mixed.worst_energy == (n1 > n2 ? 8.0 : 8.2));
  // Spacing precondition: 0.2 > eps_min/4.
  CHECK_THROWS(variable_energy_regularity(op, Box{make_site(0), 8.0}, {8.0, 8.2}, between,
                                          EpsProbeGrid{1e-4, 5}));
}

TEST_CASE("residuum integral: exact Lorentzian oracle and universal bound") {
  const LatticeSpec lat(1, 65);
  const LatticeOperator op = assemble(lat, uniform_field(lat, 1.5, 70));
  const SpectralDecomposition d = diagonalize(op);
  Eigen::VectorXcd psi(op.dim());
  SplitMix rng(8);
  for (int i = 0; i < op.dim(); ++i) psi[i] = std::complex<double>(rng.next_u01() - 0.5, rng.next_u01() - 0.5);
  psi.normalize();
  const double eps = 0.1;

  // Full-line value from the spectral oracle: sum_k |c_k|^2 pi/eps = pi/eps.
  const auto hull = spectral_hull(op);
  const double margin = 10.0 / eps + 64.0 * eps;
  const ResiduumResult full = residuum_check(op, psi, hull.first - margin, hull.second + margin, eps);
  CHECK(full.pass);
  CHECK(std::abs(full.integral - full.bound) <= 0.01 * full.bound);

  // Zero-length interval and monotonicity under inclusion.
  const ResiduumResult none = residuum_check(op, psi, 0.5, 0.5, eps);
  CHECK(none.integral == 0.0);
  CHECK(none.pass);
  const ResiduumResult sub = residuum_check(op, psi, -1.0, 1.0, eps);
  CHECK(sub.pass);
  CHECK(sub.integral <= full.integral);

  // Universally quantified property: no sampled (omega, psi, I, eps) fails.
  for (int trial = 0; trial < 6; ++trial) {
    const LatticeOperator o2 =
        assemble(lat, uniform_field(lat, 2.0, 71, trial));
    Eigen::VectorXcd p2(o2.dim());
    for (int i = 0; i < o2.dim(); ++i) p2[i] = std::complex<double>(rng.next_u01() - 0.5, rng.next_u01() - 0.5);
    p2.normalize();
    const double e2 = 0.05 + rng.next_u01();
    const double lo = -4 + 8 * rng.next_u01();
    const ResiduumResult r = residuum_check(o2, p2, lo, lo + 3 * rng.next_u01(), e2);
    CHECK(r.pass);
  }
  CHECK_THROWS(residuum_check(op, 2.0 * psi, -1.0, 1.0, eps));  // not normalized
}

TEST_CASE("abel functional: rank-one eigenvector reduction") {
  const LatticeSpec lat(1, 33);
  const LatticeOperator op = assemble(lat, uniform_field(lat, 2.0, 90));
  const SpectralDecomposition d = diagonalize(op);
  const int k = 16;
  const Eigen::VectorXcd psi = d.eigenvectors.col(k).cast<std::complex<double>>();
  const double theta = d.eigenvalues[k];
  const double eps = 0.25;

  // For an eigenvector, | |X| R psi |^2 = | |X| psi |^2 / ((theta-E)^2 + eps^2),
  // so the full-line integral is pi/eps times the state's second moment.
  const double m_psi = (psi.cwiseAbs2().array() * op.second_moment_weights().array()).sum();
  const auto range = abel_default_range(op, eps);
  const AbelResult a = abel_functional(op, psi, eps, range.first, range.second, eps / 4);
  const double expect = eps * eps * m_psi * (kPi / eps);
  CHECK(a.value == doctest::Approx(expect).epsilon(5e-3));
  CHECK(a.companion_value == doctest::Approx(a.value / eps).epsilon(1e-12));
  CHECK_THROWS(abel_functional(op, psi, eps, range.first, range.second, eps));  // spacing too coarse
}

TEST_CASE("abel functional diverges like pi/eps on the free chain") {
  const LatticeSpec lat(1, 2001);
  const LatticeOperator op = assemble(lat, zero_field(lat));
  const Eigen::VectorXcd psi = delta_state(op, make_site(0));
  const double eps = 0.05;
  const auto range = abel_default_range(op, eps);
  const AbelResult a = abel_functional(op, psi, eps, range.first, range.second, eps / 4);
  // Laplace-transform oracle from m(t) = 2t^2: eps^2 * 2pi * 2/(2eps)^3 * ...
  // collapses to pi/eps.
  CHECK(a.value == doctest::Approx(kPi / eps).epsilon(0.10));
}

TEST_CASE("green queries: element access, box restriction, conjugation") {
  const LatticeSpec lat(1, 65);
  const LatticeOperator op = assemble(lat, uniform_field(lat, 2.0, 91));
  GreenQuery q;
  q.energy = 0.4;
  q.eps = 0.3;
  q.source = make_site(5);
  q.target = make_site(-2);
  const Complex g = green_element(op, q);
  GreenQuery swapped = q;
  std::swap(swapped.source, swapped.target);
  CHECK(std::abs(g - green_element(op, swapped)) < 1e-12);  // symmetric operator

  GreenQuery conj = q;
  conj.eps = -q.eps;
  CHECK(std::abs(g - std::conj(green_element(op, conj))) < 1e-12);

  GreenQuery boxed = q;
  boxed.box = Box{make_site(0), 10.0};
  const Complex gb = green_element(op, boxed);
  CHECK(std::abs(gb - g) > 1e-6);  // Dirichlet restriction changes the element

  GreenQuery bad = q;
  bad.eps = 0.0;
  CHECK_THROWS(green_element(op, bad));
}
