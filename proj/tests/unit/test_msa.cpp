#include "doctest.h"

#include <cmath>

#include "dynloc/msa.hpp"
#include "dynloc/rng.hpp"

using namespace dynloc;

TEST_CASE("scale schedule values and the defining identity") {
  const ScaleSchedule s = make_schedule(3.0, 1.5, 3);
  REQUIRE(s.lengths.size() == 4);
  CHECK(s.lengths[0] == 3.0);
  CHECK(s.lengths[1] == doctest::Approx(std::pow(3.0, 1.5)).epsilon(1e-15));
  CHECK(s.lengths[2] == doctest::Approx(std::pow(3.0, 2.25)).epsilon(1e-14));
  CHECK(s.lengths[3] == doctest::Approx(std::pow(3.0, 3.375)).epsilon(1e-14));
  for (int k = 0; k + 1 <= s.depth; ++k)
    CHECK(std::pow(s.lengths[static_cast<std::size_t>(k)], s.alpha) ==
          s.lengths[static_cast<std::size_t>(k + 1)]);
  CHECK(make_schedule(5.0, 1.5, 0).lengths.size() == 1);
  CHECK_THROWS(make_schedule(1.0, 1.5, 2));
  CHECK_THROWS(make_schedule(3.0, 1.0, 2));
}

TEST_CASE("epsilon-to-scale selector satisfies the sandwich exactly") {
  const ScaleSchedule s = make_schedule(2.0, 1.5, 6);
  const double nu = 0.5;
  SplitMix rng(33);
  for (int trial = 0; trial < 200; ++trial) {
    const double log_inv = std::pow(s.lengths[0], nu) +
                           (std::pow(s.lengths[6], nu) - std::pow(s.lengths[0], nu)) * rng.next_u01();
    const double eps = std::exp(-log_inv);
    if (eps <= 0 || eps >= 1) continue;
    const int k = scale_for_epsilon(s, nu, eps);
    CHECK(k >= 1);
    CHECK(std::exp(std::pow(s.lengths[static_cast<std::size_t>(k - 1)], nu)) <= 1.0 / eps);
    CHECK(1.0 / eps < std::exp(std::pow(s.lengths[static_cast<std::size_t>(k)], nu)));
  }
  CHECK_THROWS(scale_for_epsilon(s, nu, 0.9));      // too large for k >= 1
  CHECK_THROWS(scale_for_epsilon(s, nu, 1e-300));   // beyond the schedule depth
}

TEST_CASE("algebraic decay exponent bound") {
  bool ok = false;
  CHECK(algebraic_decay_exponent_bound(1.5, 1, 9.0, &ok) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(ok);
  algebraic_decay_exponent_bound(1.5, 1, 4.5 + 1e-9, &ok);
  CHECK(ok);
  const double just_below_one = algebraic_decay_exponent_bound(1.5, 1, 4.5 + 1e-9, nullptr);
  CHECK(just_below_one < 1.0);
  CHECK(just_below_one == doctest::Approx(1.0).epsilon(1e-9));
  algebraic_decay_exponent_bound(1.5, 1, 4.0, &ok);
  CHECK_FALSE(ok);  // hypothesis n > alpha(d+2) violated: flagged, not asserted
}

TEST_CASE("threshold families and exponent bookkeeping") {
  MsaParams p;
  p.variant = MsaVariant::UniformEnergy;
  p.rho = ThresholdKind::StretchedExponential;
  p.nu = 0.5;
  p.alpha = 1.5;
  p.dimension = 1;
  p.p = 4.6;
  CHECK(p.rho_value(16.0) == doctest::Approx(std::exp(-8.0)));
  CHECK(p.norm_threshold(16.0) == doctest::Approx(std::exp(-4.0)));
  CHECK(p.exponents_ok());  // p > alpha(d+2) = 4.5
  p.p = 4.4;
  std::string why;
  CHECK_FALSE(p.exponents_ok(&why));
  CHECK(why.find("uniform-energy") != std::string::npos);

  MsaParams q;
  q.variant = MsaVariant::FixedEnergy;
  q.rho = ThresholdKind::PowerLaw;
  q.m = 6.0;
  q.p = 5.5;
  q.beta = 1.0;
  q.dimension = 1;
  CHECK(q.rho_value(8.0) == doctest::Approx(std::pow(8.0, -6.0)));
  CHECK(q.exponents_ok());  // both exceed 3+d+beta = 5
  q.m = 4.0;
  CHECK_FALSE(q.exponents_ok());

  MsaParams r;
  r.rho = ThresholdKind::Algebraic;
  r.n = 9.0;
  r.c_n = 2.0;
  CHECK(r.rho_value(2.0) == doctest::Approx(2.0 * std::pow(2.0, -18.0)));
}

TEST_CASE("deterministic certificate reproduces the reference arithmetic") {
  CertificateParams c;  // defaults are the d=1, K0=10 instance
  const DeterministicCertificate det = deterministic_certificate(c, 10.0);
  CHECK(det.condition_lhs == doctest::Approx(82.5).epsilon(1e-15));
  CHECK(det.condition_rhs == doctest::Approx(60.0).epsilon(1e-15));
  CHECK(det.condition_ok);

  // m below the condition threshold flips the flag.
  CertificateParams weak = c;
  weak.m = 20.0;  // (4-1.5)*20 = 50 < 60
  CHECK_FALSE(deterministic_certificate(weak, 10.0).condition_ok);
  CHECK(deterministic_certificate(weak, 10.0).smallest_passing_L ==
        std::numeric_limits<double>::infinity());

  // Unit constants and a huge decay exponent pass at a moderate scale.
  CertificateParams easy = c;
  easy.m = 200.0;
  const DeterministicCertificate de = deterministic_certificate(easy, 5.0);
  CHECK(de.chain_ok);
  CHECK(de.smallest_passing_L < de.length);

  // Smallest passing scale is monotone nonincreasing in m.
  double last = std::numeric_limits<double>::infinity();
  for (double m : {33.0, 40.0, 60.0, 120.0}) {
    CertificateParams cm = c;
    cm.m = m;
    const double L = deterministic_certificate(cm, 10.0).smallest_passing_L;
    CHECK(L <= last * (1 + 1e-12));
    last = L;
  }

  // The smallest passing scale really is a boundary point.
  const double ell_star = std::pow(det.smallest_passing_L / c.N, 1.0 / c.alpha);
  CHECK(deterministic_certificate(c, ell_star * 1.001).chain_ok);
  CHECK_FALSE(deterministic_certificate(c, ell_star * 0.999).chain_ok);

  CHECK_THROWS(deterministic_certificate(c, 1.0));
  CertificateParams bad = c;
  bad.S = 3;
  CHECK_THROWS(deterministic_certificate(bad, 10.0));
}

TEST_CASE("certificate calculators are bit-stable across calls") {
  CertificateParams c;
  const DeterministicCertificate a = deterministic_certificate(c, 7.7);
  const DeterministicCertificate b = deterministic_certificate(c, 7.7);
  CHECK(a.chain_log10 == b.chain_log10);
  CHECK(a.smallest_passing_L == b.smallest_passing_L);
  const ProbabilisticCertificate pa = probabilistic_certificate(c, 12.0);
  const ProbabilisticCertificate pb = probabilistic_certificate(c, 12.0);
  CHECK(pa.lower_bound == pb.lower_bound);
  CHECK(pa.deficit == pb.deficit);
}

TEST_CASE("probabilistic certificate: exponent signs, hypothesis window, reference instance") {
  CertificateParams c;  // d=1, w=8: the spectral-count term decays like L1^-6
  const ProbabilisticCertificate p1 = probabilistic_certificate(c, 10.0);
  const ProbabilisticCertificate q1 = probabilistic_certificate(c, 20.0);
  CHECK(q1.wegner_term < p1.wegner_term);  // improves with scale
  CHECK(q1.combinatorial_term < p1.combinatorial_term);
  CHECK(p1.hypothesis_ok);                 // 0 < 5.5 < 6
  CHECK(p1.hypothesis_lo == 0.0);
  CHECK(p1.hypothesis_hi == 6.0);

  // Frozen reference values (long-double log-space evaluation):
  // L1 = 14 * 10^1.5, wegner = 2^3 * C(13,10) * L1^-6, comb = 3 * 14^11 * L1^-11.
  const double L1 = 14.0 * std::pow(10.0, 1.5);
  CHECK(p1.L1 == doctest::Approx(L1).epsilon(1e-14));
  CHECK(p1.wegner_term == doctest::Approx(8.0 * 286.0 * std::pow(L1, -6.0)).epsilon(1e-10));
  CHECK(p1.combinatorial_term ==
        doctest::Approx(3.0 * std::pow(14.0, 11.0) * std::pow(L1, -11.0)).epsilon(1e-10));
  CHECK_FALSE(p1.pass);  // the Wegner term exceeds L1^-5.5 at this scale
  CHECK(p1.deficit > 0);

  // p outside the window flips the hypothesis flag only.
  CertificateParams c2 = c;
  c2.p = 6.5;
  CHECK_FALSE(probabilistic_certificate(c2, 10.0).hypothesis_ok);
}

namespace {

DisorderSpec strong_disorder(std::uint64_t seed) {
  DisorderSpec s;
  s.kind = DisorderKind::IidUniform;
  s.half_width = 4.0;
  s.master_seed = seed;
  return s;
}

}  // namespace

TEST_CASE("fixed-energy probability estimation: vacuous and hopeless thresholds") {
  const LatticeSpec lat(1, 91);
  MsaParams params;
  params.rho = ThresholdKind::PowerLaw;
  params.p = 2.0;
  const ScaleSchedule sched = make_schedule(8.0, 1.5, 0);
  EpsProbeGrid grid;
  grid.eps_min = 1e-9;
  const Site q = make_site(20);

  // Vacuous threshold: pass fraction equals the guard pass rate (about 1).
  MsaParams vac = params;
  vac.m = -2.0;  // rho(L) = L^2: threshold L > any boundary norm at eps <= 1
  const ScaleProbability pv =
      estimate_m2_probability(lat, strong_disorder(1), vac, sched, 0, -5.5, q, 40, grid, 2);
  CHECK(pv.fraction == doctest::Approx(1.0));

  // Zero disorder mid-band never decays: estimate on a zero-width uniform
  // field via half_width -> tiny values, threshold exponential in L.
  DisorderSpec weak;
  weak.kind = DisorderKind::IidUniform;
  weak.half_width = 1e-6;
  weak.master_seed = 2;
  MsaParams hard = params;
  hard.m = 6.0;
  const ScaleProbability pz =
      estimate_m2_probability(lat, weak, hard, sched, 0, 0.0, q, 40, grid, 2);
  CHECK(pz.fraction == doctest::Approx(0.0));
  CHECK_FALSE(pz.verdict);

  // Separation precondition |q| > 2L.
  CHECK_THROWS(estimate_m2_probability(lat, strong_disorder(1), params, sched, 0, -5.5,
                                       make_site(10), 4, grid, 1));
}

TEST_CASE("probability is monotone in the threshold on shared realizations") {
  const LatticeSpec lat(1, 91);
  const ScaleSchedule sched = make_schedule(8.0, 1.5, 0);
  EpsProbeGrid grid;
  grid.eps_min = 1e-9;
  const Site q = make_site(20);
  MsaParams tight;
  tight.rho = ThresholdKind::PowerLaw;
  tight.m = 7.0;
  MsaParams loose = tight;
  loose.m = 4.0;
  const ScaleProbability pt =
      estimate_m2_probability(lat, strong_disorder(5), tight, sched, 0, -5.2, q, 60, grid, 2);
  const ScaleProbability pl =
      estimate_m2_probability(lat, strong_disorder(5), loose, sched, 0, -5.2, q, 60, grid, 2);
  CHECK(pt.passes <= pl.passes);
}

TEST_CASE("uniform-energy events: gap interval certainty and event inclusion") {
  const LatticeSpec lat(1, 61);
  MsaParams params;
  params.variant = MsaVariant::UniformEnergy;
  params.rho = ThresholdKind::PowerLaw;
  params.m = 2.0;
  params.p = 2.0;
  const ScaleSchedule sched = make_schedule(4.0, 1.5, 0);
  EpsProbeGrid grid;
  grid.eps_min = 0.05;
  const Site q = make_site(12), qp = make_site(-12);

  // Interval far outside the spectrum: both probabilities are 1.
  std::vector<double> far;
  for (int i = 0; i < 9; ++i) far.push_back(9.0 + 0.01 * i);
  const M1Probability gap = estimate_m1_probability(lat, strong_disorder(9), params, sched, 0,
                                                    far, q, qp, 30, grid, 2);
  CHECK(gap.uniform_choice.fraction == doctest::Approx(1.0));
  CHECK(gap.per_energy.fraction == doctest::Approx(1.0));

  // Band-edge window: inclusion of events holds sample by sample, so the
  // per-energy fraction dominates the uniform-choice fraction.
  std::vector<double> edge;
  for (int i = 0; i < 9; ++i) edge.push_back(-5.0 + 0.01 * i);
  MsaParams moderate = params;
  moderate.m = 5.0;
  const M1Probability be = estimate_m1_probability(lat, strong_disorder(10), moderate, sched, 0,
                                                   edge, q, qp, 60, grid, 2);
  CHECK(be.per_energy.passes >= be.uniform_choice.passes);
  CHECK_THROWS(estimate_m1_probability(lat, strong_disorder(10), params, sched, 0, edge, q,
                                       make_site(9), 4, grid, 1));  // separation
}
