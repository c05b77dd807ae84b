#include "dynloc/msa.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "dynloc/hamiltonian.hpp"
#include "dynloc/runner.hpp"
#include "dynloc/stats.hpp"

namespace dynloc {

ScaleSchedule make_schedule(double L0, double alpha, int depth) {
  if (!(L0 > 1.0)) throw std::invalid_argument("schedule requires L0 > 1");
  if (!(alpha > 1.0)) throw std::invalid_argument("schedule requires alpha > 1");
  if (depth < 0) throw std::invalid_argument("schedule depth must be >= 0");
  ScaleSchedule s;
  s.L0 = L0;
  s.alpha = alpha;
  s.depth = depth;
  s.lengths.resize(static_cast<std::size_t>(depth) + 1);
  s.lengths[0] = L0;
  // L_{k+1} = L_k^alpha keeps the defining identity exact in floating point.
  for (int k = 1; k <= depth; ++k)
    s.lengths[static_cast<std::size_t>(k)] = std::pow(s.lengths[static_cast<std::size_t>(k - 1)], alpha);
  return s;
}

int scale_for_epsilon(const ScaleSchedule& schedule, double nu, double eps) {
  if (!(nu > 0)) throw std::invalid_argument("nu must be positive");
  if (!(eps > 0) || eps >= 1) throw std::invalid_argument("eps must lie in (0, 1)");
  const double target = std::log(1.0 / eps);
  if (target < std::pow(schedule.lengths.front(), nu))
    throw std::invalid_argument("eps too large: no k >= 1 satisfies the scale sandwich");
  for (int k = 1; k <= schedule.depth; ++k) {
    const double lo = std::pow(schedule.lengths[static_cast<std::size_t>(k - 1)], nu);
    const double hi = std::pow(schedule.lengths[static_cast<std::size_t>(k)], nu);
    if (lo <= target && target < hi) return k;
  }
  throw std::invalid_argument("eps too small for this schedule depth");
}

double algebraic_decay_exponent_bound(double alpha, int d, double n, bool* hypothesis_ok) {
  const double bound = alpha * (d + 2) / n;
  if (hypothesis_ok) *hypothesis_ok = n > alpha * (d + 2);
  return bound;
}

double MsaParams::rho_value(double length) const {
  switch (rho) {
    case ThresholdKind::StretchedExponential: return std::exp(-2.0 * std::pow(length, nu));
    case ThresholdKind::PowerLaw: return std::pow(length, -m);
    case ThresholdKind::Algebraic: return c_n * std::pow(length, -2.0 * n);
  }
  return 0;
}

double MsaParams::norm_threshold(double length) const { return std::sqrt(rho_value(length)); }

bool MsaParams::exponents_ok(std::string* description) const {
  bool ok = true;
  std::string why;
  if (variant == MsaVariant::UniformEnergy) {
    const double needed = alpha * (dimension + 2);
    ok = p > needed;
    why = "uniform-energy exponent check: p=" + std::to_string(p) +
          (ok ? " > " : " <= ") + std::to_string(needed);
  } else {
    const double needed = 3.0 + dimension + beta;
    const bool ok_m = m > needed;
    const bool ok_p = p > needed;
    ok = ok_m && ok_p;
    why = "fixed-energy exponent check vs " + std::to_string(needed) + ": m=" +
          std::to_string(m) + (ok_m ? " ok" : " too small") + ", p=" + std::to_string(p) +
          (ok_p ? " ok" : " too small");
  }
  if (description) *description = why;
  return ok;
}

namespace {

ScaleProbability summarize(double length, const std::vector<char>& results, double p) {
  ScaleProbability out;
  out.length = length;
  out.samples = static_cast<int>(results.size());
  for (char c : results) out.passes += c ? 1 : 0;
  out.fraction = static_cast<double>(out.passes) / out.samples;
  const Interval ci = clopper_pearson(out.samples, out.passes, 0.95);
  out.ci_lo = ci.lo;
  out.ci_hi = ci.hi;
  out.bound = 1.0 - std::pow(length, -p);
  out.verdict = out.ci_lo >= out.bound;
  return out;
}

void require_box_fits(const LatticeSpec& lattice, const Site& q, double length) {
  const int reach = static_cast<int>(length) + 1;
  for (int a = 0; a < lattice.dimension; ++a)
    if (q[a] - reach < -lattice.half() || q[a] + reach > lattice.half())
      throw std::invalid_argument("lattice too small for the regularity box plus exterior layer");
}

}  // namespace

ScaleProbability estimate_m2_probability(const LatticeSpec& lattice, const DisorderSpec& disorder,
                                         const MsaParams& params, const ScaleSchedule& schedule,
                                         int k, double energy, const Site& q, int realizations,
                                         const EpsProbeGrid& grid, int workers) {
  if (k < 0 || k > schedule.depth) throw std::invalid_argument("scale index out of range");
  const double length = schedule.lengths[static_cast<std::size_t>(k)];
  double qnorm = 0;
  for (int a = 0; a < lattice.dimension; ++a) qnorm = std::max(qnorm, std::abs(static_cast<double>(q[a])));
  if (!(qnorm > 2.0 * length))
    throw std::invalid_argument("box center must satisfy |q| > 2 L_k");
  require_box_fits(lattice, q, length);

  const double threshold = params.norm_threshold(length);
  const Box box{q, length};
  std::vector<char> results(static_cast<std::size_t>(realizations), 0);
  std::vector<RegularityVerdict> verdicts(static_cast<std::size_t>(realizations));
  parallel_for_indexed(realizations, workers, [&](std::int64_t i) {
    const DisorderField field = sample_field(disorder, lattice, i);
    const LatticeOperator op = assemble(lattice, field);
    RegularityVerdict v = regularity_test(op, box, energy, threshold, grid);
    results[static_cast<std::size_t>(i)] = v.pass ? 1 : 0;
    verdicts[static_cast<std::size_t>(i)] = std::move(v);
  });
  ScaleProbability out = summarize(length, results, params.p);
  out.per_realization = std::move(verdicts);
  return out;
}

M1Probability estimate_m1_probability(const LatticeSpec& lattice, const DisorderSpec& disorder,
                                      const MsaParams& params, const ScaleSchedule& schedule,
                                      int k, const std::vector<double>& energies, const Site& q,
                                      const Site& q_prime, int realizations,
                                      const EpsProbeGrid& grid, int workers) {
  if (k < 0 || k > schedule.depth) throw std::invalid_argument("scale index out of range");
  if (energies.empty()) throw std::invalid_argument("energy grid is empty");
  const double length = schedule.lengths[static_cast<std::size_t>(k)];
  double sep = 0;
  for (int a = 0; a < lattice.dimension; ++a)
    sep = std::max(sep, std::abs(static_cast<double>(q[a]) - q_prime[a]));
  if (!(sep > 2.0 * length))
    throw std::invalid_argument("centers must satisfy |q - q'| > 2 L_k");
  require_box_fits(lattice, q, length);
  require_box_fits(lattice, q_prime, length);

  const double threshold = params.norm_threshold(length);
  const Box box_q{q, length};
  const Box box_qp{q_prime, length};
  std::vector<char> uniform(static_cast<std::size_t>(realizations), 0);
  std::vector<char> per_energy(static_cast<std::size_t>(realizations), 0);
  std::vector<RegularityVerdict> worst_q(static_cast<std::size_t>(realizations));
  std::vector<RegularityVerdict> worst_qp(static_cast<std::size_t>(realizations));

  auto margin_of = [](const RegularityVerdict& v) {
    return v.guard_ok ? v.measured_norm / std::max(v.threshold, 1e-300)
                      : std::numeric_limits<double>::infinity();
  };

  parallel_for_indexed(realizations, workers, [&](std::int64_t i) {
    const DisorderField field = sample_field(disorder, lattice, i);
    const LatticeOperator op = assemble(lattice, field);
    const BoxRegularityTester test_q(op, box_q);
    const BoxRegularityTester test_qp(op, box_qp);
    bool all_q = true, all_qp = true, every_energy = true;
    RegularityVerdict wq, wqp;
    double mq = -1, mqp = -1;
    for (double e : energies) {
      RegularityVerdict vq = test_q.test(e, threshold, grid);
      RegularityVerdict vqp = test_qp.test(e, threshold, grid);
      all_q = all_q && vq.pass;
      all_qp = all_qp && vqp.pass;
      every_energy = every_energy && (vq.pass || vqp.pass);
      if (margin_of(vq) > mq) { mq = margin_of(vq); wq = std::move(vq); }
      if (margin_of(vqp) > mqp) { mqp = margin_of(vqp); wqp = std::move(vqp); }
    }
    const bool u = all_q || all_qp;
    if (u && !every_energy)
      throw std::logic_error("event inclusion violated: uniform choice without per-energy cover");
    uniform[static_cast<std::size_t>(i)] = u ? 1 : 0;
    per_energy[static_cast<std::size_t>(i)] = every_energy ? 1 : 0;
    wq.pass = all_q;  // record the all-energy conjunction at each center
    wqp.pass = all_qp;
    worst_q[static_cast<std::size_t>(i)] = std::move(wq);
    worst_qp[static_cast<std::size_t>(i)] = std::move(wqp);
  });

  M1Probability out;
  out.uniform_choice = summarize(length, uniform, params.p);
  out.per_energy = summarize(length, per_energy, params.p);
  out.worst_at_q = std::move(worst_q);
  out.worst_at_q_prime = std::move(worst_qp);
  double spacing = 0;
  for (std::size_t i = 1; i < energies.size(); ++i)
    spacing = std::max(spacing, energies[i] - energies[i - 1]);
  out.energy_grid_spacing = spacing;
  return out;
}

void CertificateParams::validate() const {
  if (N <= 4) throw std::invalid_argument("certificate requires N > 4");
  if (S % 2 != 0 || S <= 2 || S >= N - 1)
    throw std::invalid_argument("certificate requires S even with 2 < S < N-1");
}

namespace {

long double chain_excess_log(const CertificateParams& c, long double log_ell) {
  // log of chain value minus log of the L^-m target; <= 0 means the bound holds.
  const long double alpha = c.alpha;
  const long double log_L = std::log(static_cast<long double>(c.N)) + alpha * log_ell;
  const long double frame_exp = (1.0L - 1.0L / alpha) * (c.dimension - 1);
  long double v = c.S * std::log(static_cast<long double>(c.c_tilde) * c.c_dN) +
                  std::log(static_cast<long double>(c.c_tilde));
  v += c.S * (frame_exp * log_L + c.w * log_L - c.m * log_ell);
  v += c.w * log_L;
  return v + c.m * log_L;
}

long double binomial_coefficient(int n, int k) {
  if (k < 0 || k > n) return 0.0L;
  k = std::min(k, n - k);
  long double v = 1.0L;
  for (int i = 1; i <= k; ++i) v = v * (n - k + i) / i;
  return v;
}

}  // namespace

DeterministicCertificate deterministic_certificate(const CertificateParams& params, double ell) {
  params.validate();
  if (!(ell > 1.0)) throw std::invalid_argument("certificate requires ell > 1");
  DeterministicCertificate out;
  out.condition_lhs = (params.S - params.alpha) * params.m;
  out.condition_rhs = params.alpha * (params.S + 1) * params.w +
                      params.S * (params.dimension - 1) * (params.alpha - 1);
  out.condition_ok = out.condition_lhs > out.condition_rhs;
  out.ell = ell;
  out.length = params.N * std::pow(ell, params.alpha);

  const long double excess = chain_excess_log(params, std::log(static_cast<long double>(ell)));
  out.chain_log10 = static_cast<double>(excess / std::log(10.0L));
  out.chain_ok = excess <= 0.0L;

  if (!out.condition_ok) {
    out.smallest_passing_L = std::numeric_limits<double>::infinity();
    return out;
  }
  // Monotone in ell once the exponent condition holds: bracket then bisect.
  long double lo = std::log(1.0L + 1e-9L);
  if (chain_excess_log(params, lo) <= 0.0L) {
    out.smallest_passing_L = params.N * std::pow(std::exp(static_cast<double>(lo)), params.alpha);
    return out;
  }
  long double hi = lo + std::log(2.0L);
  int guard = 0;
  while (chain_excess_log(params, hi) > 0.0L && guard++ < 200) hi += std::log(2.0L);
  if (guard >= 200) {
    out.smallest_passing_L = std::numeric_limits<double>::infinity();
    return out;
  }
  for (int it = 0; it < 200; ++it) {
    const long double mid = 0.5L * (lo + hi);
    if (chain_excess_log(params, mid) > 0.0L) lo = mid;
    else hi = mid;
  }
  const double ell_star = std::exp(static_cast<double>(0.5L * (lo + hi)));
  out.smallest_passing_L = params.N * std::pow(ell_star, params.alpha);
  return out;
}

ProbabilisticCertificate probabilistic_certificate(const CertificateParams& params, double L0) {
  params.validate();
  if (!(L0 > 1.0)) throw std::invalid_argument("certificate requires L0 > 1");
  ProbabilisticCertificate out;
  const int d = params.dimension;
  out.L1 = params.N * std::pow(L0, params.alpha);
  out.hypothesis_lo = (params.theta > params.alpha)
                          ? (params.alpha - 1) * (d - 1) * (params.N - params.S) /
                                (params.theta - params.alpha)
                          : std::numeric_limits<double>::infinity();
  out.hypothesis_hi = params.w - 2.0 * d;
  out.hypothesis_ok = params.p > out.hypothesis_lo && params.p < out.hypothesis_hi;

  const long double L1 = out.L1;
  const long double logL1 = std::log(L1);
  const long double wegner_log =
      (2 * d + 1) * std::log(2.0L) +
      std::log(binomial_coefficient(params.N - 1, params.N - params.S)) +
      std::log(static_cast<long double>(params.C_W)) +
      std::log(static_cast<long double>(params.interval_length)) +
      (-params.w + 2.0L * d) * logL1;
  const long double ptheta_over_alpha =
      static_cast<long double>(params.p) * params.theta / params.alpha;
  const long double comb_log =
      std::log(3.0L) + std::log(static_cast<long double>(params.c_NSd)) +
      ptheta_over_alpha * std::log(static_cast<long double>(params.N)) +
      ((1.0L - 1.0L / params.alpha) * (d - 1) * (params.N - params.S) - ptheta_over_alpha) * logL1;

  out.wegner_term = static_cast<double>(std::exp(wegner_log));
  out.combinatorial_term = static_cast<double>(std::exp(comb_log));
  const long double lower = 1.0L - std::exp(wegner_log) - std::exp(comb_log);
  const long double target = 1.0L - std::exp(-static_cast<long double>(params.p) * logL1);
  out.lower_bound = static_cast<double>(lower);
  out.target = static_cast<double>(target);
  out.pass = lower >= target;
  out.deficit = static_cast<double>(target - lower);
  return out;
}

}  // namespace dynloc
