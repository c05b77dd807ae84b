#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dynloc/disorder.hpp"
#include "dynloc/green.hpp"
#include "dynloc/lattice.hpp"

namespace dynloc {

// Super-geometric length scales L_k = L0^(alpha^k), kept real valued; box
// radii are taken from these directly (membership discretizes, the schedule
// does not).
struct ScaleSchedule {
  double L0 = 0;
  double alpha = 0;
  int depth = 0;
  std::vector<double> lengths;  // size depth+1
};

ScaleSchedule make_schedule(double L0, double alpha, int depth);

// Scale index k >= 1 with exp(L_{k-1}^nu) <= 1/eps < exp(L_k^nu). Throws when
// eps falls outside the range the schedule covers.
int scale_for_epsilon(const ScaleSchedule& schedule, double nu, double eps);

// Upper bound alpha*(d+2)/n on the upper diffusion exponent under algebraic
// threshold decay; hypothesis_ok reports n > alpha*(d+2).
double algebraic_decay_exponent_bound(double alpha, int d, double n, bool* hypothesis_ok = nullptr);

enum class MsaVariant { UniformEnergy, FixedEnergy };  // (all E in I) vs (single E)

enum class ThresholdKind { StretchedExponential, PowerLaw, Algebraic };

// Threshold family rho and the exponent bookkeeping of the two multi-scale
// assumptions. Violated exponent hypotheses are reported, never silently
// accepted.
struct MsaParams {
  MsaVariant variant = MsaVariant::FixedEnergy;
  ThresholdKind rho = ThresholdKind::PowerLaw;
  int dimension = 1;
  double p = 2.0;
  double nu = 0.5;     // StretchedExponential: rho(L) = exp(-2 L^nu)
  double m = 5.0;      // PowerLaw: rho(L) = L^-m
  double n = 9.0;      // Algebraic: rho(L) = c_n L^-2n
  double c_n = 1.0;
  double beta = 1.0;   // FixedEnergy exponent bookkeeping
  double alpha = 1.5;

  double rho_value(double length) const;
  double norm_threshold(double length) const;  // rho(L)^{1/2}
  // Hypothesis on p for the selected variant; a human-readable description
  // accompanies the flag.
  bool exponents_ok(std::string* description = nullptr) const;
};

struct ScaleProbability {
  double length = 0;
  int samples = 0;
  int passes = 0;
  double fraction = 0;
  double ci_lo = 0;
  double ci_hi = 1;
  double bound = 0;  // 1 - L^-p
  bool verdict = false;  // ci_lo >= bound
  std::vector<RegularityVerdict> per_realization;  // index order (M2 path)
};

// Monte Carlo estimate of the fixed-energy regularity probability at scale k:
// fields are sampled per realization, the box at q is tested at the given
// energy, and the exact binomial interval is compared to 1 - L_k^-p.
ScaleProbability estimate_m2_probability(const LatticeSpec& lattice, const DisorderSpec& disorder,
                                         const MsaParams& params, const ScaleSchedule& schedule,
                                         int k, double energy, const Site& q, int realizations,
                                         const EpsProbeGrid& grid, int workers = 1);

struct M1Probability {
  ScaleProbability uniform_choice;   // one center works for every energy
  ScaleProbability per_energy;       // a center may be chosen per energy
  double energy_grid_spacing = 0;
  // Worst-over-the-window verdict per realization at each center; pass means
  // the all-energy conjunction held there.
  std::vector<RegularityVerdict> worst_at_q;
  std::vector<RegularityVerdict> worst_at_q_prime;
};

// Uniform-in-energy variant over an explicit energy grid and a center pair.
// Both event readings are reported; uniform-choice implies per-energy, which
// is asserted realization by realization.
M1Probability estimate_m1_probability(const LatticeSpec& lattice, const DisorderSpec& disorder,
                                      const MsaParams& params, const ScaleSchedule& schedule,
                                      int k, const std::vector<double>& energies, const Site& q,
                                      const Site& q_prime, int realizations,
                                      const EpsProbeGrid& grid, int workers = 1);

// User-supplied constants of the scale-step certificates. The combinatorial
// constants are inputs, never derived.
struct CertificateParams {
  double alpha = 1.5;
  double m = 33;
  double w = 8;
  int S = 4;
  int N = 14;
  int dimension = 1;
  double K0 = 10;
  double theta = 3;
  double p = 5.5;
  double C_W = 1;
  double interval_length = 1;
  double c_NSd = 1;     // c(N,S,d)
  double c_dN = 1;      // frame cardinality constant
  double c_tilde = 1;   // boundary-commutator constant

  void validate() const;  // S even, 2 < S < N-1, N > 4
};

struct DeterministicCertificate {
  bool condition_ok = false;     // (S-alpha) m > alpha (S+1) w + S (d-1)(alpha-1)
  double condition_lhs = 0;
  double condition_rhs = 0;
  double ell = 0;
  double length = 0;             // L = N ell^alpha
  double chain_log10 = 0;        // log10 of chain value / L^-m
  bool chain_ok = false;         // chain value <= L^-m
  double smallest_passing_L = 0; // infinity when the condition fails
};

DeterministicCertificate deterministic_certificate(const CertificateParams& params, double ell);

struct ProbabilisticCertificate {
  bool hypothesis_ok = false;  // (alpha-1)(d-1)(N-S)/(theta-alpha) < p < w-2d
  double hypothesis_lo = 0;
  double hypothesis_hi = 0;
  double L1 = 0;               // N * L0^alpha
  double wegner_term = 0;
  double combinatorial_term = 0;
  double lower_bound = 0;      // 1 - wegner - combinatorial
  double target = 0;           // 1 - L1^-p
  bool pass = false;
  double deficit = 0;          // target - lower_bound (negative when passing)
};

ProbabilisticCertificate probabilistic_certificate(const CertificateParams& params, double L0);

}  // namespace dynloc
