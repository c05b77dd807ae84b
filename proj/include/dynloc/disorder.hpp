#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dynloc/lattice.hpp"

namespace dynloc {

enum class DisorderKind { IidUniform, IidDensity, CorrelatedMovingAverage };

std::string to_string(DisorderKind k);

// Tabulated probability density on [x.front(), x.back()], piecewise linear
// between nodes. Must be nonnegative and integrate to 1 within 1e-10.
struct DensityTable {
  std::vector<double> x;
  std::vector<double> f;
};

struct DisorderSpec {
  DisorderKind kind = DisorderKind::IidUniform;
  double half_width = 1.0;       // support half-width M of the base variable
  int correlation_radius = 0;    // kernel window radius r (sites); 0 for iid
  std::uint64_t master_seed = 1;
  std::int64_t sample_count = 1'000'000;
  DensityTable density;          // used by IidDensity only

  void validate() const;
  // Normalized uniform moving-average kernel weight (1/(2r+1)^d); 1 for iid.
  double kernel_weight(int dimension) const;
};

// One realization of the on-site coupling field.
struct DisorderField {
  std::int64_t realization = 0;
  std::vector<double> values;  // lattice site index -> coupling
  std::uint64_t master_seed = 0;
  std::string spec_label;
};

// Base noise xi at an arbitrary Z^d site, a pure function of
// (spec, realization index, site). The moving-average field is a kernel sum
// of these, so couplings at l-infinity distance > 2r are exactly independent.
double base_sample(const DisorderSpec& spec, std::int64_t index, const Site& site);

// Coupling value at an arbitrary Z^d site (kernel sum of base samples).
double coupling_at(const DisorderSpec& spec, int dimension, std::int64_t index, const Site& site);

// Field on the lattice window. Deterministic in (spec, index); independent of
// concurrency and generation order.
DisorderField sample_field(const DisorderSpec& spec, const LatticeSpec& lattice, std::int64_t index);

struct CorrelationDiagnostic {
  std::vector<int> lags;
  std::vector<double> estimate;   // empirical correlation of (lambda_0, lambda_{lag e1})
  std::vector<double> std_error;  // 1-sigma
};

// Monte Carlo lag correlations along axis 0 with 1-sigma errors.
CorrelationDiagnostic correlation_diagnostic(const DisorderSpec& spec, int dimension, int max_lag,
                                             std::int64_t samples);

// Exact autocorrelation of the uniform moving-average kernel at a given axis
// lag (1 for iid at lag 0, 0 beyond 2r).
double kernel_autocorrelation(const DisorderSpec& spec, int dimension, int lag);

}  // namespace dynloc
