#include "dynloc/disorder.hpp"

#include <cmath>
#include <stdexcept>

#include "dynloc/rng.hpp"

namespace dynloc {

std::string to_string(DisorderKind k) {
  switch (k) {
    case DisorderKind::IidUniform: return "iid-uniform";
    case DisorderKind::IidDensity: return "iid-density";
    case DisorderKind::CorrelatedMovingAverage: return "correlated-moving-average";
  }
  return "?";
}

namespace {

double density_integral(const DensityTable& t) {
  double s = 0;
  for (std::size_t i = 0; i + 1 < t.x.size(); ++i) {
    s += 0.5 * (t.f[i] + t.f[i + 1]) * (t.x[i + 1] - t.x[i]);
  }
  return s;
}

// Inverse CDF of a piecewise-linear density, exact per cell.
double density_quantile(const DensityTable& t, double u) {
  double target = u;
  for (std::size_t i = 0; i + 1 < t.x.size(); ++i) {
    const double dx = t.x[i + 1] - t.x[i];
    const double w = 0.5 * (t.f[i] + t.f[i + 1]) * dx;
    if (target > w && i + 2 < t.x.size()) {
      target -= w;
      continue;
    }
    if (w <= 0) continue;
    const double slope = (t.f[i + 1] - t.f[i]) / dx;
    double step;
    if (std::abs(slope) < 1e-14 * std::max(1.0, std::abs(t.f[i]))) {
      step = target / std::max(t.f[i], 1e-300);
    } else {
      const double disc = t.f[i] * t.f[i] + 2.0 * slope * target;
      step = (-t.f[i] + std::sqrt(std::max(disc, 0.0))) / slope;
    }
    return t.x[i] + std::min(std::max(step, 0.0), dx);
  }
  return t.x.back();
}

std::uint64_t pack_site(const Site& s) {
  // 21 bits per axis, offset to stay nonnegative.
  const std::uint64_t off = 1u << 20;
  return (static_cast<std::uint64_t>(s[0] + static_cast<int>(off))) |
         (static_cast<std::uint64_t>(s[1] + static_cast<int>(off)) << 21) |
         (static_cast<std::uint64_t>(s[2] + static_cast<int>(off)) << 42);
}

}  // namespace

void DisorderSpec::validate() const {
  if (half_width <= 0) throw std::invalid_argument("disorder half-width must be positive");
  if (correlation_radius < 0) throw std::invalid_argument("correlation radius must be >= 0");
  if (kind == DisorderKind::CorrelatedMovingAverage && correlation_radius == 0)
    throw std::invalid_argument("correlated disorder requires correlation radius >= 1");
  if (kind != DisorderKind::CorrelatedMovingAverage && correlation_radius != 0)
    throw std::invalid_argument("iid disorder requires correlation radius 0");
  if (kind == DisorderKind::IidDensity) {
    if (density.x.size() < 2 || density.x.size() != density.f.size())
      throw std::invalid_argument("density table needs matching x/f arrays with >= 2 nodes");
    for (std::size_t i = 0; i + 1 < density.x.size(); ++i)
      if (density.x[i + 1] <= density.x[i])
        throw std::invalid_argument("density table x values must increase");
    for (double v : density.f)
      if (v < 0) throw std::invalid_argument("density values must be nonnegative");
    if (std::abs(density_integral(density) - 1.0) > 1e-10)
      throw std::invalid_argument("density table does not integrate to 1 within 1e-10");
    if (density.x.front() < -half_width || density.x.back() > half_width)
      throw std::invalid_argument("density support exceeds the configured half-width");
  }
}

double DisorderSpec::kernel_weight(int dimension) const {
  if (correlation_radius == 0) return 1.0;
  double cells = 1.0;
  for (int a = 0; a < dimension; ++a) cells *= (2 * correlation_radius + 1);
  return 1.0 / cells;
}

double base_sample(const DisorderSpec& spec, std::int64_t index, const Site& site) {
  const std::uint64_t bits =
      keyed_hash(spec.master_seed, static_cast<std::uint64_t>(index), pack_site(site),
                 static_cast<std::uint64_t>(spec.kind));
  const double u = u01(bits);
  if (spec.kind == DisorderKind::IidDensity) return density_quantile(spec.density, u);
  return spec.half_width * (2.0 * u - 1.0);
}

double coupling_at(const DisorderSpec& spec, int dimension, std::int64_t index, const Site& site) {
  const int r = spec.correlation_radius;
  if (r == 0) return base_sample(spec, index, site);
  const double c = spec.kernel_weight(dimension);
  double v = 0;
  Site n = site;
  for (int d2 = (dimension > 2 ? -r : 0); d2 <= (dimension > 2 ? r : 0); ++d2)
    for (int d1 = (dimension > 1 ? -r : 0); d1 <= (dimension > 1 ? r : 0); ++d1)
      for (int d0 = -r; d0 <= r; ++d0) {
        n = {site[0] + d0, site[1] + d1, site[2] + d2};
        v += c * base_sample(spec, index, n);
      }
  return v;
}

DisorderField sample_field(const DisorderSpec& spec, const LatticeSpec& lattice,
                           std::int64_t index) {
  spec.validate();
  if (index < 0 || index >= spec.sample_count)
    throw std::out_of_range("realization index out of range for disorder spec");
  DisorderField field;
  field.realization = index;
  field.master_seed = spec.master_seed;
  field.spec_label = to_string(spec.kind) + " M=" + std::to_string(spec.half_width) +
                     " r=" + std::to_string(spec.correlation_radius);
  field.values.resize(static_cast<std::size_t>(lattice.site_count()));
  for (std::int64_t i = 0; i < lattice.site_count(); ++i) {
    field.values[static_cast<std::size_t>(i)] =
        coupling_at(spec, lattice.dimension, index, lattice.site_of(i));
  }
  return field;
}

CorrelationDiagnostic correlation_diagnostic(const DisorderSpec& spec, int dimension, int max_lag,
                                             std::int64_t samples) {
  spec.validate();
  if (samples < 100) throw std::invalid_argument("correlation diagnostic needs >= 100 samples");
  CorrelationDiagnostic diag;
  const Site origin{0, 0, 0};
  std::vector<std::vector<double>> at_lag(static_cast<std::size_t>(max_lag) + 1);
  std::vector<double> at_origin;
  at_origin.reserve(static_cast<std::size_t>(samples));
  for (auto& v : at_lag) v.reserve(static_cast<std::size_t>(samples));
  for (std::int64_t i = 0; i < samples; ++i) {
    at_origin.push_back(coupling_at(spec, dimension, i, origin));
    for (int k = 0; k <= max_lag; ++k) {
      at_lag[static_cast<std::size_t>(k)].push_back(
          coupling_at(spec, dimension, i, make_site(k)));
    }
  }
  auto mean = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  const double m0 = mean(at_origin);
  double var0 = 0;
  for (double x : at_origin) var0 += (x - m0) * (x - m0);
  for (int k = 0; k <= max_lag; ++k) {
    const auto& v = at_lag[static_cast<std::size_t>(k)];
    const double mk = mean(v);
    double cov = 0, vark = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      cov += (at_origin[i] - m0) * (v[i] - mk);
      vark += (v[i] - mk) * (v[i] - mk);
    }
    const double rho = (k == 0) ? 1.0 : cov / std::sqrt(var0 * vark);
    diag.lags.push_back(k);
    diag.estimate.push_back(rho);
    diag.std_error.push_back(k == 0 ? 0.0
                                    : (1.0 - rho * rho) / std::sqrt(static_cast<double>(samples)));
  }
  return diag;
}

double kernel_autocorrelation(const DisorderSpec& spec, int /*dimension*/, int lag) {
  const int r = spec.correlation_radius;
  if (lag == 0) return 1.0;
  if (r == 0) return 0.0;
  const int k = std::abs(lag);
  if (k > 2 * r) return 0.0;
  // Uniform kernel: axis-0 overlap ratio; the transverse axes cancel.
  return static_cast<double>(2 * r + 1 - k) / static_cast<double>(2 * r + 1);
}

}  // namespace dynloc
