#include "dynloc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dynloc/rng.hpp"

namespace dynloc {

MeanSe mean_se(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("mean of empty sample");
  MeanSe r;
  for (double x : v) r.mean += x;
  r.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0;
    for (double x : v) ss += (x - r.mean) * (x - r.mean);
    r.se = std::sqrt(ss / (static_cast<double>(v.size()) - 1.0) / static_cast<double>(v.size()));
  }
  return r;
}

double sample_std(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  double m = 0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / (static_cast<double>(v.size()) - 1.0));
}

OlsFit ols(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("ols needs >= 2 paired points");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0) throw std::invalid_argument("ols abscissae are degenerate");
  OlsFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

namespace {

// log of the binomial survival P(X >= x) for X ~ Bin(n, p), stable summation.
double binomial_tail_geq(std::int64_t n, std::int64_t x, double p) {
  if (x <= 0) return 1.0;
  if (x > n) return 0.0;
  if (p <= 0) return 0.0;
  if (p >= 1) return 1.0;
  // Sum pmf from k = x..n in log space against the max term.
  const double lp = std::log(p), lq = std::log1p(-p);
  auto log_pmf = [&](std::int64_t k) {
    return std::lgamma(static_cast<double>(n) + 1) - std::lgamma(static_cast<double>(k) + 1) -
           std::lgamma(static_cast<double>(n - k) + 1) + static_cast<double>(k) * lp +
           static_cast<double>(n - k) * lq;
  };
  double lmax = -1e300;
  for (std::int64_t k = x; k <= n; ++k) lmax = std::max(lmax, log_pmf(k));
  double s = 0;
  for (std::int64_t k = x; k <= n; ++k) s += std::exp(log_pmf(k) - lmax);
  return std::exp(lmax) * s;
}

}  // namespace

Interval clopper_pearson(std::int64_t n, std::int64_t x, double confidence) {
  if (n <= 0 || x < 0 || x > n) throw std::invalid_argument("bad binomial sample");
  const double alpha = 1.0 - confidence;
  Interval iv;
  if (x == 0) {
    iv.lo = 0.0;
  } else {
    // Largest p with P(X >= x | p) <= alpha/2.
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (binomial_tail_geq(n, x, mid) < alpha / 2) lo = mid;
      else hi = mid;
    }
    iv.lo = 0.5 * (lo + hi);
  }
  if (x == n) {
    iv.hi = 1.0;
  } else {
    // Smallest p with P(X <= x | p) <= alpha/2.
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double tail_leq = 1.0 - binomial_tail_geq(n, x + 1, mid);
      if (tail_leq > alpha / 2) lo = mid;
      else hi = mid;
    }
    iv.hi = 0.5 * (lo + hi);
  }
  return iv;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks needs nonempty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j]) ++i;
    else ++j;
    const double fa = static_cast<double>(i) / static_cast<double>(a.size());
    const double fb = static_cast<double>(j) / static_cast<double>(b.size());
    d = std::max(d, std::abs(fa - fb));
  }
  return d;
}

std::vector<std::vector<int>> bootstrap_indices(int count, int resamples, std::uint64_t seed) {
  std::vector<std::vector<int>> out(static_cast<std::size_t>(resamples));
  for (int r = 0; r < resamples; ++r) {
    SplitMix rng(keyed_hash(seed, static_cast<std::uint64_t>(r), 0xb007u));
    auto& row = out[static_cast<std::size_t>(r)];
    row.resize(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
      row[static_cast<std::size_t>(i)] = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(count)));
  }
  return out;
}

}  // namespace dynloc
