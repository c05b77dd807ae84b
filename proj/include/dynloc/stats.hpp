#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace dynloc {

struct MeanSe {
  double mean = 0;
  double se = 0;  // standard error of the mean
};

MeanSe mean_se(std::span<const double> values);

struct OlsFit {
  double slope = 0;
  double intercept = 0;
  double r2 = 1;
};

OlsFit ols(std::span<const double> x, std::span<const double> y);

struct Interval {
  double lo = 0;
  double hi = 1;
};

// Exact (Clopper-Pearson) two-sided binomial confidence interval.
Interval clopper_pearson(std::int64_t trials, std::int64_t successes, double confidence = 0.95);

// Two-sample Kolmogorov-Smirnov statistic.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

// Bootstrap indices: `resamples` draws of `count` indices with replacement,
// derived from a fixed sub-seed.
std::vector<std::vector<int>> bootstrap_indices(int count, int resamples, std::uint64_t seed);

double sample_std(std::span<const double> values);

}  // namespace dynloc
