#pragma once

#include <span>

namespace dynloc {

// Composite Simpson over samples f(j*h), j = 0..last. An odd interval count
// falls back to Simpson plus a 3/8 tail.
double simpson_prefix(std::span<const double> values, double step, int last);

// Trapezoid rule over the whole sample span.
double trapezoid(std::span<const double> values, double step);

// Trapezoid on every second sample (step doubled); needs >= 3 samples.
double trapezoid_coarse(std::span<const double> values, double step);

struct QuadratureEstimate {
  double value = 0;
  double refinement_error = 0;  // |fine - coarse| based estimate
};

QuadratureEstimate trapezoid_with_error(std::span<const double> values, double step);
QuadratureEstimate simpson_with_error(std::span<const double> values, double step, int last);

}  // namespace dynloc
