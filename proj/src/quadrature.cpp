#include "dynloc/quadrature.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace dynloc {

namespace {

double simpson_even(std::span<const double> f, double h, int last) {
  // last must be even and >= 2
  double s = f[0] + f[static_cast<std::size_t>(last)];
  for (int j = 1; j < last; j += 2) s += 4.0 * f[static_cast<std::size_t>(j)];
  for (int j = 2; j < last; j += 2) s += 2.0 * f[static_cast<std::size_t>(j)];
  return s * h / 3.0;
}

}  // namespace

double simpson_prefix(std::span<const double> f, double h, int last) {
  if (last < 0 || static_cast<std::size_t>(last) >= f.size())
    throw std::invalid_argument("simpson prefix index out of range");
  if (last == 0) return 0.0;
  if (last == 1) return 0.5 * h * (f[0] + f[1]);
  if (last % 2 == 0) return simpson_even(f, h, last);
  if (last == 3) {
    return 3.0 * h / 8.0 * (f[0] + 3.0 * f[1] + 3.0 * f[2] + f[3]);
  }
  const int head = last - 3;
  double s = head > 0 ? simpson_even(f, h, head) : 0.0;
  s += 3.0 * h / 8.0 *
       (f[static_cast<std::size_t>(head)] + 3.0 * f[static_cast<std::size_t>(head + 1)] +
        3.0 * f[static_cast<std::size_t>(head + 2)] + f[static_cast<std::size_t>(head + 3)]);
  return s;
}

double trapezoid(std::span<const double> f, double h) {
  if (f.size() < 2) return 0.0;
  double s = 0.5 * (f.front() + f.back());
  for (std::size_t j = 1; j + 1 < f.size(); ++j) s += f[j];
  return s * h;
}

double trapezoid_coarse(std::span<const double> f, double h) {
  if (f.size() < 3) return trapezoid(f, h);
  const std::size_t last = f.size() - 1 - ((f.size() - 1) % 2);
  double s = 0.5 * (f[0] + f[last]);
  for (std::size_t j = 2; j + 1 < last + 1; j += 2) s += f[j];
  double v = s * 2.0 * h;
  // Tail interval left over when the sample count is even.
  if (last + 1 < f.size()) v += 0.5 * h * (f[last] + f[last + 1]);
  return v;
}

QuadratureEstimate trapezoid_with_error(std::span<const double> f, double h) {
  QuadratureEstimate q;
  q.value = trapezoid(f, h);
  const double coarse = trapezoid_coarse(f, h);
  q.refinement_error = std::abs(q.value - coarse) / 3.0;
  return q;
}

QuadratureEstimate simpson_with_error(std::span<const double> f, double h, int last) {
  QuadratureEstimate q;
  q.value = simpson_prefix(f, h, last);
  // Coarse estimate on the largest even-even prefix with doubled step.
  if (last >= 4) {
    int coarse_last = last - (last % 2);
    if ((coarse_last / 2) % 2 != 0) coarse_last -= 2;
    if (coarse_last >= 4) {
      std::vector<double> sub;
      sub.reserve(static_cast<std::size_t>(coarse_last / 2) + 1);
      for (int j = 0; j <= coarse_last; j += 2) sub.push_back(f[static_cast<std::size_t>(j)]);
      const double coarse = simpson_prefix(sub, 2.0 * h, coarse_last / 2);
      const double fine = simpson_prefix(f, h, coarse_last);
      const double scale = coarse_last > 0 ? static_cast<double>(last) / coarse_last : 1.0;
      q.refinement_error = std::abs(fine - coarse) / 15.0 * scale;
    }
  }
  return q;
}

}  // namespace dynloc
