#include "dynloc/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dynloc {

LatticeSpec::LatticeSpec(int d, int n) : dimension(d), extent(n) {
  if (d < 1 || d > 3) throw std::invalid_argument("lattice dimension must be 1, 2 or 3");
  if (n < 3) throw std::invalid_argument("lattice extent must be at least 3");
  if (n % 2 == 0) throw std::invalid_argument("lattice extent must be odd (window centered at origin)");
}

std::int64_t LatticeSpec::site_count() const {
  std::int64_t n = 1;
  for (int a = 0; a < dimension; ++a) n *= extent;
  return n;
}

bool LatticeSpec::contains(const Site& s) const {
  const int h = half();
  for (int a = 0; a < 3; ++a) {
    if (a < dimension) {
      if (s[a] < -h || s[a] > h) return false;
    } else if (s[a] != 0) {
      return false;
    }
  }
  return true;
}

std::int64_t LatticeSpec::index_of(const Site& s) const {
  if (!contains(s)) throw std::out_of_range("site outside lattice window");
  const int h = half();
  std::int64_t idx = 0;
  std::int64_t stride = 1;
  for (int a = 0; a < dimension; ++a) {
    idx += stride * (s[a] + h);
    stride *= extent;
  }
  return idx;
}

Site LatticeSpec::site_of(std::int64_t index) const {
  if (index < 0 || index >= site_count()) throw std::out_of_range("site index out of range");
  const int h = half();
  Site s{0, 0, 0};
  for (int a = 0; a < dimension; ++a) {
    s[a] = static_cast<int>(index % extent) - h;
    index /= extent;
  }
  return s;
}

bool Box::contains(const Site& s, int dimension) const {
  for (int a = 0; a < dimension; ++a) {
    if (std::abs(static_cast<double>(s[a]) - center[a]) > radius) return false;
  }
  return true;
}

std::vector<BoundaryPair> boundary_pairs(const Box& box, const LatticeSpec& lattice) {
  if (box.radius <= 0) throw std::invalid_argument("box radius must be positive");
  const int r = static_cast<int>(box.radius);
  const int h = lattice.half();
  for (int a = 0; a < lattice.dimension; ++a) {
    if (box.center[a] - r - 1 < -h || box.center[a] + r + 1 > h) {
      throw std::invalid_argument(
          "box touches the lattice boundary: no exterior site layer (center axis " +
          std::to_string(a) + ", radius " + std::to_string(box.radius) + ", extent " +
          std::to_string(lattice.extent) + ")");
    }
  }

  std::vector<BoundaryPair> pairs;
  for (std::int64_t i : box_site_indices(box, lattice)) {
    const Site u = lattice.site_of(i);
    for (int a = 0; a < lattice.dimension; ++a) {
      for (int dir : {-1, +1}) {
        Site v = u;
        v[a] += dir;
        if (!box.contains(v, lattice.dimension)) pairs.push_back({u, v});
      }
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const BoundaryPair& p, const BoundaryPair& q) {
    if (p.inside != q.inside) return p.inside < q.inside;
    return p.outside < q.outside;
  });
  return pairs;
}

std::vector<double> position_second_moment_weights(const LatticeSpec& lattice) {
  std::vector<double> w(static_cast<std::size_t>(lattice.site_count()));
  for (std::int64_t i = 0; i < lattice.site_count(); ++i) {
    const Site s = lattice.site_of(i);
    double v = 0;
    for (int a = 0; a < lattice.dimension; ++a) v += static_cast<double>(s[a]) * s[a];
    w[static_cast<std::size_t>(i)] = v;
  }
  return w;
}

std::vector<double> axis_coordinates(const LatticeSpec& lattice, int axis) {
  if (axis < 0 || axis >= lattice.dimension) throw std::invalid_argument("axis out of range");
  std::vector<double> c(static_cast<std::size_t>(lattice.site_count()));
  for (std::int64_t i = 0; i < lattice.site_count(); ++i) {
    c[static_cast<std::size_t>(i)] = lattice.site_of(i)[axis];
  }
  return c;
}

std::vector<std::int64_t> box_site_indices(const Box& box, const LatticeSpec& lattice) {
  std::vector<std::int64_t> indices;
  const int r = static_cast<int>(box.radius);
  const int h = lattice.half();
  Site s{0, 0, 0};
  auto clamplo = [&](int a) { return std::max(box.center[a] - r, -h); };
  auto clamphi = [&](int a) { return std::min(box.center[a] + r, h); };
  const int lo0 = clamplo(0), hi0 = clamphi(0);
  const int lo1 = lattice.dimension > 1 ? clamplo(1) : 0, hi1 = lattice.dimension > 1 ? clamphi(1) : 0;
  const int lo2 = lattice.dimension > 2 ? clamplo(2) : 0, hi2 = lattice.dimension > 2 ? clamphi(2) : 0;
  for (int x2 = lo2; x2 <= hi2; ++x2)
    for (int x1 = lo1; x1 <= hi1; ++x1)
      for (int x0 = lo0; x0 <= hi0; ++x0) {
        s = {x0, x1, x2};
        if (box.contains(s, lattice.dimension)) indices.push_back(lattice.index_of(s));
      }
  std::sort(indices.begin(), indices.end());
  if (indices.empty()) throw std::invalid_argument("box contains no lattice sites");
  return indices;
}

}  // namespace dynloc
