#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace dynloc {

// A lattice site. Unused trailing axes are held at zero.
using Site = std::array<int, 3>;

inline Site make_site(int x0, int x1 = 0, int x2 = 0) { return {x0, x1, x2}; }

// Finite centered window of Z^d: coordinates in [-half, half] on each axis,
// extent = 2*half+1 sites per side. Indexing runs axis 0 fastest, so that in
// d=1 consecutive indices are nearest neighbors.
struct LatticeSpec {
  int dimension = 1;
  int extent = 65;

  LatticeSpec() = default;
  LatticeSpec(int d, int n);

  int half() const { return (extent - 1) / 2; }
  std::int64_t site_count() const;
  bool contains(const Site& s) const;
  std::int64_t index_of(const Site& s) const;
  Site site_of(std::int64_t index) const;
};

// Box Lambda_L(q): membership test max_j |x_j - q_j| <= radius on integer
// sites. The radius is real-valued; only membership is discretized.
struct Box {
  Site center{0, 0, 0};
  double radius = 0.0;

  bool contains(const Site& s, int dimension) const;
  // Number of distinct coordinates per axis a box row spans when fully inside
  // the lattice: 2*floor(radius)+1.
  int side_sites() const { return 2 * static_cast<int>(radius) + 1; }
};

// Ordered crossing bond (u inside, u' outside, unit l1-distance).
struct BoundaryPair {
  Site inside;
  Site outside;
};

// All nearest-neighbor bonds crossing the box face, ordered lexicographically
// by (inside, outside). Throws if the box has no full exterior site layer
// inside the lattice window.
std::vector<BoundaryPair> boundary_pairs(const Box& box, const LatticeSpec& lattice);

// Weight |x|^2 = sum_j x_j^2 at every site, indexed like the lattice.
std::vector<double> position_second_moment_weights(const LatticeSpec& lattice);

// Coordinate x_axis at every site.
std::vector<double> axis_coordinates(const LatticeSpec& lattice, int axis);

// Indices of lattice sites inside the box, ascending.
std::vector<std::int64_t> box_site_indices(const Box& box, const LatticeSpec& lattice);

}  // namespace dynloc
