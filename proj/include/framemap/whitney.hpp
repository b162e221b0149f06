#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "framemap/geometry.hpp"
#include "framemap/vec.hpp"

namespace framemap {

/// One cube of the dyadic decomposition of D = (-3,3)^n.
///
/// Generation 1 is the central cube (-1,1)^n. For k >= 2, generation k cubes
/// have side 2^(2-k) and tile the closed shell between the nested cubes
/// ((-3+2^(3-k)),(3-2^(3-k)))^n and ((-3+2^(2-k)),(3-2^(2-k)))^n, which is
/// exactly one cube thick. `idx` are the per-coordinate grid indices at that
/// side length (cell j spans [idx_j*side, (idx_j+1)*side)); unused for the
/// central cube.
struct DyadicCube {
  int dim = 0;
  int generation = 1;
  std::array<std::int64_t, kMaxDim> idx{};

  bool central() const { return generation == 1; }
  double side() const;
  double half_side() const { return 0.5 * side(); }
  VecN center() const;
  bool operator==(const DyadicCube&) const = default;
};

enum class NeighborKind { Same, Larger, Smaller, Outer };

std::string to_string(NeighborKind k);

/// (inner, outer) half-widths of the shell occupied by generation k:
/// (0, 1) for k = 1 and (3-2^(3-k), 3-2^(2-k)) for k >= 2.
std::pair<double, double> ring_bounds(int k);

/// Number of generation-k cubes, k >= 2:
/// (3*2^(k-1)-2)^n - (3*2^(k-1)-4)^n. Throws CountOverflow when the exact
/// value does not fit 128 bits.
unsigned __int128 ring_cube_count(int k, int n);

std::string count_to_string(unsigned __int128 v);

/// Cube whose half-open cell contains x arithmetically: shell index from
/// ||x||, then per-coordinate grid index (lower-closed, upper-open), with a
/// deterministic fix-up for points exactly on a shell's inner grid plane
/// from the negative side. Throws OutOfDomain for ||x|| >= 3 and
/// DepthExceeded when the containing generation exceeds k_max.
DyadicCube locate(const VecN& x, int k_max);

/// Classify a face by the generation of the cubes across it, by probing a
/// point half a cube beyond the face. The central cube yields Smaller on
/// every face.
NeighborKind face_neighbor_kind(const DyadicCube& cube, const ConeId& face, int k_max);

/// All cubes of generation k (for tests; k small).
std::vector<DyadicCube> enumerate_ring(int k, int n);

/// Number of generation-k cubes having exactly f coordinates in the shell's
/// outermost grid layer (f = 1 face cubes, f = 2 edge cubes, ...). Such a
/// cube has exactly f Smaller faces.
unsigned __int128 ring_cube_count_by_extreme(int k, int n, int f);

}  // namespace framemap
