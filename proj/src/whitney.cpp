#include "framemap/whitney.hpp"

#include <cmath>

namespace framemap {

namespace {

// outer(k)/side(k) = 3*2^(k-2) - 1 for k >= 2.
std::int64_t outer_units(int k) { return 3 * (std::int64_t{1} << (k - 2)) - 1; }

unsigned __int128 checked_pow(unsigned __int128 base, int e) {
  unsigned __int128 r = 1;
  for (int i = 0; i < e; ++i) {
    if (base != 0 && r > (~static_cast<unsigned __int128>(0)) / base)
      throw CountOverflow("ring cube count exceeds 128 bits");
    r *= base;
  }
  return r;
}

}  // namespace

double DyadicCube::side() const { return generation == 1 ? 2.0 : std::ldexp(1.0, 2 - generation); }

VecN DyadicCube::center() const {
  VecN c = VecN::Zero(dim);
  if (central()) return c;
  const double s = side();
  for (int j = 0; j < dim; ++j) c[j] = (static_cast<double>(idx[j]) + 0.5) * s;
  return c;
}

std::string to_string(NeighborKind k) {
  switch (k) {
    case NeighborKind::Same: return "same";
    case NeighborKind::Larger: return "larger";
    case NeighborKind::Smaller: return "smaller";
    case NeighborKind::Outer: return "outer";
  }
  return "?";
}

std::pair<double, double> ring_bounds(int k) {
  if (k < 1) throw ValidationError("ring_bounds: k must be >= 1");
  if (k == 1) return {0.0, 1.0};
  return {3.0 - std::ldexp(1.0, 3 - k), 3.0 - std::ldexp(1.0, 2 - k)};
}

unsigned __int128 ring_cube_count(int k, int n) {
  if (k < 2) throw ValidationError("ring_cube_count: k must be >= 2");
  if (n < 1) throw ValidationError("ring_cube_count: n must be >= 1");
  if (k - 1 > 120) throw CountOverflow("ring cube count exceeds 128 bits");
  const unsigned __int128 a = 3 * (static_cast<unsigned __int128>(1) << (k - 1)) - 2;
  return checked_pow(a, n) - checked_pow(a - 2, n);
}

std::string count_to_string(unsigned __int128 v) {
  if (v == 0) return "0";
  std::string s;
  while (v > 0) {
    s.insert(s.begin(), static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  return s;
}

unsigned __int128 ring_cube_count_by_extreme(int k, int n, int f) {
  if (f < 1 || f > n) throw ValidationError("ring_cube_count_by_extreme: f out of range");
  if (k < 2) throw ValidationError("ring_cube_count_by_extreme: k must be >= 2");
  // C(n,f) * 2^f * (2U-2)^(n-f), U grid cells per half-axis.
  unsigned __int128 binom = 1;
  for (int i = 0; i < f; ++i) binom = binom * static_cast<unsigned>(n - i) / static_cast<unsigned>(i + 1);
  const unsigned __int128 interior = 2 * static_cast<unsigned __int128>(outer_units(k)) - 2;
  return binom * checked_pow(2, f) * checked_pow(interior, n - f);
}

DyadicCube locate(const VecN& x, int k_max) {
  const int n = static_cast<int>(x.size());
  const double m = inf_norm(x);
  if (m >= 3.0) throw OutOfDomain("locate: ||x|| >= 3");
  DyadicCube cube;
  cube.dim = n;
  if (m < 1.0) return cube;  // central, generation 1

  // Generation from the shell radii: 3-2^(3-k) <= m < 3-2^(2-k).
  int k = 3 - static_cast<int>(std::ceil(std::log2(3.0 - m)));
  if (k < 2) k = 2;
  while (k > 2 && m < ring_bounds(k).first) --k;
  while (m >= ring_bounds(k).second) ++k;
  if (k > k_max) throw DepthExceeded("locate: generation " + std::to_string(k) + " beyond cap " +
                                     std::to_string(k_max));

  const double s = std::ldexp(1.0, 2 - k);  // exact power of two
  cube.generation = k;
  for (int j = 0; j < n; ++j) cube.idx[j] = static_cast<std::int64_t>(std::floor(x[j] / s));

  const std::int64_t want = outer_units(k);
  auto reach = [&]() {
    std::int64_t r = 0;
    for (int j = 0; j < n; ++j) r = std::max({r, -cube.idx[j], cube.idx[j] + 1});
    return r;
  };
  if (reach() != want) {
    // Point sits exactly on the shell's inner boundary with every extremal
    // coordinate negative; the half-open rule placed it one cell inside.
    // Reassign those coordinates to the cell on their outer side.
    for (int j = 0; j < n; ++j)
      if (std::abs(x[j]) == m && x[j] < 0.0 && x[j] == static_cast<double>(cube.idx[j]) * s)
        cube.idx[j] -= 1;
    if (reach() != want) throw Error("locate: shell assignment failed");
  }
  return cube;
}

NeighborKind face_neighbor_kind(const DyadicCube& cube, const ConeId& face, int k_max) {
  if (cube.dim < 1) throw ValidationError("face_neighbor_kind: bad cube");
  if (face.axis < 1 || face.axis > cube.dim) throw ValidationError("face_neighbor_kind: bad axis");
  VecN probe = cube.center();
  probe[face.axis_index()] += face.sign * 1.5 * cube.half_side();
  if (inf_norm(probe) >= 3.0) return NeighborKind::Outer;  // unreachable at finite generation
  const DyadicCube other = locate(probe, k_max);
  const int d = other.generation - cube.generation;
  if (d == 0) return NeighborKind::Same;
  if (d < 0) return NeighborKind::Larger;
  if (d == 1) return NeighborKind::Smaller;
  throw Error("face_neighbor_kind: non-adjacent generations " + std::to_string(cube.generation) +
              " vs " + std::to_string(other.generation));
}

std::vector<DyadicCube> enumerate_ring(int k, int n) {
  if (k < 2) throw ValidationError("enumerate_ring: k must be >= 2");
  const std::int64_t U = outer_units(k);  // indices run over [-U, U)
  std::vector<DyadicCube> out;
  DyadicCube c;
  c.dim = n;
  c.generation = k;
  std::vector<std::int64_t> ix(n, -U);
  for (;;) {
    std::int64_t reach = 0;
    for (int j = 0; j < n; ++j) reach = std::max({reach, -ix[j], ix[j] + 1});
    if (reach == U) {
      for (int j = 0; j < n; ++j) c.idx[j] = ix[j];
      out.push_back(c);
    }
    int j = 0;
    while (j < n && ++ix[j] == U) ix[j++] = -U;
    if (j == n) break;
  }
  return out;
}

}  // namespace framemap
