#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "framemap/rng.hpp"
#include "framemap/whitney.hpp"

using namespace framemap;

TEST_CASE("ring bounds") {
  CHECK(ring_bounds(1) == std::pair{0.0, 1.0});
  CHECK(ring_bounds(2) == std::pair{1.0, 2.0});
  CHECK(ring_bounds(3) == std::pair{2.0, 2.5});
  // Outer half-width tends to 3.
  CHECK(ring_bounds(40).second == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(ring_bounds(40).second < 3.0);
}

TEST_CASE("ring width equals cube side") {
  for (int k = 2; k <= 20; ++k) {
    const auto [inner, outer] = ring_bounds(k);
    CHECK(outer - inner == std::ldexp(1.0, 2 - k));
  }
}

TEST_CASE("ring cube counts") {
  CHECK(ring_cube_count(2, 2) == 12);
  CHECK(ring_cube_count(3, 2) == 36);
  CHECK(ring_cube_count(4, 2) == 84);
  CHECK(ring_cube_count(2, 3) == 56);
  CHECK(ring_cube_count(3, 3) == 2 * 2 * 2 * (125 - 64));  // 2^n (5^n - 4^n)
  CHECK_THROWS_AS(ring_cube_count(100, 8), CountOverflow);
}

TEST_CASE("counts split by extremal class") {
  for (int n = 2; n <= 4; ++n)
    for (int k = 2; k <= 6; ++k) {
      unsigned __int128 total = 0;
      for (int f = 1; f <= n; ++f) total += ring_cube_count_by_extreme(k, n, f);
      CHECK(total == ring_cube_count(k, n));
    }
}

TEST_CASE("exact volume audit") {
  // Scaled to integers: sum_k count(k) 2^(n(K-k)) == (3 2^(K-1) - 2)^n - 2^(n(K-1)).
  for (int n = 2; n <= 4; ++n)
    for (int K = 2; K <= 8; ++K) {
      unsigned __int128 lhs = 0;
      for (int k = 2; k <= K; ++k)
        lhs += ring_cube_count(k, n) * (static_cast<unsigned __int128>(1) << (n * (K - k)));
      unsigned __int128 a = 3 * (static_cast<unsigned __int128>(1) << (K - 1)) - 2;
      unsigned __int128 rhs = 1;
      for (int i = 0; i < n; ++i) rhs *= a;
      rhs -= static_cast<unsigned __int128>(1) << (n * (K - 1));
      CHECK(lhs == rhs);
    }
}

TEST_CASE("locate basics") {
  DyadicCube c = locate(make_vec({1.6, 0.3}), 40);
  CHECK(c.generation == 2);
  CHECK(c.center() == make_vec({1.5, 0.5}));
  CHECK(c.half_side() == 0.5);

  CHECK(locate(make_vec({0.2, -0.7}), 40).central());

  CHECK_THROWS_AS(locate(make_vec({2.99999999999, 0.0, 0.0}), 20), DepthExceeded);
  CHECK_THROWS_AS(locate(make_vec({3.0, 0.0}), 40), OutOfDomain);
}

TEST_CASE("locate on shell boundaries stays total and consistent") {
  // Points exactly on shared planes are assigned deterministically to a cube
  // of the shell matching their norm.
  for (const auto& pt : {make_vec({1.0, 0.3}), make_vec({-1.0, 0.3}), make_vec({-1.0, -1.0}),
                         make_vec({-2.0, -0.5}), make_vec({-1.0, -2.0}), make_vec({2.0, 0.0})}) {
    const DyadicCube c = locate(pt, 40);
    const auto [inner, outer] = ring_bounds(c.generation);
    CHECK(inf_norm(pt) >= inner);
    CHECK(inf_norm(pt) < outer);
    // The point lies in the cube's closure.
    for (int j = 0; j < c.dim; ++j)
      CHECK(std::abs(pt[j] - c.center()[j]) <= c.half_side() + 1e-15);
  }
}

TEST_CASE("locate agrees with brute-force enumeration") {
  Rng rng(101, 0);
  for (int n = 2; n <= 3; ++n) {
    // All cubes of generations 2..6, as closed boxes.
    std::vector<DyadicCube> all;
    for (int k = 2; k <= 6; ++k) {
      auto ring = enumerate_ring(k, n);
      CHECK(ring.size() == static_cast<size_t>(ring_cube_count(k, n)));
      all.insert(all.end(), ring.begin(), ring.end());
    }
    const double lim = ring_bounds(6).second;
    long checked = 0;
    for (long it = 0; checked < (n == 2 ? 30000 : 20000); ++it) {
      Rng r2(rng.next_u64(), it);
      VecN x(n);
      for (int j = 0; j < n; ++j) x[j] = lim * r2.symmetric();
      if (inf_norm(x) >= lim) continue;
      ++checked;
      const DyadicCube got = locate(x, 40);
      if (got.central()) {
        CHECK(inf_norm(x) < 1.0);
        continue;
      }
      int containing = 0;
      bool got_is_one = false;
      for (const auto& c : all) {
        bool inside = true;
        const VecN ctr = c.center();
        for (int j = 0; j < n && inside; ++j)
          inside = std::abs(x[j] - ctr[j]) <= c.half_side();
        if (inside) {
          ++containing;
          if (c == got) got_is_one = true;
        }
      }
      CHECK(containing >= 1);
      CHECK(got_is_one);
      // Interior points (off all grid planes) lie in exactly one cube.
      if (containing == 1) {
        const auto [inner, outer] = ring_bounds(got.generation);
        CHECK(inf_norm(x) >= inner);
        CHECK(inf_norm(x) < outer);
      }
    }
  }
}

TEST_CASE("face neighbours") {
  // Central cube: every face borders smaller cubes.
  const DyadicCube central = locate(make_vec({0.1, 0.2}), 40);
  for (int axis = 1; axis <= 2; ++axis)
    for (int sign : {+1, -1})
      CHECK(face_neighbor_kind(central, ConeId{axis, sign}, 40) == NeighborKind::Smaller);

  // Face cube of the first shell.
  const DyadicCube face = locate(make_vec({1.5, 0.5}), 40);
  CHECK(face_neighbor_kind(face, ConeId{1, +1}, 40) == NeighborKind::Smaller);
  CHECK(face_neighbor_kind(face, ConeId{1, -1}, 40) == NeighborKind::Larger);
  CHECK(face_neighbor_kind(face, ConeId{2, +1}, 40) == NeighborKind::Same);
  CHECK(face_neighbor_kind(face, ConeId{2, -1}, 40) == NeighborKind::Same);

  // Corner cube: two smaller faces, no larger one.
  const DyadicCube corner = locate(make_vec({1.5, 1.5}), 40);
  CHECK(face_neighbor_kind(corner, ConeId{1, +1}, 40) == NeighborKind::Smaller);
  CHECK(face_neighbor_kind(corner, ConeId{2, +1}, 40) == NeighborKind::Smaller);
  CHECK(face_neighbor_kind(corner, ConeId{1, -1}, 40) == NeighborKind::Same);
  CHECK(face_neighbor_kind(corner, ConeId{2, -1}, 40) == NeighborKind::Same);
}

TEST_CASE("smaller faces match the extremal class; larger iff one smaller") {
  for (int n = 2; n <= 3; ++n)
    for (int k = 2; k <= 4; ++k)
      for (const auto& cube : enumerate_ring(k, n)) {
        int smaller = 0, larger = 0, extreme = 0;
        const std::int64_t U = 3 * (std::int64_t{1} << (k - 2)) - 1;
        for (int j = 0; j < n; ++j)
          if (cube.idx[j] == U - 1 || cube.idx[j] == -U) ++extreme;
        for (int axis = 1; axis <= n; ++axis)
          for (int sign : {+1, -1}) {
            const NeighborKind nk = face_neighbor_kind(cube, ConeId{axis, sign}, 40);
            if (nk == NeighborKind::Smaller) ++smaller;
            if (nk == NeighborKind::Larger) ++larger;
          }
        CHECK(smaller == extreme);
        CHECK(smaller >= 1);
        CHECK(larger == (smaller == 1 ? 1 : 0));
      }
}
