#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "framemap/frame_map.hpp"
#include "framemap/rng.hpp"

using namespace framemap;

namespace {
VecN random_point(Rng& rng, int n, double scale = 1.0) {
  VecN x(n);
  for (int i = 0; i < n; ++i) x[i] = scale * rng.symmetric();
  return x;
}
}  // namespace

TEST_CASE("base map") {
  CHECK(base_map(make_vec({0.5, 0.25})) == make_vec({1.0, 0.5}));
  CHECK_THROWS_AS(base_map(make_vec({0.0, 0.0})), ZeroPoint);

  Rng rng(3, 0);
  for (int it = 0; it < 200; ++it) {
    const int n = 2 + static_cast<int>(rng.below(5));
    const VecN x = random_point(rng, n);
    const VecN y = base_map(x);
    CHECK(inf_norm(y) == 1.0);          // image on the cube boundary, exactly
    CHECK(base_map(y) == y);            // idempotent
    if (inf_norm(x) == 1.0) CHECK(y == x);  // identity on the boundary
  }
}

TEST_CASE("cone map in three dimensions") {
  MapSpec spec{3, 2, 40, kMaxDim};
  // For 0 < x3 < x2 < x1: (x1,x2,x3) -> (1, x2/x1, x3/x1) -> (1, 1, x3/x2).
  const VecN y = eval_u(spec, make_vec({0.8, 0.4, 0.2})).value;
  CHECK(y.size() == 3);
  CHECK(y[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(y[1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(y[2] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("cone map agrees across a cone boundary") {
  MapSpec spec{3, 2, 40, kMaxDim};
  const VecN x = make_vec({0.6, -0.6, 0.3});
  const VecN via1 = detail::eval_u_on_cone(spec, ConeId{1, +1}, x).value;
  const VecN via2 = detail::eval_u_on_cone(spec, ConeId{2, -1}, x).value;
  CHECK(via1 == make_vec({1.0, -1.0, 0.5}));
  CHECK(via2 == make_vec({1.0, -1.0, 0.5}));
  CHECK(eval_u(spec, x).value == via1);
}

TEST_CASE("base case at n = k") {
  MapSpec spec{4, 4, 40, kMaxDim};
  const VecN y = eval_u(spec, make_vec({0.5, 0.1, 0.2, 0.4})).value;
  CHECK(y == make_vec({1.0, 0.2, 0.4, 0.8}));
  CHECK(eval_w(spec, make_vec({0.5, 0.1, 0.2, 0.4})).value == y);
}

TEST_CASE("zero homogeneity and unit image of the cone maps") {
  Rng rng(5, 0);
  for (const auto& [n, k] : {std::pair{3, 2}, {4, 2}, {4, 3}}) {
    MapSpec spec{n, k, 40, kMaxDim};
    for (int it = 0; it < 100; ++it) {
      const VecN x = random_point(rng, n);
      const VecN u = eval_u(spec, x).value;
      CHECK(inf_norm(u) == 1.0);
      const double lam = 0.05 + 0.95 * rng.uniform();
      const VecN u2 = eval_u(spec, VecN(lam * x)).value;
      CHECK((u - u2).cwiseAbs().maxCoeff() < 1e-12);

      ConeSet all = ConeSet::all(n);
      const VecN v = eval_v(spec, x, all).value;
      CHECK(inf_norm(v) == 1.0);
    }
  }
}

TEST_CASE("subdivided cone: quadrant by quadrant") {
  MapSpec spec{3, 2, 40, kMaxDim};
  // x = (0.8, 0.4, 0.2): face point (0.5, 0.25), quadrant centre (0.5, 0.5),
  // doubled offset (0, -0.5) maps under w_2 to (0, -1), so the face lands at
  // (0.5, 0) and the image is (1, 0.5, 0).
  const VecN v = eval_v(spec, make_vec({0.8, 0.4, 0.2}), ConeSet::single(ConeId{1, +1})).value;
  CHECK(v[0] == 1.0);
  CHECK(v[1] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(v[2] == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("subdivided map equals the radial projection on quadrant boundaries") {
  MapSpec spec{3, 2, 40, kMaxDim};
  // Face point (0.5, 0): on the quadrant boundary, v must return x/||x||.
  const VecN x = make_vec({0.8, 0.4, 0.0});
  const VecN v = eval_v(spec, x, ConeSet::single(ConeId{1, +1})).value;
  CHECK(v == make_vec({1.0, 0.5, 0.0}));
}

TEST_CASE("without subdivision v is u") {
  MapSpec spec{4, 2, 40, kMaxDim};
  Rng rng(9, 0);
  for (int it = 0; it < 100; ++it) {
    const VecN x = random_point(rng, 4);
    CHECK(eval_v(spec, x, ConeSet{}).value == eval_u(spec, x).value);
  }
}
TEST_CASE("subdividing at the frame dimension is rejected") {
  MapSpec spec{2, 2, 40, kMaxDim};
  CHECK_THROWS_AS(eval_v(spec, make_vec({0.5, 0.25}), ConeSet::single(ConeId{1, +1})),
                  MinDimension);
}

TEST_CASE("assembled map: dimension 2 needs no assembly") {
  MapSpec spec{2, 2, 40, kMaxDim};
  CHECK(eval_w(spec, make_vec({0.5, 0.25})).value == make_vec({1.0, 0.5}));
}

TEST_CASE("assembled map inside the central cube, by hand") {
  MapSpec spec{3, 2, 40, kMaxDim};
  // y = 3x = (0.4, 0.1, 0.05) sits in the central cube, where every cone is
  // subdivided. Cone 1+: face point (0.25, 0.125), quadrant (+,+), doubled
  // offset (-0.5, -0.75); w_2 of that is (-2/3, -1), so the face lands at
  // (1/6, 0), v(y) = (1, 1/6, 0) and w(x) = (1/3, 1/18, 0).
  const VecN x = make_vec({0.4 / 3, 0.1 / 3, 0.05 / 3});
  const VecN w = eval_w(spec, x).value;
  CHECK(w[0] == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(w[1] == doctest::Approx(1.0 / 18).epsilon(1e-14));
  CHECK(w[2] == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("assembled map stays near the identity at the boundary") {
  Rng rng(17, 0);
  for (const auto& [n, k] : {std::pair{3, 2}, {4, 3}}) {
    MapSpec spec{n, k, 40, kMaxDim};
    for (double eps : {1e-2, 1e-3}) {
      for (int it = 0; it < 50; ++it) {
        VecN x = random_point(rng, n, 1.0 - eps);
        x[static_cast<int>(rng.below(n))] = (rng.below(2) ? 1.0 : -1.0) * (1.0 - eps);
        const VecN w = eval_w(spec, x).value;
        CHECK((w - x).norm() <= 8.0 * std::sqrt(n) * eps);
        CHECK(inf_norm(w) <= 1.0);
      }
    }
  }
}

TEST_CASE("assembled map is exactly the identity on the boundary") {
  MapSpec spec{3, 2, 40, kMaxDim};
  const VecN x = make_vec({1.0, 0.3, -0.4});
  CHECK(eval_w(spec, x).value == x);
  CHECK_THROWS_AS(eval_w(spec, make_vec({1.1, 0.0, 0.0})), OutOfDomain);
}

TEST_CASE("deep boundary points exceed the generation cap explicitly") {
  MapSpec spec{3, 2, 12, kMaxDim};
  const VecN x = make_vec({1.0 - 1e-9, 0.0, 0.1});
  CHECK_THROWS_AS(eval_w(spec, x), DepthExceeded);
}

TEST_CASE("naive edge map") {
  CHECK(naive_edge_map(make_vec({0.8, 0.4, 0.2})) == make_vec({1.0, 1.0, 0.5}));
  CHECK(naive_edge_map(make_vec({0.5, 0.5, 0.25, 0.0})) == make_vec({1.0, 1.0, 1.0, 0.0}));
  CHECK_THROWS_AS(naive_edge_map(make_vec({0.0, 0.0, 0.5})), SingularSet);
}

TEST_CASE("naive edge map coincides with the cone map in dimension 3") {
  MapSpec spec{3, 2, 40, kMaxDim};
  Rng rng(23, 0);
  for (int it = 0; it < 300; ++it) {
    const VecN x = random_point(rng, 3);
    const VecN a = naive_edge_map(x);
    const VecN b = eval_u(spec, x).value;
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("the 4-D witness separates the naive and subdivided maps") {
  const VecN witness = make_vec({0.5, 0.5, 0.25, 0.0});
  const VecN naive = naive_edge_map(witness);
  const VecN refined = naive_subdivided_c1(witness);
  CHECK(naive == make_vec({1.0, 1.0, 1.0, 0.0}));
  CHECK(refined == make_vec({1.0, 1.0, 0.5, 0.0}));

  // Same value through the assembled machinery.
  MapSpec spec{4, 2, 40, kMaxDim};
  const VecN via_v = eval_v(spec, witness, ConeSet::single(ConeId{1, +1})).value;
  CHECK(via_v == make_vec({1.0, 1.0, 0.5, 0.0}));
}

TEST_CASE("the naive refinement jumps across the cone boundary; the real one does not") {
  MapSpec spec{4, 2, 40, kMaxDim};
  const ConeSet c1 = ConeSet::single(ConeId{1, +1});
  for (double d : {1e-4, 1e-6, 1e-8}) {
    const VecN xp = make_vec({0.5 - d / 2, 0.5 + d / 2, 0.25, 0.0});
    const VecN xm = make_vec({0.5 + d / 2, 0.5 - d / 2, 0.25, 0.0});
    const double naive_jump = (naive_subdivided_c1(xp) - naive_subdivided_c1(xm)).norm();
    CHECK(naive_jump > 0.45);
    CHECK(naive_jump < 0.55);
    const double v_jump = (eval_v(spec, xp, c1).value - eval_v(spec, xm, c1).value).norm();
    CHECK(v_jump < 50 * d);
  }
}

TEST_CASE("affine composition") {
  MapSpec spec{3, 2, 40, kMaxDim};
  AffineMap g;
  g.matrix = MatN::Identity(3, 3);
  g.offset = VecN::Zero(3);
  Cell unit;
  unit.center = VecN::Zero(3);
  unit.half_side = 1.0;
  const std::vector<Cell> cells{unit};

  Rng rng(29, 0);
  for (int it = 0; it < 50; ++it) {
    const VecN x = random_point(rng, 3, 0.999);
    CHECK(affine_frame_map(g, spec, cells, x).value == eval_w(spec, x).value);
  }

  // Scaled/translated cell: boundary values stay within |xi| diam(cell).
  Cell shifted;
  shifted.center = make_vec({2.0, -1.0, 0.5});
  shifted.half_side = 0.25;
  AffineMap g2;
  g2.matrix = parse_mat("1,2,0;0,1,1;1,0,1;2,1,0");  // 4x3
  g2.offset = make_vec({1.0, 0.0, -2.0, 0.5});
  const std::vector<Cell> cells2{shifted};
  for (int it = 0; it < 50; ++it) {
    VecN x = shifted.center + 0.25 * random_point(rng, 3, 0.999);
    const int axis = static_cast<int>(rng.below(3));
    x[axis] = shifted.center[axis] + (rng.below(2) ? 0.2499 : -0.2499);
    const VecN val = affine_frame_map(g2, spec, cells2, x).value;
    const VecN affine = g2.offset + g2.matrix * x;
    // ||xi||_2 <= ||xi||_F; the cell's Euclidean diameter is 2 h sqrt(n).
    CHECK((val - affine).norm() <= g2.matrix.norm() * 2 * 0.25 * std::sqrt(3.0));
  }

  CHECK_THROWS_AS(affine_frame_map(g2, spec, cells2, make_vec({0.0, 0.0, 0.0})), OutOfDomain);
}

TEST_CASE("piece keys identify the evaluation path") {
  MapSpec spec{3, 2, 40, kMaxDim};
  EvalRequest req;
  req.piece = true;
  const EvalResult a = eval_w(spec, make_vec({0.13, 0.04, 0.02}), req);
  const EvalResult b = eval_w(spec, make_vec({0.131, 0.041, 0.019}), req);
  const EvalResult c = eval_w(spec, make_vec({0.6, 0.1, 0.05}), req);
  CHECK(a.piece == b.piece);        // same cube, cone and quadrant
  CHECK_FALSE(a.piece == c.piece);  // different cube
  CHECK(!a.piece.to_string().empty());
}
