#pragma once

// The maps, built by mutual recursion over the ambient dimension d:
//
//   w_k  = x/||x||                                  (base, image on the boundary)
//   v_d  = cone c of x  ->  face point y = chart_c(x/||x||)
//          -> w_{d-1}(y), or on subdivided cones z_l + w_{d-1}(2(y-z_l))/2
//          -> lifted back through chart_c             (image on the face frame)
//   w_d  = dyadic cube Q = c + r(-1,1)^d containing 3x
//          -> (c + r v_d((3x-c)/r))/3, subdividing the cones whose faces
//             border smaller cubes                    (identity trace on the boundary)
//
// Evaluation performs one cube location and one cone choice per level and
// optionally assembles the derivative by the chain rule along the same path.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "framemap/geometry.hpp"
#include "framemap/vec.hpp"
#include "framemap/whitney.hpp"

namespace framemap {

/// Parameters of the construction: ambient dimension n, frame parameter k
/// (the base map x/||x|| lives in dimension k; the image of the assembled
/// map is a (k-1)-dimensional frame), plus depth caps.
struct MapSpec {
  int n = 2;
  int k = 2;
  int k_max = 40;       // dyadic generation cap; side ~2^-38 is beyond double usefulness
  int d_max = kMaxDim;  // ambient dimension cap

  void validate() const;
};

/// Subset of the 2n cones of a cube, by bitmask over ConeId::bit().
struct ConeSet {
  std::uint32_t mask = 0;

  static ConeSet all(int n) { return ConeSet{(1u << (2 * n)) - 1u}; }
  static ConeSet single(const ConeId& c) { return ConeSet{1u << c.bit()}; }
  bool contains(const ConeId& c) const { return (mask >> c.bit()) & 1u; }
  void add(const ConeId& c) { mask |= 1u << c.bit(); }
  bool empty() const { return mask == 0; }
  int count() const { return __builtin_popcount(mask); }
  bool operator==(const ConeSet&) const = default;
};

/// How gradients are assembled.
///
/// `exact` is the derivative of the evaluated map (chain rule through every
/// level, including the column generated by differentiating the radial
/// projection in the cone apex direction). `radial` drops that column at
/// every cone level, so the squared Frobenius norm factorises exactly into
/// radial and face parts; this is the integrand whose L^p integral the
/// closed-form seminorm recursion evaluates. The two coincide wherever the
/// inner face map is 0-homogeneous (in particular whenever n <= k+1 without
/// subdivision).
enum class GradModel { exact, radial };

/// Discrete choices made during one evaluation; identifies the smooth piece
/// a point belongs to. One entry per recursion step that made a choice.
struct LevelPiece {
  int dim = 0;
  int cube_gen = 0;  // 0: no dyadic level here; 1: central cube
  std::array<std::int64_t, kMaxDim> cube_idx{};
  int cone = -1;      // ConeId::bit(), -1 if none
  int quadrant = -1;  // QuadrantId::plus_mask, -1 if not subdivided

  bool operator==(const LevelPiece&) const = default;
};

struct PieceKey {
  std::vector<LevelPiece> levels;

  bool operator==(const PieceKey&) const = default;
  std::string to_string() const;
};

struct EvalRequest {
  bool jacobian = false;
  GradModel model = GradModel::exact;
  bool piece = false;
  /// When > 0, reject points closer than this (in per-level coordinates) to
  /// any discontinuity stratum of the derivative. Used by jac_analytic.
  double stratum_tol = 0.0;
};

struct EvalResult {
  VecN value;
  MatN jac;        // n x n; empty unless requested
  PieceKey piece;  // empty unless requested
};

/// x/||x|| on the closed unit cube; the image lies on the boundary.
VecN base_map(const VecN& x);

EvalResult eval_base(const VecN& x, const EvalRequest& req = {});

/// Cone map u: project x to a face along x/||x||, then apply the assembled
/// (n-1)-map to the face. Equals the base map when n == k.
EvalResult eval_u(const MapSpec& spec, const VecN& x, const EvalRequest& req = {});

/// Like u, but on the given cones the face is split into 2^(n-1) quadrants
/// and the (n-1)-map is applied to each half-size quadrant separately.
EvalResult eval_v(const MapSpec& spec, const VecN& x, const ConeSet& subdivided,
                  const EvalRequest& req = {});

/// The assembled map on (-1,1)^n: dyadic decomposition of (-3,3)^n, one
/// translated and scaled copy of v per cube, subdividing exactly the cones
/// whose faces border smaller cubes (all cones on the central cube), then
/// rescaled by 1/3. Equals the identity on the boundary in the trace sense:
/// the deviation |w(x)-x| is bounded by the diameter of the containing cube.
/// Equals the base map when n == k.
EvalResult eval_w(const MapSpec& spec, const VecN& x, const EvalRequest& req = {});

/// The quadrant-refined map of dimension n itself (no cone structure):
/// y in quadrant P_l maps to z_l + w(2(y-z_l))/2. Its L^p gradient integral
/// equals the unrefined one exactly (per-quadrant affine change of
/// variables).
EvalResult eval_refined_face(const MapSpec& spec, const VecN& y, const EvalRequest& req = {});

/// Repeated application of x -> x/||x||, one dimension at a time, collapsing
/// the cube directly onto its one-dimensional edge frame. In the sorted
/// coordinate order all but one output coordinate is +-1. Defined off the
/// codimension-2 set where the two smallest |x_i| both vanish. Coincides
/// with eval_u for n = 3, but does not admit the quadrant refinement in
/// n >= 4 (naive_subdivided_c1 demonstrates the jump).
VecN naive_edge_map(const VecN& x);

/// The naive edge map with the quadrant refinement applied on cone
/// (axis 1, +) only. Discontinuous across the boundary between the first two
/// cones for n >= 4.
VecN naive_subdivided_c1(const VecN& x);

struct AffineMap {
  VecN offset;  // z in R^N
  MatN matrix;  // xi, N x n
};

/// Axis-aligned cube cell, used to cover a general domain.
struct Cell {
  VecN center;
  double half_side = 1.0;
};

/// z + xi * (x_c + r w((y-x_c)/r)) on the cell containing y; boundary values
/// agree with the affine map itself in the trace sense.
EvalResult affine_frame_map(const AffineMap& g, const MapSpec& spec, std::span<const Cell> cells,
                            const VecN& y, const EvalRequest& req = {});

enum class MapKind { base, u, v, w, refined_face };

MapKind parse_map_kind(const std::string& s);
std::string to_string(MapKind k);

/// Uniform dispatcher used by the jacobian/analysis/cli layers.
EvalResult evaluate(const MapSpec& spec, MapKind kind, const VecN& x, const ConeSet& subdivided,
                    const EvalRequest& req = {});

namespace detail {
/// Evaluate u through a caller-chosen cone (must contain x in its closure).
/// Test hook for the cone-boundary continuity checks.
EvalResult eval_u_on_cone(const MapSpec& spec, const ConeId& c, const VecN& x,
                          const EvalRequest& req = {});
}  // namespace detail

}  // namespace framemap
