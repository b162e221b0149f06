#pragma once

#include "framemap/frame_map.hpp"
#include "framemap/vec.hpp"

namespace framemap {

struct JacobianReport {
  MatN matrix;
  VecN singular_values;  // descending
  int numerical_rank = 0;
  PieceKey piece;
};

/// Singular values (descending) and the count of sigma_i > tol * sigma_1.
std::pair<VecN, int> rank_report(const MatN& m, double tol);

/// Derivative of the chosen map assembled through the recursion by the chain
/// rule. Points within `stratum_tol` (per-level coordinates) of a cone tie,
/// quadrant plane or dyadic cube face are rejected with OnStratum; the
/// derivative only exists off those sets.
JacobianReport jac_analytic(const MapSpec& spec, MapKind kind, const VecN& x,
                            const ConeSet& subdivided = {}, GradModel model = GradModel::exact,
                            double stratum_tol = 1e-12, double rank_tol = 1e-8);

/// Central differences, O(h^2) on smooth pieces. All 2n stencil points must
/// resolve to the same piece as the centre; otherwise StencilCrossesStratum.
/// The looser default rank tolerance reflects truncation noise.
JacobianReport jac_fd(const MapSpec& spec, MapKind kind, const VecN& x, double h = 1e-5,
                      const ConeSet& subdivided = {}, double rank_tol = 1e-4);

}  // namespace framemap
