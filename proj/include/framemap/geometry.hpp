#pragma once

#include <cstdint>

#include "framemap/vec.hpp"

namespace framemap {

/// One of the 2n cones of the cube (-1,1)^n, or equivalently the face
/// {x_axis = sign} it projects to. `axis` is 1-based to match the usual
/// coordinate numbering x_1..x_n; use axis_index() for array access.
struct ConeId {
  int axis = 1;   // in [1, n]
  int sign = +1;  // -1 or +1

  int axis_index() const { return axis - 1; }
  /// Bit position in a ConeSet mask: (axis-1)*2 + (sign<0).
  int bit() const { return (axis - 1) * 2 + (sign < 0 ? 1 : 0); }
  bool operator==(const ConeId&) const = default;
};

/// One of the 2^(n-1) closed quadrants of a face identified with Q^(n-1).
/// Quadrant l has centre z_l with coordinates sign_i/2.
struct QuadrantId {
  int dim = 0;                 // n-1
  std::uint32_t plus_mask = 0; // bit i set: sign_i = +1

  int sign(int i) const { return (plus_mask >> i) & 1u ? +1 : -1; }
  VecN center() const;
  bool operator==(const QuadrantId&) const = default;
};

/// max_i |x_i|, the norm used throughout.
double inf_norm(const VecN& x);

/// Cone containing x: the axis attaining the inf norm and the sign of that
/// coordinate. Ties go to the smallest axis index; the assembled maps are
/// continuous across cone boundaries, so the rule is value-invisible.
/// Throws ZeroPoint at x = 0.
ConeId cone_of(const VecN& x);

/// Drop coordinate c.axis of a point lying on face c (x_axis == c.sign
/// exactly), keeping the order of remaining coordinates.
VecN face_chart(const ConeId& c, const VecN& x);

/// Insert the value c.sign at position c.axis. Inverse of face_chart.
/// The input must have dimension >= 1.
VecN face_unchart(const ConeId& c, const VecN& y);

/// Quadrant containing y, with 0 treated as positive.
QuadrantId quadrant_of(const VecN& y);

}  // namespace framemap
