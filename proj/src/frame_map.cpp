#include "framemap/frame_map.hpp"

#include <cmath>
#include <sstream>

namespace framemap {

namespace {

constexpr int kTraceLevel = -1;  // cube_gen sentinel: boundary trace shortcut

struct Ctx {
  const MapSpec& spec;
  const EvalRequest& req;
  PieceKey* piece = nullptr;
};

EvalResult w_rec(const Ctx& ctx, int d, const VecN& x);

/// x/||x|| with its derivative. Row `axis` of the Jacobian vanishes (that
/// output component is constant +-1 on the cone); column `axis` carries the
/// derivative of the radial projection.
EvalResult base_rec(const Ctx& ctx, const VecN& x) {
  const int d = static_cast<int>(x.size());
  const double m = inf_norm(x);
  if (m == 0.0) throw ZeroPoint();
  const ConeId c = cone_of(x);
  const int a = c.axis_index();
  if (ctx.req.stratum_tol > 0.0) {
    if (m <= ctx.req.stratum_tol) throw OnStratum("base: |x| below stratum tolerance");
    for (int i = 0; i < d; ++i)
      if (i != a && m - std::abs(x[i]) <= ctx.req.stratum_tol)
        throw OnStratum("base: tie between |x_" + std::to_string(a + 1) + "| and |x_" +
                        std::to_string(i + 1) + "|");
  }
  EvalResult res;
  res.value = x / m;
  if (ctx.req.jacobian) {
    res.jac = MatN::Identity(d, d) / m;
    for (int j = 0; j < d; ++j) res.jac(j, a) = -c.sign * x[j] / (m * m);
    res.jac.row(a).setZero();
  }
  if (ctx.piece) {
    LevelPiece lp;
    lp.dim = d;
    lp.cone = c.bit();
    ctx.piece->levels.push_back(lp);
  }
  return res;
}

/// Shared cone-level step of u and v. Projects x to its face, applies the
/// assembled (d-1)-map (quadrant-refined on subdivided cones), and lifts the
/// result back. `forced` overrides the cone choice for boundary diagnostics.
EvalResult cone_rec(const Ctx& ctx, int d, const VecN& x, const ConeSet& subdivided,
                    const ConeId* forced) {
  const double m = inf_norm(x);
  if (m == 0.0) throw ZeroPoint();
  const ConeId c = forced ? *forced : cone_of(x);
  const int a = c.axis_index();
  const double s = static_cast<double>(c.sign);
  const double r = s * x[a];
  if (forced && r != m) throw NotOnFace("forced cone does not attain the norm");
  if (ctx.req.stratum_tol > 0.0) {
    if (m <= ctx.req.stratum_tol) throw OnStratum("cone: |x| below stratum tolerance");
    for (int i = 0; i < d; ++i)
      if (i != a && m - std::abs(x[i]) <= ctx.req.stratum_tol)
        throw OnStratum("cone boundary tie at dimension " + std::to_string(d));
  }

  VecN yhat(d - 1);
  {
    int j = 0;
    for (int i = 0; i < d; ++i)
      if (i != a) yhat[j++] = x[i] / r;
  }

  const bool split = subdivided.contains(c);
  LevelPiece lp;
  lp.dim = d;
  lp.cone = c.bit();

  VecN z;
  if (split) {
    const QuadrantId q = quadrant_of(yhat);
    if (ctx.req.stratum_tol > 0.0) {
      for (int i = 0; i < d - 1; ++i)
        if (std::abs(yhat[i]) <= ctx.req.stratum_tol)
          throw OnStratum("quadrant boundary at dimension " + std::to_string(d));
    }
    z = q.center();
    lp.quadrant = static_cast<int>(q.plus_mask);
  }
  if (ctx.piece) ctx.piece->levels.push_back(lp);

  EvalResult inner = split ? w_rec(ctx, d - 1, VecN(2.0 * (yhat - z))) : w_rec(ctx, d - 1, yhat);
  const VecN face_val = split ? VecN(z + 0.5 * inner.value) : inner.value;

  EvalResult res;
  res.value = face_unchart(c, face_val);
  if (ctx.req.jacobian) {
    // d(face)/d(yhat) is inner.jac either way: the quadrant map is
    // z + w(2(y-z))/2, whose chain-rule factors 1/2 and 2 cancel.
    res.jac = MatN::Zero(d, d);
    int mi = 0;
    for (int i = 0; i < d; ++i) {
      if (i == a) continue;
      int mo = 0;
      for (int j = 0; j < d; ++j) {
        if (j == a) continue;
        res.jac(j, i) = inner.jac(mo, mi) / r;
        ++mo;
      }
      ++mi;
    }
    if (ctx.req.model == GradModel::exact) {
      const VecN jy = inner.jac * yhat;
      int mo = 0;
      for (int j = 0; j < d; ++j) {
        if (j == a) continue;
        res.jac(j, a) = -(s / r) * jy[mo];
        ++mo;
      }
    }
  }
  return res;
}

EvalResult w_rec(const Ctx& ctx, int d, const VecN& x) {
  if (d == ctx.spec.k) return base_rec(ctx, x);

  const double m = inf_norm(x);
  if (m > 1.0) throw OutOfDomain("w: ||x|| > 1");
  if (m == 1.0) {
    // Identity trace on the boundary of the unit cube; recursive callers
    // land here when the parent point sits exactly on a piece boundary.
    EvalResult res;
    res.value = x;
    if (ctx.req.jacobian) res.jac = MatN::Identity(d, d);
    if (ctx.piece) {
      LevelPiece lp;
      lp.dim = d;
      lp.cube_gen = kTraceLevel;
      ctx.piece->levels.push_back(lp);
    }
    return res;
  }

  const VecN y = 3.0 * x;
  const DyadicCube cube = locate(y, ctx.spec.k_max);
  ConeSet subdivided;
  if (cube.central()) {
    subdivided = ConeSet::all(d);
  } else {
    for (int axis = 1; axis <= d; ++axis)
      for (int sign : {+1, -1}) {
        const ConeId f{axis, sign};
        if (face_neighbor_kind(cube, f, ctx.spec.k_max) == NeighborKind::Smaller)
          subdivided.add(f);
      }
  }

  const VecN c = cube.center();
  const double rr = cube.half_side();
  const VecN xi = (y - c) / rr;
  if (ctx.req.stratum_tol > 0.0) {
    for (int i = 0; i < d; ++i)
      if (1.0 - std::abs(xi[i]) <= ctx.req.stratum_tol)
        throw OnStratum("dyadic cube face at dimension " + std::to_string(d));
  }
  if (ctx.piece) {
    LevelPiece lp;
    lp.dim = d;
    lp.cube_gen = cube.generation;
    lp.cube_idx = cube.idx;
    ctx.piece->levels.push_back(lp);
  }

  EvalResult inner = cone_rec(ctx, d, xi, subdivided, nullptr);
  EvalResult res;
  res.value = (c + rr * inner.value) / 3.0;
  if (ctx.req.jacobian) res.jac = std::move(inner.jac);  // scales cancel exactly
  return res;
}

void check_point(const MapSpec& spec, const VecN& x) {
  if (static_cast<int>(x.size()) != spec.n)
    throw ValidationError("point dimension " + std::to_string(x.size()) + " does not match n = " +
                          std::to_string(spec.n));
  if (!x.allFinite()) throw ValidationError("point has non-finite coordinates");
}

}  // namespace

void MapSpec::validate() const {
  if (d_max < 2 || d_max > kMaxDim)
    throw ValidationError("d_max must be in [2, " + std::to_string(kMaxDim) + "]");
  if (n < 2 || n > d_max)
    throw ValidationError("n must be in [2, " + std::to_string(d_max) + "]");
  if (k < 2 || k > n) throw ValidationError("k must be in [2, n]; got k = " + std::to_string(k) +
                                            ", n = " + std::to_string(n));
  if (k_max < 4 || k_max > 60) throw ValidationError("k_max must be in [4, 60]");
}

std::string PieceKey::to_string() const {
  std::ostringstream os;
  for (size_t l = 0; l < levels.size(); ++l) {
    const LevelPiece& lp = levels[l];
    if (l) os << "/";
    os << "d" << lp.dim;
    if (lp.cube_gen == kTraceLevel) {
      os << ":trace";
      continue;
    }
    if (lp.cube_gen > 0) {
      os << ":g" << lp.cube_gen;
      if (lp.cube_gen > 1) {
        os << "@(";
        for (int j = 0; j < lp.dim; ++j) os << (j ? "," : "") << lp.cube_idx[j];
        os << ")";
      }
    }
    if (lp.cone >= 0) os << ":c" << (lp.cone / 2 + 1) << (lp.cone % 2 ? '-' : '+');
    if (lp.quadrant >= 0) {
      os << ":q";
      for (int i = 0; i < lp.dim - 1; ++i) os << (((lp.quadrant >> i) & 1) ? '+' : '-');
    }
  }
  return os.str();
}

VecN base_map(const VecN& x) { return eval_base(x).value; }

EvalResult eval_base(const VecN& x, const EvalRequest& req) {
  if (x.size() < 1 || x.size() > kMaxDim) throw ValidationError("base_map: bad dimension");
  if (inf_norm(x) > 1.0) throw OutOfDomain("base_map: ||x|| > 1");
  MapSpec spec;
  spec.n = spec.k = std::max(2, static_cast<int>(x.size()));
  Ctx ctx{spec, req, nullptr};
  PieceKey pk;
  if (req.piece) ctx.piece = &pk;
  EvalResult res = base_rec(ctx, x);
  if (req.piece) res.piece = std::move(pk);
  return res;
}

EvalResult eval_u(const MapSpec& spec, const VecN& x, const EvalRequest& req) {
  return eval_v(spec, x, ConeSet{}, req);
}

EvalResult eval_v(const MapSpec& spec, const VecN& x, const ConeSet& subdivided,
                  const EvalRequest& req) {
  spec.validate();
  check_point(spec, x);
  if (subdivided.mask >> (2 * spec.n)) throw ValidationError("subdivided cone out of range");
  if (inf_norm(x) > 1.0) throw OutOfDomain("v: ||x|| > 1");
  Ctx ctx{spec, req, nullptr};
  PieceKey pk;
  if (req.piece) ctx.piece = &pk;
  EvalResult res;
  if (spec.n == spec.k) {
    if (!subdivided.empty())
      throw MinDimension("subdividing at n = k needs an assembled map below the frame dimension");
    res = base_rec(ctx, x);
  } else {
    res = cone_rec(ctx, spec.n, x, subdivided, nullptr);
  }
  if (req.piece) res.piece = std::move(pk);
  return res;
}

EvalResult eval_w(const MapSpec& spec, const VecN& x, const EvalRequest& req) {
  spec.validate();
  check_point(spec, x);
  if (inf_norm(x) > 1.0) throw OutOfDomain("w: ||x|| > 1");
  Ctx ctx{spec, req, nullptr};
  PieceKey pk;
  if (req.piece) ctx.piece = &pk;
  EvalResult res = w_rec(ctx, spec.n, x);
  if (req.piece) res.piece = std::move(pk);
  return res;
}

EvalResult eval_refined_face(const MapSpec& spec, const VecN& y, const EvalRequest& req) {
  spec.validate();
  check_point(spec, y);
  if (inf_norm(y) > 1.0) throw OutOfDomain("refined face map: ||y|| > 1");
  Ctx ctx{spec, req, nullptr};
  PieceKey pk;
  if (req.piece) ctx.piece = &pk;

  const QuadrantId q = quadrant_of(y);
  if (req.stratum_tol > 0.0) {
    for (int i = 0; i < spec.n; ++i)
      if (std::abs(y[i]) <= req.stratum_tol) throw OnStratum("quadrant boundary");
  }
  const VecN z = q.center();
  if (ctx.piece) {
    LevelPiece lp;
    lp.dim = spec.n;
    lp.quadrant = static_cast<int>(q.plus_mask);
    ctx.piece->levels.push_back(lp);
  }
  EvalResult inner = w_rec(ctx, spec.n, VecN(2.0 * (y - z)));
  EvalResult res;
  res.value = z + 0.5 * inner.value;
  if (req.jacobian) res.jac = std::move(inner.jac);
  if (req.piece) res.piece = std::move(pk);
  return res;
}

VecN naive_edge_map(const VecN& x) {
  const int n = static_cast<int>(x.size());
  if (n < 2) throw ValidationError("naive edge map: dimension must be >= 2");
  if (inf_norm(x) > 1.0) throw OutOfDomain("naive edge map: ||x|| > 1");
  VecN v = x;
  std::array<bool, kMaxDim> fixed{};
  int active = n;
  while (active >= 2) {
    double m = 0.0;
    for (int j = 0; j < n; ++j)
      if (!fixed[j]) m = std::max(m, std::abs(v[j]));
    if (m == 0.0) throw SingularSet("two smallest coordinates vanish");
    for (int j = 0; j < n; ++j)
      if (!fixed[j]) v[j] /= m;
    for (int j = 0; j < n; ++j)
      if (!fixed[j] && std::abs(v[j]) == 1.0) {
        fixed[j] = true;
        --active;
      }
  }
  return v;
}

VecN naive_subdivided_c1(const VecN& x) {
  const int n = static_cast<int>(x.size());
  if (n < 3) throw ValidationError("naive subdivided map: dimension must be >= 3");
  const ConeId c = cone_of(x);
  if (!(c == ConeId{1, +1})) return naive_edge_map(x);
  const double r = x[0];
  VecN yhat(n - 1);
  for (int i = 1; i < n; ++i) yhat[i - 1] = x[i] / r;
  const VecN z = quadrant_of(yhat).center();
  const VecN inner = naive_edge_map(VecN(2.0 * (yhat - z)));
  return face_unchart(c, VecN(z + 0.5 * inner));
}

EvalResult affine_frame_map(const AffineMap& g, const MapSpec& spec, std::span<const Cell> cells,
                            const VecN& y, const EvalRequest& req) {
  spec.validate();
  if (g.matrix.cols() != spec.n) throw ValidationError("affine map: matrix must have n columns");
  if (g.offset.size() != g.matrix.rows())
    throw ValidationError("affine map: offset size must match matrix rows");
  if (static_cast<int>(y.size()) != spec.n) throw ValidationError("affine map: bad point dimension");

  const Cell* cell = nullptr;
  for (const Cell& cand : cells) {
    if (cand.center.size() != spec.n) throw ValidationError("affine map: bad cell dimension");
    bool inside = true;
    for (int i = 0; i < spec.n && inside; ++i)
      inside = cand.center[i] - cand.half_side <= y[i] && y[i] < cand.center[i] + cand.half_side;
    if (inside) {
      cell = &cand;
      break;
    }
  }
  if (!cell) throw OutOfDomain("affine map: point lies in no cell");

  const VecN local = (y - cell->center) / cell->half_side;
  EvalResult w = eval_w(spec, local, req);
  EvalResult res;
  res.value = g.offset + g.matrix * (cell->center + cell->half_side * w.value);
  if (req.jacobian) res.jac = g.matrix * w.jac;
  res.piece = std::move(w.piece);
  return res;
}

MapKind parse_map_kind(const std::string& s) {
  if (s == "base") return MapKind::base;
  if (s == "u") return MapKind::u;
  if (s == "v") return MapKind::v;
  if (s == "w") return MapKind::w;
  if (s == "face" || s == "refined-face") return MapKind::refined_face;
  throw ValidationError("unknown map '" + s + "' (expected base|u|v|w|face)");
}

std::string to_string(MapKind k) {
  switch (k) {
    case MapKind::base: return "base";
    case MapKind::u: return "u";
    case MapKind::v: return "v";
    case MapKind::w: return "w";
    case MapKind::refined_face: return "face";
  }
  return "?";
}

EvalResult evaluate(const MapSpec& spec, MapKind kind, const VecN& x, const ConeSet& subdivided,
                    const EvalRequest& req) {
  switch (kind) {
    case MapKind::base: return eval_base(x, req);
    case MapKind::u: return eval_u(spec, x, req);
    case MapKind::v: return eval_v(spec, x, subdivided, req);
    case MapKind::w: return eval_w(spec, x, req);
    case MapKind::refined_face: return eval_refined_face(spec, x, req);
  }
  throw Error("evaluate: unreachable");
}

namespace detail {

EvalResult eval_u_on_cone(const MapSpec& spec, const ConeId& c, const VecN& x,
                          const EvalRequest& req) {
  spec.validate();
  check_point(spec, x);
  if (spec.n == spec.k) return eval_base(x, req);
  Ctx ctx{spec, req, nullptr};
  PieceKey pk;
  if (req.piece) ctx.piece = &pk;
  EvalResult res = cone_rec(ctx, spec.n, x, ConeSet{}, &c);
  if (req.piece) res.piece = std::move(pk);
  return res;
}

}  // namespace detail

}  // namespace framemap
