#include "framemap/jacobian.hpp"

#include <Eigen/SVD>

namespace framemap {

std::pair<VecN, int> rank_report(const MatN& m, double tol) {
  if (!m.allFinite()) throw ValidationError("rank_report: non-finite entries");
  Eigen::JacobiSVD<MatN> svd(m);
  VecN sv = svd.singularValues();
  int rank = 0;
  if (sv.size() > 0 && sv[0] > 0.0) {
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv[i] > tol * sv[0]) ++rank;
  }
  return {sv, rank};
}

JacobianReport jac_analytic(const MapSpec& spec, MapKind kind, const VecN& x,
                            const ConeSet& subdivided, GradModel model, double stratum_tol,
                            double rank_tol) {
  EvalRequest req;
  req.jacobian = true;
  req.piece = true;
  req.model = model;
  req.stratum_tol = stratum_tol;
  EvalResult res = evaluate(spec, kind, x, subdivided, req);
  JacobianReport rep;
  rep.matrix = std::move(res.jac);
  rep.piece = std::move(res.piece);
  std::tie(rep.singular_values, rep.numerical_rank) = rank_report(rep.matrix, rank_tol);
  return rep;
}

JacobianReport jac_fd(const MapSpec& spec, MapKind kind, const VecN& x, double h,
                      const ConeSet& subdivided, double rank_tol) {
  if (h <= 0.0) throw ValidationError("jac_fd: h must be positive");
  EvalRequest req;
  req.piece = true;
  const EvalResult center = evaluate(spec, kind, x, subdivided, req);
  const int n = static_cast<int>(x.size());
  const int rows = static_cast<int>(center.value.size());

  JacobianReport rep;
  rep.piece = center.piece;
  rep.matrix = MatN::Zero(rows, n);
  for (int i = 0; i < n; ++i) {
    VecN xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    const EvalResult fp = evaluate(spec, kind, xp, subdivided, req);
    const EvalResult fm = evaluate(spec, kind, xm, subdivided, req);
    if (!(fp.piece == center.piece) || !(fm.piece == center.piece))
      throw StencilCrossesStratum("direction " + std::to_string(i + 1) + " at h = " +
                                  std::to_string(h));
    rep.matrix.col(i) = (fp.value - fm.value) / (xp[i] - xm[i]);
  }
  std::tie(rep.singular_values, rep.numerical_rank) = rank_report(rep.matrix, rank_tol);
  return rep;
}

}  // namespace framemap
