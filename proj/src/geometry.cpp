#include "framemap/geometry.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>

namespace framemap {

VecN parse_vec(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    char* end = nullptr;
    double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str()) throw ValidationError("cannot parse number: '" + tok + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ValidationError("empty point: '" + s + "'");
  if (out.size() > static_cast<size_t>(kMaxDim))
    throw ValidationError("dimension exceeds cap " + std::to_string(kMaxDim));
  VecN v(static_cast<Eigen::Index>(out.size()));
  for (size_t i = 0; i < out.size(); ++i) v[static_cast<Eigen::Index>(i)] = out[i];
  return v;
}

MatN parse_mat(const std::string& s) {
  std::vector<VecN> rows;
  std::stringstream ss(s);
  std::string row;
  while (std::getline(ss, row, ';')) {
    if (row.empty()) continue;
    rows.push_back(parse_vec(row));
  }
  if (rows.empty()) throw ValidationError("empty matrix: '" + s + "'");
  const Eigen::Index cols = rows[0].size();
  MatN m(static_cast<Eigen::Index>(rows.size()), cols);
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) throw ValidationError("ragged matrix rows");
    m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  }
  return m;
}

std::string format_vec(const VecN& v) {
  std::ostringstream os;
  os.precision(17);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) os << ",";
    os << v[i];
  }
  return os.str();
}

std::vector<double> to_std(const VecN& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

VecN QuadrantId::center() const {
  VecN z(dim);
  for (int i = 0; i < dim; ++i) z[i] = 0.5 * sign(i);
  return z;
}

double inf_norm(const VecN& x) {
  if (x.size() < 1) throw ValidationError("inf_norm: empty point");
  return x.cwiseAbs().maxCoeff();
}

ConeId cone_of(const VecN& x) {
  const double m = inf_norm(x);
  if (m == 0.0) throw ZeroPoint();
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (std::abs(x[i]) == m) return ConeId{static_cast<int>(i) + 1, x[i] >= 0.0 ? +1 : -1};
  }
  throw Error("cone_of: unreachable");
}

VecN face_chart(const ConeId& c, const VecN& x) {
  const int a = c.axis_index();
  if (a < 0 || a >= x.size()) throw ValidationError("face_chart: axis out of range");
  if (x[a] != static_cast<double>(c.sign))
    throw NotOnFace("x_" + std::to_string(c.axis) + " != " + std::to_string(c.sign));
  VecN y(x.size() - 1);
  Eigen::Index j = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (i != a) y[j++] = x[i];
  return y;
}

VecN face_unchart(const ConeId& c, const VecN& y) {
  if (y.size() < 1) throw MinDimension("face_unchart: input dimension must be >= 1");
  const int a = c.axis_index();
  if (a < 0 || a > y.size()) throw ValidationError("face_unchart: axis out of range");
  VecN x(y.size() + 1);
  Eigen::Index j = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    x[i] = (i == a) ? static_cast<double>(c.sign) : y[j++];
  return x;
}

QuadrantId quadrant_of(const VecN& y) {
  if (y.size() < 1) throw ValidationError("quadrant_of: empty point");
  QuadrantId q;
  q.dim = static_cast<int>(y.size());
  for (int i = 0; i < q.dim; ++i)
    if (y[i] >= 0.0) q.plus_mask |= (1u << i);
  return q;
}

}  // namespace framemap
