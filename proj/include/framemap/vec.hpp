#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "framemap/errors.hpp"

namespace framemap {

/// Hard cap on the ambient dimension. Evaluation cost grows geometrically
/// with the recursion depth, so everything is sized for small n.
inline constexpr int kMaxDim = 8;

/// Dynamic-size vector/matrix with inline (stack) storage up to kMaxDim.
using VecN = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using MatN = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;

inline VecN make_vec(std::initializer_list<double> xs) {
  VecN v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

/// Parse "0.8,0.4,0.2" into a vector. Used by the CLI and tests.
VecN parse_vec(const std::string& s);

/// Parse a row-major matrix: rows separated by ';', entries by ','.
MatN parse_mat(const std::string& s);

std::string format_vec(const VecN& v);

std::vector<double> to_std(const VecN& v);

}  // namespace framemap
