#include "framemap/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>

#include "framemap/errors.hpp"
#include "framemap/vec.hpp"

namespace framemap {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 61>;

template <unsigned Points>
double tensor_gauss(int m, double p) {
  using G = boost::math::quadrature::gauss<double, Points>;
  const auto& abscissa = G::abscissa();  // nonnegative half, for [-1,1]
  const auto& weights = G::weights();
  // Expand to the full node set once.
  std::vector<double> node, wt;
  for (size_t i = 0; i < abscissa.size(); ++i) {
    node.push_back(abscissa[i]);
    wt.push_back(weights[i]);
    if (abscissa[i] != 0.0) {
      node.push_back(-abscissa[i]);
      wt.push_back(weights[i]);
    }
  }
  const size_t nn = node.size();
  std::vector<size_t> ix(m, 0);
  double total = 0.0;
  for (;;) {
    double s2 = 0.0, w = 1.0;
    for (int j = 0; j < m; ++j) {
      s2 += node[ix[j]] * node[ix[j]];
      w *= wt[ix[j]];
    }
    total += w * std::pow(m + s2, 0.5 * p);
    int j = 0;
    while (j < m && ++ix[j] == nn) ix[j++] = 0;
    if (j == m) break;
  }
  return total;
}

double iterated_adaptive(int m, double p, double acc) {
  if (m == 1)
    return GK::integrate([&](double t) { return std::pow(1.0 + acc + t * t, 0.5 * p); }, -1.0, 1.0,
                         12, 1e-12);
  return GK::integrate(
      [&](double t) { return iterated_adaptive(m - 1, p, acc + t * t); }, -1.0, 1.0, 12, 1e-11);
}

}  // namespace

double integrate_1d(const std::function<double(double)>& f, double a, double b) {
  return GK::integrate(f, a, b, 12, 1e-12);
}

double base_face_integral(int m, double p) {
  if (m < 1 || m >= kMaxDim) throw ValidationError("base_face_integral: bad dimension");
  if (m <= 3) return iterated_adaptive(m, p, static_cast<double>(m - 1));
  // Integrand is analytic and >= m^(p/2) > 0; fixed-order tensor rules
  // converge spectrally.
  if (m <= 5) return tensor_gauss<25>(m, p);
  return tensor_gauss<14>(m, p);
}

}  // namespace framemap
