#pragma once

#include <functional>

namespace framemap {

/// Adaptive Gauss-Kronrod integral of f over [a, b] to ~1e-12 relative.
double integrate_1d(const std::function<double(double)>& f, double a, double b);

/// Integral of (m + |t|_2^2)^(p/2) over (-1,1)^m: the face factor of the
/// base-map seminorm. Iterated adaptive quadrature for small m, tensor
/// Gauss-Legendre (the integrand is analytic) beyond.
double base_face_integral(int m, double p);

}  // namespace framemap
