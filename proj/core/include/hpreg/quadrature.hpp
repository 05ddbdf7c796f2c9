#pragma once

#include <functional>

namespace hpreg::quad {

struct Estimate {
  double value = 0.0;
  double error = 0.0;
};

using Integrand = std::function<double(double)>;

/// Tanh-sinh quadrature on a finite interval. Tolerates integrable
/// algebraic singularities at either endpoint.
Estimate finite(const Integrand& f, double a, double b, double tol = 1e-12);

/// Exp-sinh quadrature on [a, +inf). Handles algebraic decay t^-p, p > 1,
/// since the substitution turns it into double-exponential decay.
Estimate half_line(const Integrand& f, double a, double tol = 1e-12);

/// One-sided cosine transform \int_0^inf f(t) cos(omega t) dt for
/// algebraically decaying f (double-exponential Ooura-Mori rule).
/// omega == 0 falls back to half_line.
Estimate cosine_transform(const Integrand& f, double omega, double tol = 1e-11);

}  // namespace hpreg::quad
