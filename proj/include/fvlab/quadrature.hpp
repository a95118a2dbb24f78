#pragma once

#include <functional>

namespace fvlab::quad {

struct Tolerance {
  double abs = 1e-10;
  double rel = 1e-8;
};

/// Adaptive Gauss-Kronrod (15-point) on a finite interval.
double adaptive(const std::function<double(double)>& f, double a, double b, Tolerance tol = {});

/// Integral over [a, inf) by exp-sinh quadrature; f must decay.
double half_line(const std::function<double(double)>& f, double a, Tolerance tol = {});

/// Integral over the open unit interval for integrands that may be singular
/// at either endpoint. `f(x, one_minus_x)` receives 1-x computed without
/// cancellation near 1. `scale` hints that f has structure near x ~ 1/scale
/// (e.g. exp(-scale * x) factors).
///
/// Each half is mapped through x = exp(-y) so that algebraic endpoint
/// behaviour becomes exponential decay in y.
double unit_interval(const std::function<double(double, double)>& f, double scale = 1.0,
                     Tolerance tol = {});

}  // namespace fvlab::quad
