#include "fvlab/quadrature.hpp"

#include <cmath>
#include <limits>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace fvlab::quad {

namespace {

using boost::math::quadrature::exp_sinh;
using boost::math::quadrature::gauss_kronrod;

constexpr unsigned kMaxDepth = 18;

exp_sinh<double>& exp_sinh_rule() {
  thread_local exp_sinh<double> rule;
  return rule;
}

double finite_or_zero(double v) { return std::isfinite(v) ? v : 0.0; }

// Integral of H over [y0, inf) where H may have structure up to y = y_feature.
double log_tail(const std::function<double(double)>& h, double y0, double y_feature,
                Tolerance tol) {
  double total = 0.0;
  double start = y0;
  const double split = y_feature + 2.0;
  if (split > y0) {
    total += adaptive(h, y0, split, tol);
    start = split;
  }
  total += half_line(h, start, tol);
  return total;
}

}  // namespace

double adaptive(const std::function<double(double)>& f, double a, double b, Tolerance tol) {
  if (a == b) return 0.0;
  double error = 0.0;
  double l1 = 0.0;
  const double value =
      gauss_kronrod<double, 15>::integrate(f, a, b, kMaxDepth, tol.rel, &error, &l1);
  return value;
}

double half_line(const std::function<double(double)>& f, double a, Tolerance tol) {
  auto guarded = [&](double x) { return finite_or_zero(f(x)); };
  double error = 0.0;
  double l1 = 0.0;
  std::size_t levels = 0;
  // exp_sinh needs a > 0 handled by shifting to [0, inf).
  auto shifted = [&](double x) { return guarded(a + x); };
  return exp_sinh_rule().integrate(shifted, 0.0, std::numeric_limits<double>::infinity(),
                                   tol.rel, &error, &l1, &levels);
}

double unit_interval(const std::function<double(double, double)>& f, double scale,
                     Tolerance tol) {
  const double ln2 = std::log(2.0);
  const double y_feature = scale > 2.0 ? std::log(scale) : ln2;
  auto left = [&](double y) {
    const double x = std::exp(-y);
    if (x == 0.0) return 0.0;
    return finite_or_zero(f(x, 1.0 - x) * x);
  };
  auto right = [&](double y) {
    const double z = std::exp(-y);
    if (z == 0.0) return 0.0;
    return finite_or_zero(f(1.0 - z, z) * z);
  };
  return log_tail(left, ln2, y_feature, tol) + log_tail(right, ln2, ln2, tol);
}

}  // namespace fvlab::quad
