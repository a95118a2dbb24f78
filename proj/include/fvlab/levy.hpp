#pragma once

#include <complex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "fvlab/empirical_measure.hpp"
#include "fvlab/rng.hpp"

namespace fvlab {

/// Finite jump measure sum_j mass_j delta_{point_j}; its total mass is the jump rate.
struct PointJumps {
  std::vector<double> masses;
  std::vector<Point> points;

  double rate() const;
};

/// Rotation-invariant alpha-stable jump measure scale * r^{-1-alpha} dr dS(theta),
/// dS the surface measure on the unit sphere. Jumps shorter than `truncation`
/// are replaced by a Gaussian with the same covariance.
struct StableJumps {
  double alpha = 1.5;
  double scale = 1.0;
  double truncation = 1e-3;
};

/// Levy triplet (a, Q, nu) in R^d. Increments follow the convention
/// E exp(i<W_t, xi>) = exp(-t Psi(xi)) with
/// Psi(xi) = -i<a, xi> + <xi, Q xi>/2 + int (1 - e^{i<x,xi>} + i<x,xi> 1{|x|<1}) nu(dx),
/// so a process with drift a moves by a t on average (absent jumps).
class LevySpec {
 public:
  explicit LevySpec(int dimension = 1);

  static LevySpec none(int dimension = 1) { return LevySpec(dimension); }
  static LevySpec brownian(double sigma, int dimension = 1);
  static LevySpec drift(Point a);
  static LevySpec compound_poisson(std::vector<double> masses, std::vector<Point> points);
  static LevySpec stable(double alpha, double scale, int dimension = 1, double truncation = 1e-3);

  /// Replaces Q; rejects asymmetric or indefinite matrices.
  LevySpec& set_covariance(const Eigen::MatrixXd& q);

  friend LevySpec operator+(LevySpec a, const LevySpec& b);
  friend bool operator==(const LevySpec& a, const LevySpec& b);

  int dimension() const { return dimension_; }
  const Point& drift_vector() const { return drift_; }
  const Eigen::MatrixXd& covariance() const { return covariance_; }
  /// F with F F^T = Q.
  const Eigen::MatrixXd& covariance_factor() const { return factor_; }
  const std::optional<PointJumps>& point_jumps() const { return point_jumps_; }
  const std::optional<StableJumps>& stable_jumps() const { return stable_; }

  bool has_gaussian() const { return has_gaussian_; }
  /// True when W_t = 0 for all t.
  bool is_trivial() const;
  /// Drift actually applied per unit time: a minus the small-jump compensator.
  const Point& effective_drift() const { return effective_drift_; }

  std::string to_string() const;

 private:
  void refresh();

  int dimension_;
  Point drift_;
  Eigen::MatrixXd covariance_;
  Eigen::MatrixXd factor_;
  bool has_gaussian_ = false;
  std::optional<PointJumps> point_jumps_;
  std::optional<StableJumps> stable_;
  Point effective_drift_;
};

/// `brownian:sigma=<s>[,d=<d>]`, `drift:<a1>,...`,
/// `cpois:rate=<r>,jump=point:<x1>[;<x2>...]` (coordinates split by ',', points by ';',
/// rate shared equally), `stable:alpha=<a>,scale=<c>[,d=<d>][,trunc=<delta>]`,
/// `none[:<d>]`, joined by `+`.
LevySpec parse_levy(std::string_view spec);

/// Adds an increment of duration dt to x in place.
void add_increment(const LevySpec& spec, double dt, Engine& rng, Eigen::Ref<Point> x);
Point sample_increment(const LevySpec& spec, double dt, Engine& rng);

std::complex<double> char_exponent(const LevySpec& spec, const Point& xi);

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// P(|W_t| < eps) from W_0 = 0; needs at least 100 replicas.
Estimate small_ball_prob(const LevySpec& spec, double t, double eps, long replicas, Engine& rng);

/// T_t phi(x) = E phi(x + W_t) by Monte Carlo.
Estimate semigroup_apply(const LevySpec& spec, double t, const TestFunction& phi, const Point& x,
                         long replicas, Engine& rng);

/// Time reversal: drift and jumps mirrored through the origin.
LevySpec reversed(const LevySpec& spec);

/// nu^{(k)} * mu for a point-mass nu; k = 0 returns mu.
EmpiricalMeasure convolve_support(const PointJumps& nu, const EmpiricalMeasure& mu, int k);

}  // namespace fvlab
