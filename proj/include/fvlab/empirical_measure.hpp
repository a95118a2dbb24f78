#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "fvlab/rng.hpp"

namespace fvlab {

using Point = Eigen::VectorXd;
using TestFunction = std::function<double(const Point&)>;

struct WeightedAtom {
  double weight = 0.0;
  Point point;
};

/// Open ball B(center, radius).
struct BallQuery {
  Point center;
  double radius = 1.0;

  bool contains(const Point& x) const { return (x - center).norm() < radius; }
};

/// eps-enlargement {x : d(x, points) < eps} of a finite point set.
struct Enlargement {
  std::vector<Point> points;
  double eps = 0.25;

  bool contains(const Point& x) const;
};

/// Finite sum of weighted point masses in R^d.
class EmpiricalMeasure {
 public:
  EmpiricalMeasure() = default;
  explicit EmpiricalMeasure(int dimension) : dimension_(dimension) {}

  /// n^{-1} sum of delta_{x_i}.
  static EmpiricalMeasure uniform(const std::vector<Point>& points);

  void add(double weight, Point point);

  int dimension() const { return dimension_; }
  std::size_t size() const { return atoms_.size(); }
  const std::vector<WeightedAtom>& atoms() const { return atoms_; }

  double total_mass() const;
  double integrate(const TestFunction& phi) const;
  double mass_in(const BallQuery& ball) const;
  double mass_in(const Enlargement& set) const;
  /// True if some atom lies in the ball (positive mass).
  bool charges(const BallQuery& ball) const;

  /// Identical points merged; atoms sorted lexicographically.
  EmpiricalMeasure compacted() const;

 private:
  int dimension_ = 1;
  // Set while every atom has weight 1/size(); sums are then taken before
  // dividing so that the total mass is exactly 1.
  bool equal_weights_ = false;
  std::vector<WeightedAtom> atoms_;
};

/// Law of the initial particle positions.
///   point:<x1>,<x2>,...     Dirac mass
///   atoms:<p1>;<p2>;...     equal-weight atoms (coordinates comma separated)
///   normal:<sd>             isotropic centred Gaussian
class InitialLaw {
 public:
  enum class Kind { point, atoms, normal };

  static InitialLaw point(Point x);
  static InitialLaw atoms(std::vector<Point> points);
  static InitialLaw normal(double sd, int dimension);

  Kind kind() const { return kind_; }
  int dimension() const { return dimension_; }
  Point sample(Engine& rng) const;
  /// Atoms of the law; empty for the Gaussian.
  EmpiricalMeasure as_measure() const;
  std::string to_string() const;

 private:
  Kind kind_ = Kind::point;
  int dimension_ = 1;
  std::vector<Point> points_;
  double sd_ = 1.0;
};

/// `dimension` fills in the Gaussian's dimension; point lists must match it
/// when it is positive.
InitialLaw parse_initial_law(std::string_view spec, int dimension);

/// Coordinates separated by ','.
Point parse_point(std::string_view text);
std::string format_point(const Point& x);

namespace phi {
TestFunction indicator_ball(Point center, double radius);
TestFunction coordinate(int index);
TestFunction constant(double value);
}  // namespace phi

}  // namespace fvlab
