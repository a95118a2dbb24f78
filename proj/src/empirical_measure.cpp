#include "fvlab/empirical_measure.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "fvlab/stats.hpp"
#include "parse_util.hpp"

namespace fvlab {

bool Enlargement::contains(const Point& x) const {
  return std::any_of(points.begin(), points.end(),
                     [&](const Point& p) { return (x - p).norm() < eps; });
}

EmpiricalMeasure EmpiricalMeasure::uniform(const std::vector<Point>& points) {
  if (points.empty()) throw std::invalid_argument("uniform measure needs at least one point");
  EmpiricalMeasure m(static_cast<int>(points.front().size()));
  const double w = 1.0 / static_cast<double>(points.size());
  m.atoms_.reserve(points.size());
  for (const auto& p : points) m.add(w, p);
  m.equal_weights_ = true;
  return m;
}

void EmpiricalMeasure::add(double weight, Point point) {
  if (!(weight > 0.0)) throw std::invalid_argument("atom weight must be positive");
  if (atoms_.empty() && point.size() != dimension_) dimension_ = static_cast<int>(point.size());
  if (point.size() != dimension_) throw std::invalid_argument("atom dimension mismatch");
  equal_weights_ = false;
  atoms_.push_back({weight, std::move(point)});
}

double EmpiricalMeasure::total_mass() const {
  if (equal_weights_) return 1.0;
  stats::CompensatedSum s;
  for (const auto& a : atoms_) s.add(a.weight);
  return s.value();
}

double EmpiricalMeasure::integrate(const TestFunction& phi) const {
  if (equal_weights_) {
    stats::CompensatedSum s;
    for (const auto& a : atoms_) s.add(phi(a.point));
    return s.value() / static_cast<double>(atoms_.size());
  }
  stats::CompensatedSum s;
  for (const auto& a : atoms_) s.add(a.weight * phi(a.point));
  return s.value();
}

double EmpiricalMeasure::mass_in(const BallQuery& ball) const {
  if (equal_weights_) {
    const auto hits = std::count_if(atoms_.begin(), atoms_.end(),
                                    [&](const WeightedAtom& a) { return ball.contains(a.point); });
    return static_cast<double>(hits) / static_cast<double>(atoms_.size());
  }
  stats::CompensatedSum s;
  for (const auto& a : atoms_) {
    if (ball.contains(a.point)) s.add(a.weight);
  }
  return s.value();
}

double EmpiricalMeasure::mass_in(const Enlargement& set) const {
  if (equal_weights_) {
    const auto hits = std::count_if(atoms_.begin(), atoms_.end(),
                                    [&](const WeightedAtom& a) { return set.contains(a.point); });
    return static_cast<double>(hits) / static_cast<double>(atoms_.size());
  }
  stats::CompensatedSum s;
  for (const auto& a : atoms_) {
    if (set.contains(a.point)) s.add(a.weight);
  }
  return s.value();
}

bool EmpiricalMeasure::charges(const BallQuery& ball) const {
  return std::any_of(atoms_.begin(), atoms_.end(),
                     [&](const WeightedAtom& a) { return ball.contains(a.point); });
}

namespace {
bool point_less(const Point& a, const Point& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}
}  // namespace

EmpiricalMeasure EmpiricalMeasure::compacted() const {
  std::vector<std::size_t> order(atoms_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return point_less(atoms_[i].point, atoms_[j].point);
  });
  EmpiricalMeasure out(dimension_);
  for (std::size_t idx : order) {
    const auto& a = atoms_[idx];
    if (!out.atoms_.empty() && out.atoms_.back().point == a.point) {
      out.atoms_.back().weight += a.weight;
    } else {
      out.atoms_.push_back(a);
    }
  }
  return out;
}

InitialLaw InitialLaw::point(Point x) {
  InitialLaw law;
  law.kind_ = Kind::point;
  law.dimension_ = static_cast<int>(x.size());
  law.points_ = {std::move(x)};
  return law;
}

InitialLaw InitialLaw::atoms(std::vector<Point> points) {
  if (points.empty()) throw std::invalid_argument("atom law needs at least one point");
  InitialLaw law;
  law.kind_ = Kind::atoms;
  law.dimension_ = static_cast<int>(points.front().size());
  for (const auto& p : points) {
    if (p.size() != law.dimension_) throw std::invalid_argument("atom dimension mismatch");
  }
  law.points_ = std::move(points);
  return law;
}

InitialLaw InitialLaw::normal(double sd, int dimension) {
  if (!(sd >= 0.0) || dimension < 1) throw std::invalid_argument("bad normal initial law");
  InitialLaw law;
  law.kind_ = Kind::normal;
  law.dimension_ = dimension;
  law.sd_ = sd;
  return law;
}

Point InitialLaw::sample(Engine& rng) const {
  switch (kind_) {
    case Kind::point:
      return points_.front();
    case Kind::atoms:
      return points_[uniform_index(rng, points_.size())];
    case Kind::normal: {
      std::normal_distribution<double> g(0.0, sd_);
      Point x(dimension_);
      for (int i = 0; i < dimension_; ++i) x[i] = g(rng);
      return x;
    }
  }
  return Point::Zero(dimension_);
}

EmpiricalMeasure InitialLaw::as_measure() const {
  if (kind_ == Kind::normal) return EmpiricalMeasure(dimension_);
  return EmpiricalMeasure::uniform(points_);
}

std::string InitialLaw::to_string() const {
  switch (kind_) {
    case Kind::point:
      return "point:" + format_point(points_.front());
    case Kind::atoms: {
      std::string s = "atoms:";
      for (std::size_t i = 0; i < points_.size(); ++i) {
        if (i) s += ';';
        s += format_point(points_[i]);
      }
      return s;
    }
    case Kind::normal:
      return "normal:" + detail::format_double(sd_);
  }
  return "";
}

Point parse_point(std::string_view text) {
  const auto coords = detail::split(text, ',');
  if (coords.empty()) throw std::invalid_argument("empty point");
  Point x(static_cast<Eigen::Index>(coords.size()));
  for (std::size_t i = 0; i < coords.size(); ++i) x[i] = detail::parse_double(coords[i], "coordinate");
  return x;
}

std::string format_point(const Point& x) {
  std::string s;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (i) s += ',';
    s += detail::format_double(x[i]);
  }
  return s;
}

InitialLaw parse_initial_law(std::string_view spec, int dimension) {
  const auto colon = spec.find(':');
  const std::string name = detail::lower(detail::trim(spec.substr(0, colon)));
  const std::string body =
      colon == std::string_view::npos ? "" : detail::trim(spec.substr(colon + 1));
  InitialLaw law;
  if (name == "point") {
    law = InitialLaw::point(body.empty() ? Point::Zero(std::max(dimension, 1)) : parse_point(body));
  } else if (name == "atoms") {
    std::vector<Point> pts;
    for (const auto& p : detail::split(body, ';')) pts.push_back(parse_point(p));
    law = InitialLaw::atoms(std::move(pts));
  } else if (name == "normal") {
    law = InitialLaw::normal(body.empty() ? 1.0 : detail::parse_double(body, "normal sd"),
                             std::max(dimension, 1));
  } else {
    throw std::invalid_argument("unknown initial law '" + name + "'");
  }
  if (dimension > 0 && law.dimension() != dimension) {
    throw std::invalid_argument("initial law dimension does not match the mutation process");
  }
  return law;
}

namespace phi {

TestFunction indicator_ball(Point center, double radius) {
  BallQuery ball{std::move(center), radius};
  return [ball](const Point& x) { return ball.contains(x) ? 1.0 : 0.0; };
}

TestFunction coordinate(int index) {
  return [index](const Point& x) { return x[index]; };
}

TestFunction constant(double value) {
  return [value](const Point&) { return value; };
}

}  // namespace phi

}  // namespace fvlab
