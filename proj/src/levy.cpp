#include "fvlab/levy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "fvlab/stats.hpp"
#include "parse_util.hpp"

namespace fvlab {

namespace {

double sphere_area(int d) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

// int_0^inf (1 - cos r) r^{-1-alpha} dr
double stable_radial_constant(double alpha) {
  if (std::abs(alpha - 1.0) < 1e-9) return 0.5 * std::numbers::pi;
  return std::tgamma(1.0 - alpha) * std::cos(0.5 * std::numbers::pi * alpha) / alpha;
}

// int over the unit sphere of |theta_1|^alpha dS(theta)
double stable_angular_constant(double alpha, int d) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * (d - 1)) * std::tgamma(0.5 * (alpha + 1.0)) /
         std::tgamma(0.5 * (d + alpha));
}

void require_dimension(int a, int b) {
  if (a != b) throw std::invalid_argument("Levy components have different dimensions");
}

}  // namespace

double PointJumps::rate() const {
  stats::CompensatedSum s;
  for (double m : masses) s.add(m);
  return s.value();
}

LevySpec::LevySpec(int dimension) : dimension_(dimension) {
  if (dimension < 1) throw std::invalid_argument("dimension must be positive");
  drift_ = Point::Zero(dimension);
  covariance_ = Eigen::MatrixXd::Zero(dimension, dimension);
  refresh();
}

LevySpec LevySpec::brownian(double sigma, int dimension) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be nonnegative");
  LevySpec s(dimension);
  s.set_covariance(sigma * sigma * Eigen::MatrixXd::Identity(dimension, dimension));
  return s;
}

LevySpec LevySpec::drift(Point a) {
  LevySpec s(static_cast<int>(a.size()));
  s.drift_ = std::move(a);
  s.refresh();
  return s;
}

LevySpec LevySpec::compound_poisson(std::vector<double> masses, std::vector<Point> points) {
  if (masses.empty() || masses.size() != points.size()) {
    throw std::invalid_argument("compound Poisson needs matching masses and points");
  }
  for (double m : masses) {
    if (!(m > 0.0) || !std::isfinite(m)) throw std::invalid_argument("jump masses must be positive");
  }
  const int d = static_cast<int>(points.front().size());
  for (const auto& p : points) {
    require_dimension(d, static_cast<int>(p.size()));
    if (p.isZero(0.0)) throw std::invalid_argument("jump measure must not charge the origin");
  }
  LevySpec s(d);
  s.point_jumps_ = PointJumps{std::move(masses), std::move(points)};
  s.refresh();
  return s;
}

LevySpec LevySpec::stable(double alpha, double scale, int dimension, double truncation) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw std::invalid_argument("stable index must lie in (0, 2)");
  if (!(scale > 0.0)) throw std::invalid_argument("stable scale must be positive");
  if (!(truncation > 0.0)) throw std::invalid_argument("truncation radius must be positive");
  LevySpec s(dimension);
  s.stable_ = StableJumps{alpha, scale, truncation};
  s.refresh();
  return s;
}

LevySpec& LevySpec::set_covariance(const Eigen::MatrixXd& q) {
  if (q.rows() != dimension_ || q.cols() != dimension_) {
    throw std::invalid_argument("covariance has the wrong shape");
  }
  const double scale = std::max(1.0, q.cwiseAbs().maxCoeff());
  if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::invalid_argument("covariance must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (q + q.transpose()));
  if (eig.eigenvalues().minCoeff() < -1e-12 * scale) {
    throw std::invalid_argument("covariance must be positive semidefinite");
  }
  covariance_ = q;
  refresh();
  return *this;
}

void LevySpec::refresh() {
  has_gaussian_ = !covariance_.isZero(0.0);
  if (has_gaussian_) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (covariance_ + covariance_.transpose()));
    const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    factor_ = eig.eigenvectors() * root.asDiagonal();
  } else {
    factor_ = Eigen::MatrixXd::Zero(dimension_, dimension_);
  }
  effective_drift_ = drift_;
  if (point_jumps_) {
    for (std::size_t j = 0; j < point_jumps_->masses.size(); ++j) {
      const Point& x = point_jumps_->points[j];
      if (x.norm() < 1.0) effective_drift_ -= point_jumps_->masses[j] * x;
    }
  }
}

bool LevySpec::is_trivial() const {
  return drift_.isZero(0.0) && !has_gaussian_ && !point_jumps_ && !stable_;
}

LevySpec operator+(LevySpec a, const LevySpec& b) {
  require_dimension(a.dimension_, b.dimension_);
  a.drift_ += b.drift_;
  a.covariance_ += b.covariance_;
  if (b.point_jumps_) {
    if (!a.point_jumps_) a.point_jumps_ = PointJumps{};
    auto& pj = *a.point_jumps_;
    pj.masses.insert(pj.masses.end(), b.point_jumps_->masses.begin(), b.point_jumps_->masses.end());
    pj.points.insert(pj.points.end(), b.point_jumps_->points.begin(), b.point_jumps_->points.end());
  }
  if (b.stable_) {
    if (a.stable_) throw std::invalid_argument("at most one stable component is supported");
    a.stable_ = b.stable_;
  }
  a.refresh();
  return a;
}

bool operator==(const LevySpec& a, const LevySpec& b) {
  if (a.dimension_ != b.dimension_ || a.drift_ != b.drift_ || a.covariance_ != b.covariance_) {
    return false;
  }
  if (a.point_jumps_.has_value() != b.point_jumps_.has_value()) return false;
  if (a.point_jumps_) {
    if (a.point_jumps_->masses != b.point_jumps_->masses) return false;
    if (a.point_jumps_->points != b.point_jumps_->points) return false;
  }
  if (a.stable_.has_value() != b.stable_.has_value()) return false;
  if (a.stable_) {
    return a.stable_->alpha == b.stable_->alpha && a.stable_->scale == b.stable_->scale &&
           a.stable_->truncation == b.stable_->truncation;
  }
  return true;
}

std::string LevySpec::to_string() const {
  std::vector<std::string> terms;
  if (!drift_.isZero(0.0)) terms.push_back("drift:" + format_point(drift_));
  if (has_gaussian_) {
    const double s2 = covariance_(0, 0);
    if (covariance_ == s2 * Eigen::MatrixXd::Identity(dimension_, dimension_)) {
      terms.push_back("brownian:sigma=" + detail::format_double(std::sqrt(s2)) +
                      ",d=" + std::to_string(dimension_));
    } else {
      std::string g = "gaussian:";
      for (int i = 0; i < dimension_; ++i) {
        if (i) g += ';';
        g += format_point(covariance_.row(i).transpose());
      }
      terms.push_back(g);
    }
  }
  if (point_jumps_) {
    const double rate = point_jumps_->rate();
    std::string c = "cpois:rate=" + detail::format_double(rate) + ",jump=point:";
    for (std::size_t j = 0; j < point_jumps_->points.size(); ++j) {
      if (j) c += ';';
      c += detail::format_double(point_jumps_->masses[j] / rate) + "@" +
           format_point(point_jumps_->points[j]);
    }
    terms.push_back(c);
  }
  if (stable_) {
    terms.push_back("stable:alpha=" + detail::format_double(stable_->alpha) +
                    ",scale=" + detail::format_double(stable_->scale) +
                    ",d=" + std::to_string(dimension_) +
                    ",trunc=" + detail::format_double(stable_->truncation));
  }
  if (terms.empty()) return "none:" + std::to_string(dimension_);
  std::string out = terms.front();
  for (std::size_t i = 1; i < terms.size(); ++i) out += "+" + terms[i];
  return out;
}

namespace {

struct KeyValues {
  std::vector<std::pair<std::string, std::string>> items;

  const std::string* find(const std::string& key) const {
    for (const auto& [k, v] : items) {
      if (k == key) return &v;
    }
    return nullptr;
  }
};

KeyValues parse_key_values(std::string_view body) {
  KeyValues kv;
  for (const auto& item : detail::split(body, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("expected key=value in '" + item + "'");
    kv.items.emplace_back(detail::lower(detail::trim(item.substr(0, eq))), detail::trim(item.substr(eq + 1)));
  }
  return kv;
}

void check_keys(const KeyValues& kv, std::initializer_list<const char*> allowed, const char* term) {
  for (const auto& [k, v] : kv.items) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; })) {
      throw std::invalid_argument(std::string("unknown key '") + k + "' in " + term + " term");
    }
  }
}

// A parsed term whose dimension may still be open (-1).
struct PendingTerm {
  std::string name;
  std::string body;
  int dimension = -1;
};

}  // namespace

LevySpec parse_levy(std::string_view spec) {
  std::vector<PendingTerm> terms;
  for (const auto& term : detail::split_terms(spec)) {
    const auto colon = term.find(':');
    PendingTerm p;
    p.name = detail::lower(detail::trim(term.substr(0, colon)));
    p.body = colon == std::string::npos ? "" : detail::trim(term.substr(colon + 1));
    terms.push_back(std::move(p));
  }
  // Pass 1: explicit dimensions.
  int dim = -1;
  auto settle = [&](int d) {
    if (d < 1) throw std::invalid_argument("dimension must be positive");
    if (dim != -1 && dim != d) throw std::invalid_argument("Levy terms disagree on dimension");
    dim = d;
  };
  for (auto& p : terms) {
    if (p.name == "drift") {
      settle(static_cast<int>(parse_point(p.body).size()));
    } else if (p.name == "gaussian") {
      settle(static_cast<int>(detail::split(p.body, ';').size()));
    } else if (p.name == "cpois") {
      const auto at = p.body.find("jump=");
      if (at == std::string::npos) throw std::invalid_argument("cpois needs jump=point:...");
      std::string list = p.body.substr(at + 5);
      if (list.rfind("point:", 0) != 0) throw std::invalid_argument("cpois jumps must be jump=point:...");
      list = list.substr(6);
      const auto first = detail::split(list, ';').at(0);
      const auto amp = first.find('@');
      settle(static_cast<int>(parse_point(amp == std::string::npos ? first : first.substr(amp + 1)).size()));
    } else if (p.name == "brownian" || p.name == "stable") {
      const auto kv = parse_key_values(p.body);
      if (const auto* d = kv.find("d")) settle(static_cast<int>(detail::parse_int(*d, "dimension")));
    } else if (p.name == "none") {
      if (!p.body.empty()) settle(static_cast<int>(detail::parse_int(p.body, "dimension")));
    } else {
      throw std::invalid_argument("unknown Levy component '" + p.name + "'");
    }
  }
  if (dim == -1) dim = 1;

  LevySpec result(dim);
  for (const auto& p : terms) {
    if (p.name == "drift") {
      result = result + LevySpec::drift(parse_point(p.body));
    } else if (p.name == "gaussian") {
      const auto rows = detail::split(p.body, ';');
      Eigen::MatrixXd q(dim, dim);
      for (int i = 0; i < dim; ++i) {
        const Point r = parse_point(rows[i]);
        if (r.size() != dim) throw std::invalid_argument("gaussian covariance must be square");
        q.row(i) = r.transpose();
      }
      result = result + LevySpec(dim).set_covariance(q);
    } else if (p.name == "brownian") {
      const auto kv = parse_key_values(p.body);
      check_keys(kv, {"sigma", "d"}, "brownian");
      const auto* sigma = kv.find("sigma");
      result = result + LevySpec::brownian(sigma ? detail::parse_double(*sigma, "sigma") : 1.0, dim);
    } else if (p.name == "stable") {
      const auto kv = parse_key_values(p.body);
      check_keys(kv, {"alpha", "scale", "d", "trunc"}, "stable");
      const auto* alpha = kv.find("alpha");
      if (!alpha) throw std::invalid_argument("stable needs alpha=");
      const auto* scale = kv.find("scale");
      const auto* trunc = kv.find("trunc");
      result = result + LevySpec::stable(detail::parse_double(*alpha, "alpha"),
                                         scale ? detail::parse_double(*scale, "scale") : 1.0, dim,
                                         trunc ? detail::parse_double(*trunc, "trunc") : 1e-3);
    } else if (p.name == "cpois") {
      const auto at = p.body.find("jump=");
      std::string head = detail::trim(p.body.substr(0, at));
      if (!head.empty()) {
        if (head.back() != ',') throw std::invalid_argument("cpois: jump= must follow a ','");
        head.pop_back();
      }
      const auto kv = head.empty() ? KeyValues{} : parse_key_values(head);
      check_keys(kv, {"rate"}, "cpois");
      const auto* rate_text = kv.find("rate");
      const double rate = rate_text ? detail::parse_double(*rate_text, "rate") : 1.0;
      if (!(rate > 0.0)) throw std::invalid_argument("cpois rate must be positive");
      std::vector<double> weights;
      std::vector<Point> points;
      for (const auto& item : detail::split(p.body.substr(at + 5 + 6), ';')) {
        const auto amp = item.find('@');
        if (amp == std::string::npos) {
          weights.push_back(1.0);
          points.push_back(parse_point(item));
        } else {
          weights.push_back(detail::parse_double(item.substr(0, amp), "jump weight"));
          points.push_back(parse_point(item.substr(amp + 1)));
        }
      }
      double total = 0.0;
      for (double w : weights) total += w;
      for (double& w : weights) w = rate * w / total;
      result = result + LevySpec::compound_poisson(std::move(weights), std::move(points));
    }
  }
  return result;
}

void add_increment(const LevySpec& spec, double dt, Engine& rng, Eigen::Ref<Point> x) {
  if (!(dt >= 0.0)) throw std::invalid_argument("increment duration must be nonnegative");
  if (dt == 0.0) return;
  const int d = spec.dimension();
  x += spec.effective_drift() * dt;
  std::normal_distribution<double> gauss(0.0, 1.0);
  if (spec.has_gaussian()) {
    Point g(d);
    for (int i = 0; i < d; ++i) g[i] = gauss(rng);
    x += spec.covariance_factor() * g * std::sqrt(dt);
  }
  if (const auto& pj = spec.point_jumps()) {
    const double rate = pj->rate();
    std::poisson_distribution<long> count(rate * dt);
    const long jumps = count(rng);
    for (long j = 0; j < jumps; ++j) {
      std::size_t idx = 0;
      if (pj->masses.size() > 1) {
        const double u = uniform01(rng) * rate;
        double acc = 0.0;
        while (idx + 1 < pj->masses.size() && u >= (acc += pj->masses[idx])) ++idx;
      }
      x += pj->points[idx];
    }
  }
  if (const auto& st = spec.stable_jumps()) {
    const double area = sphere_area(d);
    const double delta = st->truncation;
    const double big_rate = area * st->scale * std::pow(delta, -st->alpha) / st->alpha;
    std::poisson_distribution<long> count(big_rate * dt);
    const long jumps = count(rng);
    Point dir(d);
    for (long j = 0; j < jumps; ++j) {
      const double r = delta * std::pow(uniform_open0(rng), -1.0 / st->alpha);
      if (d == 1) {
        dir[0] = (rng() >> 63) ? 1.0 : -1.0;
      } else {
        do {
          for (int i = 0; i < d; ++i) dir[i] = gauss(rng);
        } while (dir.norm() == 0.0);
        dir.normalize();
      }
      x += r * dir;
    }
    const double small_var =
        area * st->scale * std::pow(delta, 2.0 - st->alpha) / ((2.0 - st->alpha) * d);
    const double sd = std::sqrt(small_var * dt);
    for (int i = 0; i < d; ++i) x[i] += sd * gauss(rng);
  }
}

Point sample_increment(const LevySpec& spec, double dt, Engine& rng) {
  Point x = Point::Zero(spec.dimension());
  add_increment(spec, dt, rng, x);
  return x;
}

std::complex<double> char_exponent(const LevySpec& spec, const Point& xi) {
  if (xi.size() != spec.dimension()) throw std::invalid_argument("xi has the wrong dimension");
  using C = std::complex<double>;
  const C i(0.0, 1.0);
  C psi = -i * spec.drift_vector().dot(xi) + 0.5 * xi.dot(spec.covariance() * xi);
  if (const auto& pj = spec.point_jumps()) {
    for (std::size_t j = 0; j < pj->masses.size(); ++j) {
      const double s = pj->points[j].dot(xi);
      C term = 1.0 - std::exp(i * s);
      if (pj->points[j].norm() < 1.0) term += i * s;
      psi += pj->masses[j] * term;
    }
  }
  if (const auto& st = spec.stable_jumps()) {
    psi += st->scale * stable_radial_constant(st->alpha) *
           stable_angular_constant(st->alpha, spec.dimension()) * std::pow(xi.norm(), st->alpha);
  }
  return psi;
}

Estimate small_ball_prob(const LevySpec& spec, double t, double eps, long replicas, Engine& rng) {
  if (!(t > 0.0) || !(eps > 0.0)) throw std::invalid_argument("t and eps must be positive");
  if (replicas < 100) throw std::invalid_argument("small_ball_prob needs at least 100 replicas");
  long hits = 0;
  Point x(spec.dimension());
  for (long r = 0; r < replicas; ++r) {
    x.setZero();
    add_increment(spec, t, rng, x);
    if (x.norm() < eps) ++hits;
  }
  const double p = static_cast<double>(hits) / static_cast<double>(replicas);
  return {p, stats::binomial_stderr(p, replicas)};
}

Estimate semigroup_apply(const LevySpec& spec, double t, const TestFunction& phi, const Point& x,
                         long replicas, Engine& rng) {
  if (!(t >= 0.0)) throw std::invalid_argument("t must be nonnegative");
  if (replicas < 1) throw std::invalid_argument("need at least one replica");
  stats::MeanAccumulator acc;
  Point y(spec.dimension());
  for (long r = 0; r < replicas; ++r) {
    y = x;
    add_increment(spec, t, rng, y);
    acc.add(phi(y));
  }
  return {acc.mean(), acc.stderr_of_mean()};
}

LevySpec reversed(const LevySpec& spec) {
  LevySpec out = LevySpec::drift(-spec.drift_vector());
  out.set_covariance(spec.covariance());
  if (const auto& pj = spec.point_jumps()) {
    std::vector<Point> mirrored;
    for (const auto& p : pj->points) mirrored.push_back(-p);
    out = out + LevySpec::compound_poisson(pj->masses, std::move(mirrored));
  }
  if (const auto& st = spec.stable_jumps()) {
    out = out + LevySpec::stable(st->alpha, st->scale, spec.dimension(), st->truncation);
  }
  return out;
}

EmpiricalMeasure convolve_support(const PointJumps& nu, const EmpiricalMeasure& mu, int k) {
  if (k < 0) throw std::invalid_argument("convolution power must be nonnegative");
  if (nu.masses.size() != nu.points.size()) throw std::invalid_argument("malformed jump measure");
  EmpiricalMeasure current = mu;
  constexpr std::size_t kMaxAtoms = 5'000'000;
  for (int step = 0; step < k; ++step) {
    if (current.size() * nu.points.size() > kMaxAtoms) {
      throw std::length_error("convolution would exceed the atom budget");
    }
    EmpiricalMeasure next(mu.dimension());
    for (const auto& a : current.atoms()) {
      for (std::size_t j = 0; j < nu.points.size(); ++j) {
        next.add(a.weight * nu.masses[j], a.point + nu.points[j]);
      }
    }
    current = next.compacted();
  }
  return current;
}

}  // namespace fvlab
