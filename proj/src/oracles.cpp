#include "fvlab/oracles.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fvlab::validation {

namespace {

constexpr int kOrder = 20;

struct LegendreRule {
  std::array<double, kOrder> nodes{};
  std::array<double, kOrder> weights{};
};

// Newton iteration on P_20 from the Chebyshev-like initial guesses.
LegendreRule make_rule() {
  LegendreRule r;
  for (int i = 0; i < kOrder; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (kOrder + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= kOrder; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = kOrder * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    r.nodes[i] = x;
    r.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

const LegendreRule& rule() {
  static const LegendreRule r = make_rule();
  return r;
}

template <class F>
double composite(F&& f, double a, double b, int panels) {
  const auto& r = rule();
  const double h = (b - a) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    double s = 0.0;
    for (int i = 0; i < kOrder; ++i) s += r.weights[i] * f(lo + 0.5 * h * (r.nodes[i] + 1.0));
    total += 0.5 * h * s;
  }
  return total;
}

double ipow(double x, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= x;
  return r;
}

// Continuous density of the interior part at x, given x and 1 - x.
// The Beta normaliser uses B(2-a, a) = (1-a) pi / sin(pi a).
double density(const LambdaMeasure& lambda, double x, double omx) {
  double v = 0.0;
  for (const auto& c : lambda.betas()) {
    const double a = c.alpha;
    const double norm = std::abs(a - 1.0) < 1e-12 ? 1.0
                                                  : std::sin(std::numbers::pi * a) /
                                                        ((1.0 - a) * std::numbers::pi);
    v += c.mass * norm * std::pow(x, 1.0 - a) * std::pow(omx, a - 1.0);
  }
  for (const auto& d : lambda.densities()) v += d.density(x);
  return v;
}

}  // namespace

double brute_force_rate(const LambdaMeasure& lambda, int b, int k, int panels) {
  if (k < 2 || k > b) throw std::domain_error("need 2 <= k <= b");
  double rate = 0.0;
  if (k == 2) rate += lambda.kingman_mass();
  if (k == b) rate += lambda.top_mass();
  for (const auto& a : lambda.atoms()) {
    rate += a.mass * ipow(a.location, k - 2) * ipow(1.0 - a.location, b - k);
  }
  // Each Beta part gets x = y^p near 0 and 1 - x = z^q near 1 with exponents that
  // cancel its endpoint singularities.
  for (const auto& c : lambda.betas()) {
    const double a = c.alpha;
    const double norm = std::abs(a - 1.0) < 1e-12 ? 1.0
                                                  : std::sin(std::numbers::pi * a) /
                                                        ((1.0 - a) * std::numbers::pi);
    const double p = 1.0 / (2.0 - a);
    const double q = 1.0 / a;
    rate += c.mass * norm * p *
            composite(
                [&](double y) {
                  const double x = std::pow(y, p);
                  return ipow(x, k - 2) * std::pow(1.0 - x, b - k + a - 1.0);
                },
                0.0, std::pow(0.5, 1.0 / p), panels);
    rate += c.mass * norm * q *
            composite(
                [&](double z) {
                  const double omx = std::pow(z, q);
                  return std::pow(1.0 - omx, k - 1 - a) * ipow(omx, b - k);
                },
                0.0, std::pow(0.5, 1.0 / q), panels);
  }
  if (!lambda.densities().empty()) {
    auto dens = [&](double x) {
      double v = 0.0;
      for (const auto& d : lambda.densities()) v += d.density(x);
      return v;
    };
    const double edge = std::sqrt(0.5);
    // x = y^2 on the left half.
    rate += composite(
        [&](double y) {
          const double x = y * y;
          return 2.0 * y * ipow(x, k - 2) * ipow(1.0 - x, b - k) * dens(x);
        },
        0.0, edge, panels);
    // 1 - x = z^2 on the right half.
    rate += composite(
        [&](double z) {
          const double omx = z * z;
          const double x = 1.0 - omx;
          return 2.0 * z * ipow(x, k - 2) * ipow(omx, b - k) * dens(x);
        },
        0.0, edge, panels);
  }
  return rate;
}

namespace {

// P(Bin(m, u) >= r) for r in {0, 1, 2}.
double tail(int m, double u, int r) {
  if (r <= 0) return 1.0;
  if (m < r) return 0.0;
  const double lq = std::log1p(-u);
  const double p0 = std::exp(m * lq);
  if (r == 1) return -std::expm1(m * lq);
  const double direct = 1.0 - p0 - m * u * std::exp((m - 1) * lq);
  if (direct > 1e-4) return direct;
  // Series sum_{j>=2} C(m,j) u^j (1-u)^{m-j}.
  double term = 0.5 * m * (m - 1.0) * u * u * std::exp((m - 2) * lq);
  double sum = 0.0;
  for (int j = 2; j <= m && term > 0.0; ++j) {
    sum += term;
    term *= (m - j) / (j + 1.0) * u / (1.0 - u);
  }
  return sum;
}

}  // namespace

ThinningEventSampler::ThinningEventSampler(const LambdaMeasure& lambda, int n, int grid)
    : lambda_(lambda), n_(n) {
  if (lambda.kingman_mass() > 0.0) throw std::invalid_argument("thinning sampler excludes Lambda({0})");
  if (n < 2) throw std::invalid_argument("need n >= 2");
  if (!lambda.betas().empty() || !lambda.densities().empty()) {
    // u = (1 - cos(pi theta)) / 2, midpoint rule in theta.
    theta_cdf_.resize(static_cast<std::size_t>(grid) + 1, 0.0);
    const double h = 1.0 / grid;
    for (int c = 0; c < grid; ++c) {
      const double th = (c + 0.5) * h;
      const double u = 0.5 * (1.0 - std::cos(std::numbers::pi * th));
      const double omu = 0.5 * (1.0 + std::cos(std::numbers::pi * th));
      const double jac = 0.5 * std::numbers::pi * std::sin(std::numbers::pi * th);
      const double f = tail(n, u, 2) / (u * u) * density(lambda, u, omu) * jac;
      theta_cdf_[c + 1] = theta_cdf_[c] + f * h;
    }
    continuous_total_ = theta_cdf_.back();
  }
  total_ = continuous_total_;
  for (const auto& a : lambda.atoms()) {
    atom_weight_.push_back(a.mass * tail(n, a.location, 2) / (a.location * a.location));
    total_ += atom_weight_.back();
  }
  if (lambda.top_mass() > 0.0) {
    atom_weight_.push_back(lambda.top_mass());
    total_ += lambda.top_mass();
  }
}

double ThinningEventSampler::draw_u(Engine& rng) const {
  double target = uniform01(rng) * total_;
  if (target < continuous_total_) {
    const auto it = std::upper_bound(theta_cdf_.begin(), theta_cdf_.end(), target);
    const auto cell = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - theta_cdf_.begin() - 1, 0));
    const double h = 1.0 / static_cast<double>(theta_cdf_.size() - 1);
    const double th = (static_cast<double>(cell) + uniform01(rng)) * h;
    return 0.5 * (1.0 - std::cos(std::numbers::pi * th));
  }
  target -= continuous_total_;
  for (std::size_t i = 0; i < lambda_.atoms().size(); ++i) {
    if (target < atom_weight_[i]) return lambda_.atoms()[i].location;
    target -= atom_weight_[i];
  }
  return lambda_.top_mass() > 0.0 ? 1.0 : lambda_.atoms().back().location;
}

ThinningEventSampler::Draw ThinningEventSampler::next(Engine& rng) const {
  if (!(total_ > 0.0)) throw std::logic_error("zero event rate");
  Draw d;
  d.waiting_time = -std::log(uniform_open0(rng)) / total_;
  const double u = draw_u(rng);
  // Sequential Bernoulli(u) draws conditioned on at least two successes overall.
  int need = 2;
  for (int i = 1; i <= n_; ++i) {
    const int remaining = n_ - i + 1;
    const double p_yes = u >= 1.0 ? 1.0 : u * tail(remaining - 1, u, need - 1) / tail(remaining, u, need);
    if (uniform01(rng) < p_yes) {
      d.levels.push_back(i);
      need = std::max(need - 1, 0);
    }
  }
  return d;
}

}  // namespace fvlab::validation
