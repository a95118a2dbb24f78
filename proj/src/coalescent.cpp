#include "fvlab/coalescent.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "fvlab/quadrature.hpp"

namespace fvlab {

namespace {

const double kLn10 = std::log(10.0);

double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

double log_choose(double b, double k) {
  return std::lgamma(b + 1.0) - std::lgamma(k + 1.0) - std::lgamma(b - k + 1.0);
}

// P(Binomial(b, x) >= 2) without cancellation when b x is small.
double binomial_at_least_two(int b, double x) {
  if (b < 2) return 0.0;
  const double lq = std::log1p(-x);
  const double p0 = std::exp(b * lq);
  const double p1 = b * x * std::exp((b - 1) * lq);
  const double direct = 1.0 - p0 - p1;
  if (direct > 1e-3) return direct;
  double term = std::exp(log_choose(b, 2) + 2.0 * std::log(x) + (b - 2) * lq);
  double sum = 0.0;
  const double odds = x / (1.0 - x);
  for (int k = 2; k <= b; ++k) {
    sum += term;
    if (term <= 1e-18 * sum) break;
    term *= static_cast<double>(b - k) / (k + 1) * odds;
  }
  return sum;
}

// First Beta(2-alpha, alpha) size weight C(b,2) B(2-alpha, b-2+alpha) / B(2-alpha, alpha).
double beta_first_weight(double alpha, int b) {
  return std::exp(log_choose(b, 2) + log_beta(2.0 - alpha, b - 2.0 + alpha) -
                  log_beta(2.0 - alpha, alpha));
}

// w_{k+1} / w_k for the Beta size weights.
double beta_weight_ratio(double alpha, int b, int k) {
  return static_cast<double>(b - k) / (k + 1) * (k - alpha) / (b - k - 1 + alpha);
}

double beta_total(double alpha, int b) {
  double w = beta_first_weight(alpha, b);
  double sum = 0.0;
  for (int k = 2; k <= b; ++k) {
    sum += w;
    if (k < b) w *= beta_weight_ratio(alpha, b, k);
  }
  return sum;
}

// e^{-y} - 1 + y, accurate for small y.
double exp_remainder(double y) {
  if (y < 1e-4) return y * y * (0.5 - y * (1.0 / 6.0 - y / 24.0));
  return std::expm1(-y) + y;
}

double density_rate(const DensityComponent& d, int b, int k) {
  return quad::unit_interval([&](double x, double omx) {
    return std::pow(x, k - 2) * std::pow(omx, b - k) * d.density(x);
  });
}

TailReport classify_decades(std::vector<double> decades) {
  TailReport r;
  r.decades = std::move(decades);
  const auto& d = r.decades;
  for (double v : d) r.partial_sum += v;
  constexpr std::size_t window = 5;
  if (d.size() < window + 1) return r;
  double log_ratio = 0.0;
  for (std::size_t i = d.size() - window; i < d.size(); ++i) {
    if (!(d[i] > 0.0) || !(d[i - 1] > 0.0) || !std::isfinite(d[i])) {
      // A vanishing tail is convergence; a non-finite one divergence.
      if (d[i] == 0.0) {
        r.decay_ratio = 0.0;
        r.remainder_estimate = 0.0;
        r.convergent = Verdict::yes;
      } else {
        r.decay_ratio = std::numeric_limits<double>::infinity();
        r.convergent = Verdict::no;
      }
      return r;
    }
    log_ratio += std::log(d[i] / d[i - 1]);
  }
  r.decay_ratio = std::exp(log_ratio / window);
  if (r.decay_ratio < 1.0) {
    r.remainder_estimate = d.back() * r.decay_ratio / (1.0 - r.decay_ratio);
  }
  // Per-decade decay of at least 0.93 is a power law steeper than u^{-1.03};
  // at least 0.97 means no faster than u^{-1.013}, indistinguishable from divergence.
  if (r.decay_ratio <= 0.93 && r.remainder_estimate <= 0.05 * r.partial_sum) {
    r.convergent = Verdict::yes;
  } else if (r.decay_ratio >= 0.97) {
    r.convergent = Verdict::no;
  }
  return r;
}

}  // namespace

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::yes: return "yes";
    case Verdict::no: return "no";
    case Verdict::undetermined: return "undetermined";
  }
  return "?";
}

double merger_rate(const LambdaMeasure& lambda, int b, int k) {
  if (b < 2 || k < 2 || k > b) {
    throw std::domain_error("merger_rate requires 2 <= k <= b");
  }
  double rate = 0.0;
  if (k == 2) rate += lambda.kingman_mass();
  if (k == b) rate += lambda.top_mass();
  for (const auto& a : lambda.atoms()) {
    rate += a.mass * std::pow(a.location, k - 2) * std::pow(1.0 - a.location, b - k);
  }
  for (const auto& c : lambda.betas()) {
    rate += c.mass *
            std::exp(log_beta(k - c.alpha, b - k + c.alpha) - log_beta(2.0 - c.alpha, c.alpha));
  }
  for (const auto& d : lambda.densities()) rate += density_rate(d, b, k);
  return rate;
}

double total_event_rate(const LambdaMeasure& lambda, int b) {
  if (b < 2) throw std::domain_error("total_event_rate requires b >= 2");
  return MergerRateTable(lambda, b, b).total_rate(b);
}

MergerRateTable::MergerRateTable(LambdaMeasure lambda, int max_blocks, int min_blocks)
    : lambda_(std::move(lambda)), max_blocks_(max_blocks), min_blocks_(std::max(min_blocks, 2)) {
  if (max_blocks < 2 || min_blocks_ > max_blocks) {
    throw std::invalid_argument("rate table needs 2 <= min_blocks <= max_blocks");
  }
  if (lambda_.kingman_mass() > 0.0) components_.push_back({Kind::kingman, 0});
  if (lambda_.top_mass() > 0.0) components_.push_back({Kind::top, 0});
  for (std::size_t i = 0; i < lambda_.atoms().size(); ++i) components_.push_back({Kind::atom, i});
  for (std::size_t i = 0; i < lambda_.betas().size(); ++i) components_.push_back({Kind::beta, i});
  for (std::size_t i = 0; i < lambda_.densities().size(); ++i) {
    components_.push_back({Kind::density, i});
  }
  totals_.assign(static_cast<std::size_t>(max_blocks_) + 1, 0.0);
  component_totals_.assign(components_.size(), totals_);
  for (std::size_t c = 0; c < components_.size(); ++c) {
    for (int b = min_blocks_; b <= max_blocks_; ++b) {
      component_totals_[c][b] = component_total(components_[c], b);
      totals_[b] += component_totals_[c][b];
    }
  }
}

double MergerRateTable::component_total(const Component& c, int b) const {
  switch (c.kind) {
    case Kind::kingman:
      return lambda_.kingman_mass() * 0.5 * b * (b - 1.0);
    case Kind::top:
      return lambda_.top_mass();
    case Kind::atom: {
      const auto& a = lambda_.atoms()[c.index];
      return a.mass / (a.location * a.location) * binomial_at_least_two(b, a.location);
    }
    case Kind::beta: {
      const auto& be = lambda_.betas()[c.index];
      return be.mass * beta_total(be.alpha, b);
    }
    case Kind::density: {
      const auto& d = lambda_.densities()[c.index];
      return quad::unit_interval([&](double x, double) {
        return binomial_at_least_two(b, x) / (x * x) * d.density(x);
      });
    }
  }
  return 0.0;
}

double MergerRateTable::total_rate(int b) const {
  if (b < 2) return 0.0;
  if (b > max_blocks_ || b < min_blocks_) {
    throw std::out_of_range("rate table does not cover this block count");
  }
  return totals_[b];
}

int MergerRateTable::sample_merger_size(int b, Engine& rng) const {
  const double total = total_rate(b);
  if (!(total > 0.0)) throw std::logic_error("no mergers possible with zero total rate");
  double target = uniform01(rng) * total;
  std::size_t chosen = components_.size() - 1;
  for (std::size_t c = 0; c < components_.size(); ++c) {
    if (target < component_totals_[c][b]) {
      chosen = c;
      break;
    }
    target -= component_totals_[c][b];
  }
  return sample_component_size(components_[chosen], b, component_totals_[chosen][b], rng);
}

int MergerRateTable::sample_component_size(const Component& c, int b, double total,
                                           Engine& rng) const {
  switch (c.kind) {
    case Kind::kingman:
      return 2;
    case Kind::top:
      return b;
    case Kind::atom: {
      const double x = lambda_.atoms()[c.index].location;
      const double p2 = binomial_at_least_two(b, x);
      if (p2 >= 0.25) {
        std::binomial_distribution<int> draw(b, x);
        while (true) {
          const int k = draw(rng);
          if (k >= 2) return k;
        }
      }
      double target = uniform01(rng) * p2;
      double term = std::exp(log_choose(b, 2) + 2.0 * std::log(x) + (b - 2) * std::log1p(-x));
      const double odds = x / (1.0 - x);
      for (int k = 2; k < b; ++k) {
        if (target < term) return k;
        target -= term;
        term *= static_cast<double>(b - k) / (k + 1) * odds;
      }
      return b;
    }
    case Kind::beta: {
      const auto& be = lambda_.betas()[c.index];
      const double alpha = be.alpha;
      double target = uniform01(rng) * total / be.mass;
      double w = beta_first_weight(alpha, b);
      for (int k = 2; k < b; ++k) {
        if (target < w) return k;
        target -= w;
        w *= beta_weight_ratio(alpha, b, k);
      }
      return b;
    }
    case Kind::density: {
      const auto& d = lambda_.densities()[c.index];
      std::vector<double> weights;
      weights.reserve(static_cast<std::size_t>(b) - 1);
      for (int k = 2; k <= b; ++k) {
        weights.push_back(std::exp(log_choose(b, k)) * density_rate(d, b, k));
      }
      std::discrete_distribution<int> draw(weights.begin(), weights.end());
      return 2 + draw(rng);
    }
  }
  return 2;
}

std::vector<std::size_t> uniform_subset(std::size_t b, std::size_t k, Engine& rng) {
  if (k > b) throw std::invalid_argument("subset larger than population");
  std::vector<std::size_t> out;
  out.reserve(k);
  if (k == b) {
    out.resize(b);
    std::iota(out.begin(), out.end(), std::size_t{0});
    return out;
  }
  // Floyd's algorithm.
  if (k <= 32) {
    for (std::size_t j = b - k; j < b; ++j) {
      const std::size_t t = uniform_index(rng, j + 1);
      if (std::find(out.begin(), out.end(), t) == out.end()) {
        out.push_back(t);
      } else {
        out.push_back(j);
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }
  std::vector<char> mark(b, 0);
  for (std::size_t j = b - k; j < b; ++j) {
    const std::size_t t = uniform_index(rng, j + 1);
    mark[mark[t] ? j : t] = 1;
  }
  for (std::size_t i = 0; i < b; ++i) {
    if (mark[i]) out.push_back(i);
  }
  return out;
}

CoalescentPath simulate_coalescent(const MergerRateTable& table, int n, double horizon,
                                   Engine& rng) {
  if (n < 1) throw std::invalid_argument("simulate_coalescent requires n >= 1");
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  if (n > table.max_blocks() || table.min_blocks() > 2) {
    throw std::invalid_argument("rate table must cover 2..n blocks");
  }
  CoalescentPath path(n, horizon);
  int b = n;
  double t = 0.0;
  while (b >= 2) {
    const double rate = table.total_rate(b);
    if (!(rate > 0.0)) break;
    t += exponential(rng, rate);
    if (t > horizon) break;
    const int k = table.sample_merger_size(b, rng);
    path.append({t, uniform_subset(static_cast<std::size_t>(b), static_cast<std::size_t>(k), rng)});
    b -= k - 1;
  }
  return path;
}

CoalescentPath simulate_coalescent(const LambdaMeasure& lambda, int n, double horizon,
                                   Engine& rng) {
  if (n < 2) return CoalescentPath(std::max(n, 1), horizon);
  return simulate_coalescent(MergerRateTable(lambda, n), n, horizon, rng);
}

double first_time_together(const CoalescentPath& path, int a, int b) {
  const int n = path.initial_n();
  if (a < 1 || b < 1 || a > n || b > n) throw std::out_of_range("label outside [n]");
  if (a == b) return 0.0;
  // Singletons start ordered by label.
  std::size_t pa = static_cast<std::size_t>(a - 1);
  std::size_t pb = static_cast<std::size_t>(b - 1);
  auto relocate = [](std::size_t q, const std::vector<std::size_t>& merged) {
    if (std::binary_search(merged.begin(), merged.end(), q)) return merged.front();
    const auto below = std::lower_bound(merged.begin() + 1, merged.end(), q) - (merged.begin() + 1);
    return q - static_cast<std::size_t>(below);
  };
  for (const auto& e : path.events()) {
    pa = relocate(pa, e.blocks);
    pb = relocate(pb, e.blocks);
    if (pa == pb) return e.time;
  }
  return std::numeric_limits<double>::infinity();
}

std::size_t blocks_with_frequency(const CoalescentPath& path, double t, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw std::domain_error("frequency threshold must lie in [0, 1]");
  }
  if (threshold == 0.0) return path.block_count_at(t);
  const double n = path.initial_n();
  std::size_t count = 0;
  for (int size : path.block_sizes_at(t)) {
    if (size >= threshold * n * (1.0 - 1e-12)) ++count;
  }
  return count;
}

double psi(const LambdaMeasure& lambda, double u) {
  if (!(u >= 0.0)) throw std::domain_error("psi requires u >= 0");
  if (u == 0.0) return 0.0;
  double value = lambda.kingman_mass() * u * u;
  value += lambda.top_mass() * exp_remainder(u);
  for (const auto& a : lambda.atoms()) {
    value += a.mass * exp_remainder(u * a.location) / (a.location * a.location);
  }
  if (lambda.has_continuous_part()) {
    value += quad::unit_interval(
        [&](double x, double omx) {
          return exp_remainder(u * x) / (x * x) * lambda.interior_density(x, omx);
        },
        u, {1e-12, 1e-11});
  }
  return value;
}

double speed_lower_constant(const LambdaMeasure& lambda) {
  const double k = lambda.kingman_mass() + 0.5 * (lambda.interior_mass() + lambda.top_mass());
  if (!(k > 0.0)) throw std::domain_error("speed constant undefined for the zero measure");
  return 1.0 / k;
}

namespace {

// int over s in [s0, s1] of e^s / psi(e^s), i.e. int du / psi(u) over [e^s0, e^s1].
double inverse_psi_log_integral(const LambdaMeasure& lambda, double s0, double s1) {
  return quad::adaptive(
      [&](double s) {
        const double u = std::exp(s);
        return u / psi(lambda, u);
      },
      s0, s1, {1e-14, 1e-12});
}

}  // namespace

TailReport cdi_tail_report(const LambdaMeasure& lambda) {
  if (lambda.is_zero()) {
    TailReport r;
    r.decay_ratio = std::numeric_limits<double>::infinity();
    r.partial_sum = std::numeric_limits<double>::infinity();
    r.convergent = Verdict::no;
    return r;
  }
  std::vector<double> decades;
  constexpr int kDecades = 40;
  for (int k = 0; k < kDecades; ++k) {
    decades.push_back(inverse_psi_log_integral(lambda, k * kLn10, (k + 1) * kLn10));
  }
  return classify_decades(std::move(decades));
}

Verdict comes_down_from_infinity(const LambdaMeasure& lambda) {
  if (lambda.top_mass() > 0.0) {
    throw std::domain_error("coming down from infinity is classified only when Lambda({1}) = 0");
  }
  if (lambda.is_zero()) return Verdict::no;
  if (lambda.kingman_mass() > 0.0) return Verdict::yes;
  return cdi_tail_report(lambda).convergent;
}

double psi_tail_integral(const LambdaMeasure& lambda, double v) {
  if (!(v > 0.0)) throw std::domain_error("tail integral needs v > 0");
  if (lambda.is_zero()) return std::numeric_limits<double>::infinity();
  const double s0 = std::log(v);
  double sum = 0.0;
  double previous = 0.0;
  constexpr int kMaxDecades = 600;
  for (int j = 0; j < kMaxDecades; ++j) {
    const double d = inverse_psi_log_integral(lambda, s0 + j * kLn10, s0 + (j + 1) * kLn10);
    sum += d;
    if (j >= 2 && previous > 0.0) {
      const double r = d / previous;
      if (r < 1.0) {
        const double rest = d * r / (1.0 - r);
        if (rest <= 1e-13 * sum) return sum + rest;
      }
    }
    if (d == 0.0) return sum;
    previous = d;
  }
  return std::numeric_limits<double>::infinity();
}

double v_of_t(const LambdaMeasure& lambda, double t) {
  if (!(t > 0.0)) throw std::domain_error("v(t) requires t > 0");
  const Verdict cdi = comes_down_from_infinity(lambda);
  if (cdi == Verdict::no) return std::numeric_limits<double>::infinity();
  if (cdi == Verdict::undetermined) {
    throw std::domain_error("v(t): coming-down-from-infinity status is undetermined");
  }
  // psi(u) <= u^2 / c gives int_{c/t}^inf du/psi >= t, so c/t brackets from below.
  // Newton on log I against log v (exact for power-law psi), safeguarded by the bracket.
  double lo = speed_lower_constant(lambda) / t;
  double hi = std::numeric_limits<double>::infinity();
  double v = lo;
  for (int it = 0; it < 400; ++it) {
    const double value = psi_tail_integral(lambda, v);
    if (std::abs(value - t) < 1e-13 * t || hi / lo - 1.0 < 1e-14) return v;
    if (value > t) {
      lo = v;
    } else {
      hi = v;
    }
    const double step = v * std::exp(std::log(value / t) * psi(lambda, v) * value / v);
    if (step > lo && step < hi) {
      v = step;
    } else {
      v = std::isfinite(hi) ? std::sqrt(lo * hi) : 2.0 * lo;
    }
    if (!std::isfinite(v)) throw std::runtime_error("v(t): failed to bracket the root");
  }
  return v;
}

TailReport dust_tail_report(const LambdaMeasure& lambda) {
  std::vector<double> decades;
  constexpr int kDecades = 40;
  for (int m = 1; m <= kDecades; ++m) {
    decades.push_back(quad::adaptive(
        [&](double y) {
          const double x = std::exp(-y);
          return lambda.interior_density(x, 1.0 - x);
        },
        m * kLn10, (m + 1) * kLn10, {1e-14, 1e-10}));
  }
  return classify_decades(std::move(decades));
}

Verdict has_dust(const LambdaMeasure& lambda) {
  if (lambda.kingman_mass() > 0.0) return Verdict::no;
  if (!lambda.has_continuous_part()) return Verdict::yes;
  return dust_tail_report(lambda).convergent;
}

}  // namespace fvlab
