#include "fvlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>

namespace fvlab::stats {

void CompensatedSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    comp_ += (sum_ - t) + x;
  } else {
    comp_ += (x - t) + sum_;
  }
  sum_ = t;
}

void MeanAccumulator::add(double x) {
  ++count_;
  sum_.add(x);
  const double delta = x - running_mean_;
  running_mean_ += delta / static_cast<double>(count_);
  m2_ += delta * (x - running_mean_);
}

void MeanAccumulator::merge(const MeanAccumulator& other) {
  if (other.count_ == 0) return;
  if (count_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(count_);
  const double nb = static_cast<double>(other.count_);
  const double delta = other.running_mean_ - running_mean_;
  count_ += other.count_;
  sum_.add(other.sum_.value());
  running_mean_ += delta * nb / (na + nb);
  m2_ += other.m2_ + delta * delta * na * nb / (na + nb);
}

double MeanAccumulator::mean() const {
  if (count_ == 0) return std::numeric_limits<double>::quiet_NaN();
  return sum_.value() / static_cast<double>(count_);
}

double MeanAccumulator::variance() const {
  if (count_ < 2) return 0.0;
  return std::max(m2_ / (static_cast<double>(count_) - 1.0), 0.0);
}

double MeanAccumulator::stderr_of_mean() const {
  if (count_ == 0) return std::numeric_limits<double>::quiet_NaN();
  return std::sqrt(variance() / static_cast<double>(count_));
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

namespace {

double chi_square_sf(double statistic, double dof) {
  if (dof <= 0.0) return 1.0;
  boost::math::chi_squared_distribution<double> dist(dof);
  return boost::math::cdf(boost::math::complement(dist, std::max(statistic, 0.0)));
}

}  // namespace

TestResult chi_square_homogeneity(std::span<const long long> a, std::span<const long long> b) {
  if (a.size() != b.size()) throw std::invalid_argument("chi_square_homogeneity: size mismatch");
  double na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    na += static_cast<double>(a[i]);
    nb += static_cast<double>(b[i]);
  }
  if (na == 0.0 || nb == 0.0) throw std::invalid_argument("chi_square_homogeneity: empty sample");
  const double total = na + nb;
  TestResult r;
  int cells = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double col = static_cast<double>(a[i] + b[i]);
    if (col == 0.0) continue;
    ++cells;
    const double ea = col * na / total;
    const double eb = col * nb / total;
    r.statistic += (a[i] - ea) * (a[i] - ea) / ea + (b[i] - eb) * (b[i] - eb) / eb;
  }
  r.dof = cells - 1;
  r.p_value = chi_square_sf(r.statistic, r.dof);
  return r;
}

TestResult chi_square_gof(std::span<const long long> observed, std::span<const double> probs) {
  if (observed.size() != probs.size()) throw std::invalid_argument("chi_square_gof: size mismatch");
  double n = 0.0;
  for (auto c : observed) n += static_cast<double>(c);
  TestResult r;
  int cells = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double e = n * probs[i];
    if (e <= 0.0) {
      if (observed[i] > 0) {
        r.statistic = std::numeric_limits<double>::infinity();
      }
      continue;
    }
    ++cells;
    r.statistic += (observed[i] - e) * (observed[i] - e) / e;
  }
  r.dof = cells - 1;
  r.p_value = std::isinf(r.statistic) ? 0.0 : chi_square_sf(r.statistic, r.dof);
  return r;
}

TestResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  TestResult r;
  r.statistic = d;
  const double ne = na * nb / (na + nb);
  const double sq = std::sqrt(ne);
  const double lambda = (sq + 0.12 + 0.11 / sq) * d;
  // Kolmogorov distribution tail Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2).
  if (lambda < 1e-3) {
    r.p_value = 1.0;
  } else {
    double q = 0.0;
    for (int k = 1; k <= 200; ++k) {
      const double term = std::exp(-2.0 * k * k * lambda * lambda);
      q += (k % 2 == 1 ? 2.0 : -2.0) * term;
      if (term < 1e-16) break;
    }
    r.p_value = std::clamp(q, 0.0, 1.0);
  }
  return r;
}

double z_score(double estimate, double stderr_estimate, double target, double stderr_target) {
  const double diff = estimate - target;
  const double se = std::hypot(stderr_estimate, stderr_target);
  if (se == 0.0) {
    return diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
  }
  return diff / se;
}

double binomial_stderr(double p, std::size_t n) {
  if (n == 0) return std::numeric_limits<double>::quiet_NaN();
  return std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(n));
}

}  // namespace fvlab::stats
