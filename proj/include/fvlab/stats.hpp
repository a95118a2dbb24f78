#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fvlab::stats {

/// Neumaier-compensated running sum. Results are reproducible for a fixed
/// input order.
class CompensatedSum {
 public:
  void add(double x);
  double value() const { return sum_ + comp_; }
  CompensatedSum& operator+=(double x) {
    add(x);
    return *this;
  }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Sample mean (compensated sum) and variance (Welford updates, Chan merge).
class MeanAccumulator {
 public:
  void add(double x);
  void merge(const MeanAccumulator& other);
  std::size_t count() const { return count_; }
  double mean() const;
  /// Unbiased sample variance; zero for fewer than two samples.
  double variance() const;
  double stderr_of_mean() const;

 private:
  std::size_t count_ = 0;
  CompensatedSum sum_;
  double running_mean_ = 0.0;
  double m2_ = 0.0;
};

double normal_cdf(double x);

struct TestResult {
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
};

/// Pearson chi-square test that two count vectors come from one categorical law.
/// Cells empty in both samples are dropped.
TestResult chi_square_homogeneity(std::span<const long long> a, std::span<const long long> b);

/// Pearson goodness-of-fit of observed counts against known cell probabilities.
TestResult chi_square_gof(std::span<const long long> observed, std::span<const double> probs);

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
TestResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// z-score of (estimate - target) with combined standard error; 0 when both
/// the difference and the error vanish.
double z_score(double estimate, double stderr_estimate, double target, double stderr_target);

/// Binomial standard error sqrt(p(1-p)/n).
double binomial_stderr(double p, std::size_t n);

}  // namespace fvlab::stats
