#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "fvlab/lambda_measure.hpp"
#include "fvlab/partition.hpp"
#include "fvlab/rng.hpp"

namespace fvlab {

/// Outcome of a numerical classification that may be inconclusive.
enum class Verdict { yes, no, undetermined };

const char* to_string(Verdict v);

/// lambda_{b,k} = int_0^1 x^{k-2} (1-x)^{b-k} Lambda(dx), for 2 <= k <= b.
/// Throws std::domain_error outside that range.
double merger_rate(const LambdaMeasure& lambda, int b, int k);

/// sum_{k=2}^{b} C(b,k) lambda_{b,k}: total rate of mergers among b blocks.
double total_event_rate(const LambdaMeasure& lambda, int b);

/// Precomputed total rates for min_blocks <= b <= max_blocks plus an exact
/// sampler of the merger size k (probability proportional to C(b,k) lambda_{b,k}).
/// Immutable after construction; share it freely across replicas.
class MergerRateTable {
 public:
  MergerRateTable(LambdaMeasure lambda, int max_blocks, int min_blocks = 2);

  const LambdaMeasure& lambda() const { return lambda_; }
  int max_blocks() const { return max_blocks_; }
  int min_blocks() const { return min_blocks_; }
  double total_rate(int b) const;
  int sample_merger_size(int b, Engine& rng) const;

 private:
  enum class Kind { kingman, top, atom, beta, density };
  struct Component {
    Kind kind;
    std::size_t index;  // into the measure's atom/beta/density list
  };

  double component_total(const Component& c, int b) const;
  int sample_component_size(const Component& c, int b, double total, Engine& rng) const;

  LambdaMeasure lambda_;
  int max_blocks_;
  int min_blocks_;
  std::vector<Component> components_;
  // component_totals_[c][b]
  std::vector<std::vector<double>> component_totals_;
  std::vector<double> totals_;
};

/// Uniform random k-subset of {0, ..., b-1}, sorted ascending.
std::vector<std::size_t> uniform_subset(std::size_t b, std::size_t k, Engine& rng);

/// Lambda-coalescent on [n] started from singletons, run until `horizon` or
/// absorption. Waits Exp(total rate), picks k, then a uniform k-subset of blocks.
CoalescentPath simulate_coalescent(const MergerRateTable& table, int n, double horizon,
                                   Engine& rng);
CoalescentPath simulate_coalescent(const LambdaMeasure& lambda, int n, double horizon,
                                   Engine& rng);

/// First time labels a and b share a block; +inf if never within the path.
double first_time_together(const CoalescentPath& path, int a, int b);

/// Number of blocks at time t whose [n]-frequency is at least `threshold`.
std::size_t blocks_with_frequency(const CoalescentPath& path, double t, double threshold);

/// psi(u) = Lambda({0}) u^2 + int_(0,1] (e^{-ux} - 1 + ux) x^{-2} Lambda(dx).
double psi(const LambdaMeasure& lambda, double u);

/// Constant c with v(t) >= c / t, from psi(u) <= (Lambda({0}) + Lambda((0,1])/2) u^2.
double speed_lower_constant(const LambdaMeasure& lambda);

/// Numerical tail diagnostics on decade-wise contributions of an integral.
struct TailReport {
  std::vector<double> decades;     ///< contribution of each decade
  double decay_ratio = 0.0;        ///< geometric mean of the last few decade ratios
  double partial_sum = 0.0;
  double remainder_estimate = std::numeric_limits<double>::infinity();
  Verdict convergent = Verdict::undetermined;
};

/// Decade analysis of int_1^inf du / psi(u).
TailReport cdi_tail_report(const LambdaMeasure& lambda);

/// Whether the coalescent comes down from infinity. Requires Lambda({1}) = 0
/// (std::domain_error otherwise).
Verdict comes_down_from_infinity(const LambdaMeasure& lambda);

/// int_v^inf du / psi(u); finite only when the coalescent comes down from infinity.
double psi_tail_integral(const LambdaMeasure& lambda, double v);

/// v(t): the root of int_{v}^inf du / psi(u) = t, or +inf if the coalescent
/// stays infinite. Throws std::domain_error when the classification is undetermined.
double v_of_t(const LambdaMeasure& lambda, double t);

/// Decade analysis of int_(0,1) x^{-1} Lambda(dx) near 0.
TailReport dust_tail_report(const LambdaMeasure& lambda);

/// Dust criterion: Lambda({0}) = 0 and int_(0,1) x^{-1} Lambda(dx) < inf.
Verdict has_dust(const LambdaMeasure& lambda);

}  // namespace fvlab
