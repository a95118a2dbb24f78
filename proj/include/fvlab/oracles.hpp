#pragma once

#include <vector>

#include "fvlab/lambda_measure.hpp"
#include "fvlab/rng.hpp"

/// Independent reference implementations used to cross-check the simulators.
/// They share no numerical code with the main library.
namespace fvlab::validation {

/// lambda_{b,k} by composite Gauss-Legendre on each half of (0, 1), after power
/// substitutions at the endpoints (matched to alpha for Beta parts, squares for
/// densities); atoms by repeated multiplication.
double brute_force_rate(const LambdaMeasure& lambda, int b, int k, int panels = 200);

/// Multiple-merger events of the n-level lookdown generated the long way:
/// draw u from u^{-2} P(Bin(n,u) >= 2) Lambda(du) (grid inverse CDF), then
/// Bernoulli(u) participation conditioned on at least two successes.
/// The atom at 0 must be absent.
class ThinningEventSampler {
 public:
  ThinningEventSampler(const LambdaMeasure& lambda, int n, int grid = 20000);

  double total_rate() const { return total_; }

  struct Draw {
    double waiting_time;
    std::vector<int> levels;  ///< sorted, 1-based
  };
  Draw next(Engine& rng) const;

 private:
  double draw_u(Engine& rng) const;

  LambdaMeasure lambda_;
  int n_;
  std::vector<double> theta_cdf_;  // cumulative continuous mass over theta cells
  double continuous_total_ = 0.0;
  std::vector<double> atom_weight_;
  double total_ = 0.0;
};

}  // namespace fvlab::validation
