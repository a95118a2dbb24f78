#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fvlab/empirical_measure.hpp"
#include "fvlab/lambda_measure.hpp"
#include "fvlab/levy.hpp"
#include "fvlab/lookdown.hpp"

namespace fvlab {

/// Model and Monte Carlo settings shared by the checks below.
struct FvSetup {
  LambdaMeasure lambda;
  LevySpec levy;
  InitialLaw mu0 = InitialLaw::point(Point::Zero(1));
  int n = 100;
  long replicas = 100;
  std::uint64_t seed = 1;
  int workers = 1;
  std::size_t event_cap = 50'000'000;
};

/// sigma = Lambda([0, 1]), the coalescence rate of a given pair.
double pair_coalescence_rate(const LambdaMeasure& lambda);

struct MomentReport {
  std::string observable;
  double estimate = 0.0;
  double std_error = 0.0;
  double target = 0.0;
  double target_std_error = 0.0;
  double z = 0.0;
  std::vector<std::pair<std::string, double>> extras;

  double extra(const std::string& key) const;
};

/// Mean over replicas of <phi, Z_t^{(n)}> against an independent Monte Carlo
/// estimate of <T_t phi, mu0> from `target_samples` draws.
MomentReport first_moment_check(const FvSetup& setup, double t, const TestFunction& phi,
                                long target_samples = 200000);

struct SecondMomentOptions {
  int grid = 32;                  ///< trapezoid intervals in s
  long node_samples = 20000;      ///< Monte Carlo draws per grid node
  long target_samples = 200000;   ///< draws for each <T_t f, mu0>
  double phi_sup = 1.0;           ///< sup |phi|, for the bound
};

/// U-statistic [(sum phi)(sum psi) - sum phi psi] / (n(n-1)) against
/// e^{-sigma t} <T_t phi, mu><T_t psi, mu> + <int_0^t sigma e^{-sigma s} T_{t-s}(T_s phi T_s psi) ds, mu>.
/// Extras: the grid-halved integral, the second-moment bound and the plain
/// (diagonal-including) product mean.
MomentReport second_moment_check(const FvSetup& setup, double t, const TestFunction& phi,
                                 const TestFunction& psi, const SecondMomentOptions& options = {});

/// One stratum of a stratified bound check.
struct Stratum {
  std::string label;
  long samples = 0;
  double frequency = 0.0;   ///< empirical frequency of the event
  double std_error = 0.0;
  double bound = 0.0;       ///< mean lower bound in the stratum
  bool degenerate = false;  ///< too few samples to judge
  bool passed = true;
};

struct BoundReport {
  std::string observable;
  std::vector<Stratum> strata;
  long total_samples = 0;
  double overall_frequency = 0.0;
  double overall_bound = 0.0;
  bool passed = true;
  std::vector<std::string> warnings;
};

/// For each block i of Pi^t(s): event {Z_{i,s}(t,B) >= p freq_i / 2} with
/// p = P(X_i(t-s) + W_s in B) estimated from `inner` draws; strata are p deciles.
BoundReport cluster_mass_bound_check(const FvSetup& setup, double t, double s, const BallQuery& ball,
                                     long inner = 256, long min_stratum = 30);

/// Event {Z(t, B_eps) >= b p(t, eps)} against 1 - (1 - mu0(B) p(t,eps)/2)^{N^t_t(2b)},
/// stratified by N^t_t(2b).
BoundReport cluster_hit_bound_check(const FvSetup& setup, double t, const std::vector<Point>& set,
                                    double eps, double b, long p_samples = 200000,
                                    long min_stratum = 30);

struct SupportReport {
  int n = 0;
  double hit_fraction = 0.0;  ///< mass-weighted over atoms of nu^{(k)} * Z_t
  double std_error = 0.0;
  std::vector<std::pair<Point, double>> anchor_hits;      ///< P(Z_t charges B(y, eps))
  std::vector<double> anchor_std_errors;
};

/// Support propagation at resolution eps. Requires point-mass jumps.
SupportReport support_propagation_probe(const FvSetup& setup, double t, int k, double eps,
                                        const std::vector<Point>& anchors = {},
                                        double weight_floor = 0.0);

struct DustReport {
  double singleton_fraction = 0.0;
  double singleton_std_error = 0.0;
  double ks_statistic = 0.0;
  double ks_p_value = 1.0;
  long displacement_samples = 0;
  long full_collapse_replicas = 0;   ///< replicas with a whole-population event before t
  long collapse_violations = 0;      ///< of those, ones whose Pi^t(t) is not a single block
};

/// Singleton-block statistics at lookback t. Requires has_dust(lambda) == yes.
DustReport dust_regime_probe(const FvSetup& setup, double t, long reference_samples = 20000);

}  // namespace fvlab
