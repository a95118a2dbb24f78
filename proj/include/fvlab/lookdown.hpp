#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "fvlab/coalescent.hpp"
#include "fvlab/empirical_measure.hpp"
#include "fvlab/event_log.hpp"
#include "fvlab/lambda_measure.hpp"
#include "fvlab/levy.hpp"
#include "fvlab/partition.hpp"
#include "fvlab/rng.hpp"

namespace fvlab {

struct LookdownOptions {
  bool record_events = true;
  /// Simulation fails with std::runtime_error beyond this many events.
  std::size_t event_cap = 50'000'000;
};

/// Event rates of the n-level system, shareable across replicas.
class LookdownDriver {
 public:
  LookdownDriver(const LambdaMeasure& lambda, int n);

  int n() const { return n_; }
  double pair_rate() const { return pair_rate_; }    ///< Lambda({0}) C(n,2)
  double multi_rate() const { return multi_rate_; }  ///< total rate from Lambda without its atom at 0
  double total_rate() const { return pair_rate_ + multi_rate_; }

  /// Draws the participant levels (sorted, 1-based) of one event.
  EventLog::Kind sample_event(Engine& rng, std::vector<int>& levels) const;

 private:
  int n_;
  double pair_rate_ = 0.0;
  double multi_rate_ = 0.0;
  std::optional<MergerRateTable> table_;
};

/// Particle positions at the requested times and the event log.
class LookdownTrajectory {
 public:
  int n() const { return n_; }
  int dimension() const { return dimension_; }
  const std::vector<double>& sample_times() const { return sample_times_; }
  /// d x n matrix; column i-1 holds level i. Throws if t was not sampled.
  const Eigen::MatrixXd& positions_at(double t) const;
  const Eigen::MatrixXd& initial_positions() const { return initial_; }
  const EventLog& events() const { return log_; }
  bool events_recorded() const { return recorded_; }
  std::size_t event_count() const { return event_count_; }
  double horizon() const { return log_.horizon(); }

 private:
  friend LookdownTrajectory simulate_lookdown(const LookdownDriver&, const LevySpec&,
                                              const InitialLaw&, const std::vector<double>&,
                                              Engine&, const LookdownOptions&);
  int n_ = 0;
  int dimension_ = 1;
  std::vector<double> sample_times_;
  std::vector<Eigen::MatrixXd> positions_;
  Eigen::MatrixXd initial_;
  EventLog log_;
  bool recorded_ = false;
  std::size_t event_count_ = 0;
};

/// Runs the n-level lookdown up to the last sample time. Sample times must be
/// sorted and nonnegative.
LookdownTrajectory simulate_lookdown(const LookdownDriver& driver, const LevySpec& levy,
                                     const InitialLaw& mu0, const std::vector<double>& sample_times,
                                     Engine& rng, const LookdownOptions& options = {});
LookdownTrajectory simulate_lookdown(int n, const LambdaMeasure& lambda, const LevySpec& levy,
                                     const InitialLaw& mu0, const std::vector<double>& sample_times,
                                     Engine& rng, const LookdownOptions& options = {});

struct AncestralPartition {
  double t = 0.0;
  double s = 0.0;
  /// ancestor_level[i-1] = L^t_i(s).
  std::vector<int> ancestor_level;
  Partition blocks;
};

/// Levels at time t grouped by their ancestor's level at time t - s.
AncestralPartition ancestral_partition(const LookdownTrajectory& traj, double t, double s);
AncestralPartition ancestral_partition(const EventLog& log, double t, double s);

/// n^{-1} sum of phi(X_j(t)) over the block with 1-based index i of Pi^t(s).
double cluster_measure(const LookdownTrajectory& traj, const AncestralPartition& ancestry,
                       std::size_t block_index, const TestFunction& phi);

/// Z^{(n)}_t = n^{-1} sum_i delta_{X_i(t)}.
EmpiricalMeasure empirical_measure(const LookdownTrajectory& traj, double t);

}  // namespace fvlab
