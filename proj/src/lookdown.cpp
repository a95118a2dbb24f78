#include "fvlab/lookdown.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fvlab/stats.hpp"

namespace fvlab {

LookdownDriver::LookdownDriver(const LambdaMeasure& lambda, int n) : n_(n) {
  if (n < 1) throw std::invalid_argument("lookdown needs n >= 1");
  if (n < 2) return;
  pair_rate_ = lambda.kingman_mass() * 0.5 * n * (n - 1.0);
  const LambdaMeasure rest = lambda.without_kingman();
  if (!rest.is_zero()) {
    table_.emplace(rest, n, n);
    multi_rate_ = table_->total_rate(n);
  }
}

EventLog::Kind LookdownDriver::sample_event(Engine& rng, std::vector<int>& levels) const {
  levels.clear();
  const bool pair = multi_rate_ == 0.0 || uniform01(rng) * total_rate() < pair_rate_;
  const int k = pair ? 2 : table_->sample_merger_size(n_, rng);
  for (std::size_t idx : uniform_subset(static_cast<std::size_t>(n_), static_cast<std::size_t>(k), rng)) {
    levels.push_back(static_cast<int>(idx) + 1);
  }
  return pair ? EventLog::Kind::pair : EventLog::Kind::multi;
}

const Eigen::MatrixXd& LookdownTrajectory::positions_at(double t) const {
  const auto it = std::find(sample_times_.begin(), sample_times_.end(), t);
  if (it == sample_times_.end()) throw std::out_of_range("time was not sampled");
  return positions_[static_cast<std::size_t>(it - sample_times_.begin())];
}

namespace {

// Particles live in a pool; levels hold pool ids. Each particle carries the
// time up to which its mutation path has been drawn.
class ParticlePool {
 public:
  ParticlePool(const LevySpec& levy, int capacity)
      : levy_(levy), moving_(!levy.is_trivial()), pos_(levy.dimension(), capacity), last_(capacity, 0.0) {
    for (int id = capacity - 1; id >= 0; --id) free_.push_back(id);
  }

  int spawn(const Point& x, double time) {
    const int id = free_.back();
    free_.pop_back();
    pos_.col(id) = x;
    last_[id] = time;
    return id;
  }
  int spawn_copy(int parent, double time) {
    const int id = free_.back();
    free_.pop_back();
    pos_.col(id) = pos_.col(parent);
    last_[id] = time;
    return id;
  }
  void release(int id) { free_.push_back(id); }

  void advance(int id, double time, Engine& rng) {
    if (moving_ && time > last_[id]) {
      add_increment(levy_, time - last_[id], rng, pos_.col(id));
    }
    last_[id] = time;
  }
  auto position(int id) const { return pos_.col(id); }

 private:
  const LevySpec& levy_;
  bool moving_;
  Eigen::MatrixXd pos_;
  std::vector<double> last_;
  std::vector<int> free_;
};

}  // namespace

LookdownTrajectory simulate_lookdown(const LookdownDriver& driver, const LevySpec& levy,
                                     const InitialLaw& mu0, const std::vector<double>& sample_times,
                                     Engine& rng, const LookdownOptions& options) {
  const int n = driver.n();
  const int d = levy.dimension();
  if (mu0.dimension() != d) throw std::invalid_argument("initial law and mutation dimensions differ");
  for (std::size_t i = 0; i < sample_times.size(); ++i) {
    if (!(sample_times[i] >= 0.0) || (i && sample_times[i] < sample_times[i - 1])) {
      throw std::invalid_argument("sample times must be sorted and nonnegative");
    }
  }
  const double horizon = sample_times.empty() ? 0.0 : sample_times.back();

  LookdownTrajectory traj;
  traj.n_ = n;
  traj.dimension_ = d;
  traj.sample_times_ = sample_times;
  traj.log_ = EventLog(n, horizon);
  traj.recorded_ = options.record_events;

  ParticlePool pool(levy, 2 * n);
  std::vector<int> level_ids(static_cast<std::size_t>(n));
  traj.initial_.resize(d, n);
  for (int k = 0; k < n; ++k) {
    level_ids[k] = pool.spawn(mu0.sample(rng), 0.0);
    traj.initial_.col(k) = pool.position(level_ids[k]);
  }

  auto record = [&](double time) {
    Eigen::MatrixXd snap(d, n);
    for (int k = 0; k < n; ++k) {
      pool.advance(level_ids[k], time, rng);
      snap.col(k) = pool.position(level_ids[k]);
    }
    traj.positions_.push_back(std::move(snap));
  };

  std::vector<int> levels;
  std::vector<int> scratch(static_cast<std::size_t>(n));
  const double rate = driver.total_rate();
  std::size_t next_sample = 0;
  double t = 0.0;
  while (true) {
    const double next = rate > 0.0 ? t + exponential(rng, rate)
                                   : std::numeric_limits<double>::infinity();
    while (next_sample < sample_times.size() && sample_times[next_sample] < next) {
      record(sample_times[next_sample++]);
    }
    if (next > horizon) break;
    t = next;
    if (++traj.event_count_ > options.event_cap) {
      throw std::runtime_error("lookdown event cap exceeded (" + std::to_string(options.event_cap) +
                               " events)");
    }
    const EventLog::Kind kind = driver.sample_event(rng, levels);
    if (options.record_events) traj.log_.add(t, kind, levels);

    const int parent = level_ids[levels.front() - 1];
    pool.advance(parent, t, rng);
    const int m = static_cast<int>(levels.size());
    if (m == 2) {
      const int child = pool.spawn_copy(parent, t);
      pool.release(level_ids.back());
      level_ids.pop_back();
      level_ids.insert(level_ids.begin() + (levels[1] - 1), child);
      continue;
    }
    // Old levels n-m+2..n fall off the top.
    std::size_t next_participant = 1;
    int below = 1;
    for (int k = 1; k <= n; ++k) {
      if (k <= levels.front()) {
        scratch[k - 1] = level_ids[k - 1];
      } else if (next_participant < levels.size() && levels[next_participant] == k) {
        scratch[k - 1] = pool.spawn_copy(parent, t);
        ++next_participant;
        ++below;
      } else {
        scratch[k - 1] = level_ids[k - (below - 1) - 1];
      }
    }
    for (int k = n - m + 2; k <= n; ++k) pool.release(level_ids[k - 1]);
    level_ids.swap(scratch);
  }
  return traj;
}

LookdownTrajectory simulate_lookdown(int n, const LambdaMeasure& lambda, const LevySpec& levy,
                                     const InitialLaw& mu0, const std::vector<double>& sample_times,
                                     Engine& rng, const LookdownOptions& options) {
  return simulate_lookdown(LookdownDriver(lambda, n), levy, mu0, sample_times, rng, options);
}

AncestralPartition ancestral_partition(const EventLog& log, double t, double s) {
  if (!(s >= 0.0) || !(s <= t)) throw std::domain_error("lookback must satisfy 0 <= s <= t");
  if (t > log.horizon()) throw std::out_of_range("event log does not cover the requested time");
  const int n = log.n();
  AncestralPartition out;
  out.t = t;
  out.s = s;
  std::vector<int> anc(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) anc[k] = k + 1;
  std::vector<int> scratch(static_cast<std::size_t>(n));
  // Replay events in (t-s, t] forward, carrying each level's ancestor tag.
  const std::size_t first = log.upper_bound(t - s);
  const std::size_t last = s == 0.0 ? first : log.upper_bound(t);
  for (std::size_t e = first; e < last; ++e) {
    const auto levels = log[e].levels;
    if (levels.size() == 2) {
      const int tag = anc[levels[0] - 1];
      anc.pop_back();
      anc.insert(anc.begin() + (levels[1] - 1), tag);
      continue;
    }
    for (int k = 1; k <= n; ++k) scratch[k - 1] = anc[source_level(levels, k) - 1];
    anc.swap(scratch);
  }
  std::vector<std::vector<int>> groups(static_cast<std::size_t>(n) + 1);
  for (int k = 1; k <= n; ++k) groups[anc[k - 1]].push_back(k);
  std::vector<std::vector<int>> blocks;
  for (auto& g : groups) {
    if (!g.empty()) blocks.push_back(std::move(g));
  }
  out.ancestor_level = std::move(anc);
  out.blocks = Partition::from_blocks(n, std::move(blocks));
  return out;
}

AncestralPartition ancestral_partition(const LookdownTrajectory& traj, double t, double s) {
  if (!traj.events_recorded()) throw std::logic_error("trajectory was simulated without an event log");
  return ancestral_partition(traj.events(), t, s);
}

double cluster_measure(const LookdownTrajectory& traj, const AncestralPartition& ancestry,
                       std::size_t block_index, const TestFunction& phi) {
  if (block_index < 1 || block_index > ancestry.blocks.block_count()) {
    throw std::out_of_range("block index outside the ancestral partition");
  }
  const auto& pos = traj.positions_at(ancestry.t);
  stats::CompensatedSum sum;
  for (int level : ancestry.blocks.block(block_index - 1)) {
    sum.add(phi(pos.col(level - 1)));
  }
  return sum.value() / traj.n();
}

EmpiricalMeasure empirical_measure(const LookdownTrajectory& traj, double t) {
  const auto& pos = traj.positions_at(t);
  std::vector<Point> pts;
  pts.reserve(static_cast<std::size_t>(traj.n()));
  for (int k = 0; k < traj.n(); ++k) pts.push_back(pos.col(k));
  return EmpiricalMeasure::uniform(pts);
}

}  // namespace fvlab
