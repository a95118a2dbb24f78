#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace fvlab {

/// Partition of [n] = {1, ..., n}. Blocks are sorted internally and ordered
/// by their least elements.
class Partition {
 public:
  Partition() = default;

  static Partition singletons(int n);
  /// Validates disjointness and coverage, then normalizes ordering.
  static Partition from_blocks(int n, std::vector<std::vector<int>> blocks);

  int n() const { return n_; }
  std::size_t block_count() const { return blocks_.size(); }
  const std::vector<std::vector<int>>& blocks() const { return blocks_; }
  const std::vector<int>& block(std::size_t index) const { return blocks_.at(index); }

  /// Position (0-based) of the block holding `label`.
  std::size_t block_of(int label) const;

  /// Merges the blocks at the given 0-based positions (at least two, distinct).
  /// The merged block takes the smallest position; ordering is preserved.
  void merge(std::span<const std::size_t> positions);

  /// Restriction to [m], m <= n.
  Partition restricted(int m) const;

  /// True if every block of `finer` is contained in a block of this partition.
  bool coarsens(const Partition& finer) const;

  std::string to_string() const;

  friend bool operator==(const Partition&, const Partition&) = default;

 private:
  int n_ = 0;
  std::vector<std::vector<int>> blocks_;
};

/// One merger: the 0-based positions (in the least-element ordering at that
/// moment) of the blocks that coalesce.
struct MergeEvent {
  double time = 0.0;
  std::vector<std::size_t> blocks;
};

/// Path of a coalescent on [n] observed up to `horizon`.
class CoalescentPath {
 public:
  CoalescentPath(int initial_n, double horizon) : initial_n_(initial_n), horizon_(horizon) {}

  int initial_n() const { return initial_n_; }
  double horizon() const { return horizon_; }
  const std::vector<MergeEvent>& events() const { return events_; }

  /// Appends an event; enforces increasing times, valid positions and that
  /// nothing happens after absorption.
  void append(MergeEvent event);

  std::size_t block_count_at(double t) const;
  Partition partition_at(double t) const;
  /// Block sizes in least-element order at time t, without materializing labels.
  std::vector<int> block_sizes_at(double t) const;

 private:
  int initial_n_;
  double horizon_;
  std::size_t blocks_now_ = 0;
  std::vector<MergeEvent> events_;
};

}  // namespace fvlab
