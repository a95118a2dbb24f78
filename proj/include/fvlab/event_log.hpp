#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fvlab {

/// Lookdown events in time order. Levels are 1-based and sorted within an event;
/// the first listed level is the parent.
class EventLog {
 public:
  enum class Kind : std::uint8_t { pair, multi };

  struct Event {
    double time;
    Kind kind;
    std::span<const int> levels;
  };

  EventLog() = default;
  EventLog(int n, double horizon) : n_(n), horizon_(horizon) {}

  int n() const { return n_; }
  double horizon() const { return horizon_; }
  void set_horizon(double h) { horizon_ = h; }

  std::uint64_t seed = 0;
  std::string lambda_spec;
  std::string levy_spec;

  /// Validates time order, level range and sortedness.
  void add(double time, Kind kind, std::span<const int> levels);

  std::size_t size() const { return times_.size(); }
  bool empty() const { return times_.empty(); }
  Event operator[](std::size_t i) const;

  /// Index of the first event with time > t.
  std::size_t upper_bound(double t) const;

  /// Line-oriented text form; parse(serialize()) reproduces the log exactly.
  std::string serialize() const;
  static EventLog parse(std::string_view text);

  friend bool operator==(const EventLog& a, const EventLog& b);

 private:
  int n_ = 0;
  double horizon_ = 0.0;
  std::vector<double> times_;
  std::vector<Kind> kinds_;
  std::vector<std::uint32_t> offsets_{0};
  std::vector<int> levels_;
};

/// Pre-event level feeding post-event level k (1-based) under the shift rule of
/// an event with sorted participant levels J.
int source_level(std::span<const int> participants, int k);

}  // namespace fvlab
