#include "fvlab/event_log.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "parse_util.hpp"

namespace fvlab {

void EventLog::add(double time, Kind kind, std::span<const int> levels) {
  if (!times_.empty() && !(time > times_.back())) {
    throw std::invalid_argument("event times must increase strictly");
  }
  if (!(time > 0.0) || time > horizon_) throw std::invalid_argument("event time outside (0, horizon]");
  if (levels.size() < 2) throw std::invalid_argument("an event needs at least two levels");
  if (kind == Kind::pair && levels.size() != 2) throw std::invalid_argument("pair event with != 2 levels");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] < 1 || levels[i] > n_) throw std::out_of_range("event level outside [n]");
    if (i && levels[i] <= levels[i - 1]) throw std::invalid_argument("event levels must increase");
  }
  times_.push_back(time);
  kinds_.push_back(kind);
  levels_.insert(levels_.end(), levels.begin(), levels.end());
  offsets_.push_back(static_cast<std::uint32_t>(levels_.size()));
}

EventLog::Event EventLog::operator[](std::size_t i) const {
  const auto* base = levels_.data() + offsets_[i];
  return {times_[i], kinds_[i], std::span<const int>(base, offsets_[i + 1] - offsets_[i])};
}

std::size_t EventLog::upper_bound(double t) const {
  return static_cast<std::size_t>(std::upper_bound(times_.begin(), times_.end(), t) - times_.begin());
}

namespace {
std::string exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace

std::string EventLog::serialize() const {
  std::ostringstream out;
  out << "# fvlab-eventlog v1\n";
  out << "n " << n_ << '\n';
  out << "seed " << seed << '\n';
  out << "lambda " << lambda_spec << '\n';
  out << "levy " << levy_spec << '\n';
  out << "horizon " << exact(horizon_) << '\n';
  out << "events " << size() << '\n';
  for (std::size_t i = 0; i < size(); ++i) {
    const Event e = (*this)[i];
    out << exact(e.time) << (e.kind == Kind::pair ? " P " : " M ");
    for (std::size_t j = 0; j < e.levels.size(); ++j) {
      if (j) out << (e.kind == Kind::pair ? ' ' : ',');
      out << e.levels[j];
    }
    out << '\n';
  }
  return out.str();
}

EventLog EventLog::parse(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != "# fvlab-eventlog v1") {
    throw std::invalid_argument("not an fvlab event log");
  }
  auto header = [&](const char* key) {
    if (!std::getline(in, line)) throw std::invalid_argument(std::string("missing header ") + key);
    const std::string k(key);
    if (line.compare(0, k.size() + 1, k + " ") != 0 && line != k) {
      throw std::invalid_argument("expected header '" + k + "', got '" + line + "'");
    }
    return line.size() > k.size() ? line.substr(k.size() + 1) : std::string();
  };
  const int n = static_cast<int>(detail::parse_int(header("n"), "n"));
  const auto seed_text = detail::trim(header("seed"));
  std::uint64_t seed = 0;
  {
    const auto res = std::from_chars(seed_text.data(), seed_text.data() + seed_text.size(), seed);
    if (res.ec != std::errc{} || res.ptr != seed_text.data() + seed_text.size()) {
      throw std::invalid_argument("bad seed in event log");
    }
  }
  const std::string lambda = header("lambda");
  const std::string levy = header("levy");
  const double horizon = detail::parse_double(header("horizon"), "horizon");
  const long long count = detail::parse_int(header("events"), "event count");
  EventLog log(n, horizon);
  log.seed = seed;
  log.lambda_spec = lambda;
  log.levy_spec = levy;
  std::vector<int> levels;
  for (long long i = 0; i < count; ++i) {
    if (!std::getline(in, line)) throw std::invalid_argument("event log truncated");
    const auto fields = detail::split(line, ' ');
    levels.clear();
    Kind kind;
    if (fields.size() == 4 && fields[1] == "P") {
      kind = Kind::pair;
      levels.push_back(static_cast<int>(detail::parse_int(fields[2], "level")));
      levels.push_back(static_cast<int>(detail::parse_int(fields[3], "level")));
    } else if (fields.size() == 3 && fields[1] == "M") {
      kind = Kind::multi;
      for (const auto& l : detail::split(fields[2], ',')) {
        levels.push_back(static_cast<int>(detail::parse_int(l, "level")));
      }
    } else {
      throw std::invalid_argument("malformed event line '" + line + "'");
    }
    log.add(detail::parse_double(fields[0], "event time"), kind, levels);
  }
  while (std::getline(in, line)) {
    if (!detail::trim(line).empty()) throw std::invalid_argument("trailing data after events");
  }
  return log;
}

bool operator==(const EventLog& a, const EventLog& b) {
  return a.n_ == b.n_ && a.horizon_ == b.horizon_ && a.seed == b.seed &&
         a.lambda_spec == b.lambda_spec && a.levy_spec == b.levy_spec && a.times_ == b.times_ &&
         a.kinds_ == b.kinds_ && a.offsets_ == b.offsets_ && a.levels_ == b.levels_;
}

int source_level(std::span<const int> participants, int k) {
  const int parent = participants.front();
  if (k <= parent) return k;
  int below = 0;  // participants strictly below k
  for (int l : participants) {
    if (l == k) return parent;
    if (l < k) ++below;
  }
  return k - (below - 1);
}

}  // namespace fvlab
