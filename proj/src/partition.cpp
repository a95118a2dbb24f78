#include "fvlab/partition.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace fvlab {

Partition Partition::singletons(int n) {
  if (n < 1) throw std::invalid_argument("partition size must be positive");
  Partition p;
  p.n_ = n;
  p.blocks_.reserve(n);
  for (int i = 1; i <= n; ++i) p.blocks_.push_back({i});
  return p;
}

Partition Partition::from_blocks(int n, std::vector<std::vector<int>> blocks) {
  if (n < 1) throw std::invalid_argument("partition size must be positive");
  std::vector<char> seen(n + 1, 0);
  for (auto& b : blocks) {
    if (b.empty()) throw std::invalid_argument("partition blocks must be nonempty");
    std::sort(b.begin(), b.end());
    for (int x : b) {
      if (x < 1 || x > n) throw std::invalid_argument("partition label out of range");
      if (seen[x]) throw std::invalid_argument("partition blocks must be disjoint");
      seen[x] = 1;
    }
  }
  if (std::count(seen.begin() + 1, seen.end(), 1) != n) {
    throw std::invalid_argument("partition blocks must cover [n]");
  }
  std::sort(blocks.begin(), blocks.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  Partition p;
  p.n_ = n;
  p.blocks_ = std::move(blocks);
  return p;
}

std::size_t Partition::block_of(int label) const {
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    if (std::binary_search(blocks_[i].begin(), blocks_[i].end(), label)) return i;
  }
  throw std::out_of_range("label not in partition");
}

void Partition::merge(std::span<const std::size_t> positions) {
  if (positions.size() < 2) throw std::invalid_argument("a merger needs at least two blocks");
  std::vector<std::size_t> pos(positions.begin(), positions.end());
  std::sort(pos.begin(), pos.end());
  if (std::adjacent_find(pos.begin(), pos.end()) != pos.end() || pos.back() >= blocks_.size()) {
    throw std::invalid_argument("invalid block positions in merger");
  }
  auto& target = blocks_[pos.front()];
  for (std::size_t i = 1; i < pos.size(); ++i) {
    const auto& src = blocks_[pos[i]];
    target.insert(target.end(), src.begin(), src.end());
  }
  std::sort(target.begin(), target.end());
  for (std::size_t i = pos.size() - 1; i >= 1; --i) {
    blocks_.erase(blocks_.begin() + static_cast<std::ptrdiff_t>(pos[i]));
  }
}

Partition Partition::restricted(int m) const {
  if (m < 1 || m > n_) throw std::invalid_argument("restriction size out of range");
  std::vector<std::vector<int>> out;
  for (const auto& b : blocks_) {
    std::vector<int> r;
    for (int x : b) {
      if (x <= m) r.push_back(x);
    }
    if (!r.empty()) out.push_back(std::move(r));
  }
  return from_blocks(m, std::move(out));
}

bool Partition::coarsens(const Partition& finer) const {
  if (finer.n_ != n_) return false;
  for (const auto& b : finer.blocks_) {
    const auto home = block_of(b.front());
    for (int x : b) {
      if (!std::binary_search(blocks_[home].begin(), blocks_[home].end(), x)) return false;
    }
  }
  return true;
}

std::string Partition::to_string() const {
  std::ostringstream os;
  os << "{";
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    if (i) os << ",";
    os << "{";
    for (std::size_t j = 0; j < blocks_[i].size(); ++j) {
      if (j) os << ",";
      os << blocks_[i][j];
    }
    os << "}";
  }
  os << "}";
  return os.str();
}

void CoalescentPath::append(MergeEvent event) {
  if (blocks_now_ == 0) blocks_now_ = static_cast<std::size_t>(initial_n_);
  if (!events_.empty() && !(event.time > events_.back().time)) {
    throw std::invalid_argument("coalescent event times must increase strictly");
  }
  if (event.time <= 0.0 || event.time > horizon_) {
    throw std::invalid_argument("coalescent event time outside (0, horizon]");
  }
  if (blocks_now_ <= 1) throw std::logic_error("no events after absorption");
  std::sort(event.blocks.begin(), event.blocks.end());
  if (event.blocks.size() < 2 ||
      std::adjacent_find(event.blocks.begin(), event.blocks.end()) != event.blocks.end() ||
      event.blocks.back() >= blocks_now_) {
    throw std::invalid_argument("invalid merger block positions");
  }
  blocks_now_ -= event.blocks.size() - 1;
  events_.push_back(std::move(event));
}

std::size_t CoalescentPath::block_count_at(double t) const {
  std::size_t b = static_cast<std::size_t>(initial_n_);
  for (const auto& e : events_) {
    if (e.time > t) break;
    b -= e.blocks.size() - 1;
  }
  return b;
}

Partition CoalescentPath::partition_at(double t) const {
  Partition p = Partition::singletons(initial_n_);
  for (const auto& e : events_) {
    if (e.time > t) break;
    p.merge(e.blocks);
  }
  return p;
}

std::vector<int> CoalescentPath::block_sizes_at(double t) const {
  std::vector<int> sizes(static_cast<std::size_t>(initial_n_), 1);
  for (const auto& e : events_) {
    if (e.time > t) break;
    int merged = 0;
    for (auto pos : e.blocks) merged += sizes[pos];
    sizes[e.blocks.front()] = merged;
    // Positions are sorted; erase from the back so earlier positions stay valid.
    for (std::size_t i = e.blocks.size() - 1; i >= 1; --i) {
      sizes.erase(sizes.begin() + static_cast<std::ptrdiff_t>(e.blocks[i]));
    }
  }
  return sizes;
}

}  // namespace fvlab
