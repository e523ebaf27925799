// Exact streaming quantiles under the nearest-rank rule.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <functional>
#include <optional>
#include <queue>
#include <stdexcept>
#include <vector>

namespace oppbandit {

/// 1-based nearest rank of probability p among n samples: max(1, ceil(p n)).
/// The product is nudged down by a relative 1e-12 so that values such as
/// 0.05 * 20 land on 1 rather than 2.
inline std::size_t nearest_rank(double p, std::size_t n) {
  if (n == 0) throw std::invalid_argument("nearest_rank of an empty sample");
  const double scaled = p * static_cast<double>(n);
  auto r = static_cast<std::size_t>(std::ceil(scaled - 1e-12 * std::max(1.0, scaled)));
  return std::clamp<std::size_t>(r, 1, n);
}

/// Tracks the nearest-rank quantile at a fixed probability of an
/// insert-only stream. Two heaps split the sample so that the lower heap
/// always holds exactly the rank-r smallest values; inserts cost O(log n).
class StreamingQuantile {
 public:
  explicit StreamingQuantile(double p) : p_(p) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("quantile probability must lie in (0, 1)");
  }

  void insert(double x) {
    if (!lower_.empty() && x <= lower_.top()) {
      lower_.push(x);
    } else {
      upper_.push(x);
    }
    const std::size_t want = nearest_rank(p_, size());
    while (lower_.size() > want) {
      upper_.push(lower_.top());
      lower_.pop();
    }
    while (lower_.size() < want) {
      lower_.push(upper_.top());
      upper_.pop();
    }
  }

  std::size_t size() const noexcept { return lower_.size() + upper_.size(); }
  double probability() const noexcept { return p_; }

  double value() const {
    if (lower_.empty()) throw std::logic_error("quantile of an empty stream");
    return lower_.top();
  }

 private:
  double p_;
  std::priority_queue<double> lower_;
  std::priority_queue<double, std::vector<double>, std::greater<>> upper_;
};

/// Nearest-rank quantiles of the last `window` observations. Keeps the
/// window sorted; intended for windows of up to a few thousand samples.
class WindowedQuantiles {
 public:
  explicit WindowedQuantiles(std::size_t window) : window_(window) {
    if (window == 0) throw std::invalid_argument("quantile window must be positive");
  }

  void insert(double x) {
    if (arrivals_.size() == window_) {
      const double old = arrivals_.front();
      arrivals_.pop_front();
      sorted_.erase(std::lower_bound(sorted_.begin(), sorted_.end(), old));
    }
    arrivals_.push_back(x);
    sorted_.insert(std::upper_bound(sorted_.begin(), sorted_.end(), x), x);
  }

  std::size_t size() const noexcept { return sorted_.size(); }

  double quantile(double p) const {
    if (sorted_.empty()) throw std::logic_error("quantile of an empty window");
    return sorted_[nearest_rank(p, sorted_.size()) - 1];
  }

 private:
  std::size_t window_;
  std::deque<double> arrivals_;
  std::vector<double> sorted_;
};

}  // namespace oppbandit
