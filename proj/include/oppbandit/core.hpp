// Domain types shared by policies, environments and the simulator.
//
// Arms are 0-based in the API (arm 0 is the first arm). Time slots are
// 1-based: t = 1 is the first decision.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace oppbandit {

/// Per-arm sufficient statistics: pull count and empirical mean.
class ArmState {
 public:
  std::uint64_t pulls() const noexcept { return pulls_; }
  double sum_reward() const noexcept { return sum_; }

  /// Empirical mean; 1 before the first pull (optimistic initialization).
  double mean_reward() const noexcept {
    return pulls_ == 0 ? 1.0 : sum_ / static_cast<double>(pulls_);
  }

  void update(double reward) noexcept {
    sum_ += reward;
    ++pulls_;
  }

  void reset() noexcept { *this = ArmState{}; }

  bool operator==(const ArmState&) const = default;

 private:
  std::uint64_t pulls_ = 0;
  double sum_ = 0.0;
};

/// True arm means and the derived gap structure.
class BanditInstance {
 public:
  BanditInstance() = default;
  explicit BanditInstance(std::vector<double> means) : means_(std::move(means)) {
    if (means_.size() < 2) throw std::invalid_argument("a bandit needs at least 2 arms");
    for (double u : means_) {
      if (!std::isfinite(u) || u < 0.0 || u > 1.0) {
        throw std::invalid_argument("arm means must lie in [0, 1]");
      }
    }
    // lowest index wins among equal maxima
    best_arm_ = static_cast<std::size_t>(std::distance(
        means_.begin(), std::max_element(means_.begin(), means_.end())));
    best_mean_ = means_[best_arm_];
    gaps_.resize(means_.size());
    min_gap_ = 0.0;
    bool first = true;
    for (std::size_t k = 0; k < means_.size(); ++k) {
      gaps_[k] = best_mean_ - means_[k];
      if (k == best_arm_) continue;
      if (first || gaps_[k] < min_gap_) min_gap_ = gaps_[k];
      first = false;
    }
  }

  std::size_t arms() const noexcept { return means_.size(); }
  const std::vector<double>& means() const noexcept { return means_; }
  double mean(std::size_t k) const { return means_.at(k); }
  std::size_t best_arm() const noexcept { return best_arm_; }
  double best_mean() const noexcept { return best_mean_; }
  const std::vector<double>& gaps() const noexcept { return gaps_; }
  double gap(std::size_t k) const { return gaps_.at(k); }
  double min_gap() const noexcept { return min_gap_; }

  /// Gaps of every arm except the best one.
  std::vector<double> suboptimal_gaps() const {
    std::vector<double> out;
    for (std::size_t k = 0; k < gaps_.size(); ++k) {
      if (k != best_arm_) out.push_back(gaps_[k]);
    }
    return out;
  }

  bool operator==(const BanditInstance& o) const { return means_ == o.means_; }

 private:
  std::vector<double> means_;
  std::vector<double> gaps_;
  std::size_t best_arm_ = 0;
  double best_mean_ = 0.0;
  double min_gap_ = 0.0;
};

/// Truncation thresholds for load normalization. lower == upper selects the
/// single-threshold step rule.
class Thresholds {
 public:
  Thresholds() = default;
  Thresholds(double lower, double upper) : lower_(lower), upper_(upper) {
    if (!std::isfinite(lower) || !std::isfinite(upper)) {
      throw std::invalid_argument("thresholds must be finite");
    }
    if (lower > upper) throw std::invalid_argument("lower threshold exceeds upper threshold");
  }

  double lower() const noexcept { return lower_; }
  double upper() const noexcept { return upper_; }
  bool single() const noexcept { return lower_ == upper_; }

  bool operator==(const Thresholds&) const = default;

 private:
  double lower_ = 0.0;
  double upper_ = 1.0;
};

/// Maps a raw load into [0, 1] by clamping to [lower, upper] and rescaling.
/// With lower == upper: 0 for raw <= lower, 1 above.
inline double normalize_load(double raw, const Thresholds& th) {
  if (!std::isfinite(raw)) throw std::invalid_argument("load must be finite");
  if (th.single()) return raw <= th.lower() ? 0.0 : 1.0;
  const double clamped = std::clamp(raw, th.lower(), th.upper());
  return (clamped - th.lower()) / (th.upper() - th.lower());
}

/// Normalized value of a binary load in {eps0, 1 - eps1} under thresholds
/// (eps0, 1). Agrees exactly with normalize_load(raw, {eps0, 1}).
inline double binary_normalize(double raw, double eps0, double eps1) {
  if (!(eps0 >= 0.0 && eps0 < 0.5 && eps1 >= 0.0 && eps1 < 0.5)) {
    throw std::invalid_argument("eps0 and eps1 must lie in [0, 0.5)");
  }
  const double high = 1.0 - eps1;
  if (raw == eps0) return 0.0;
  if (raw == high) return (high - eps0) / (1.0 - eps0);
  throw std::invalid_argument("binary load must equal eps0 or 1 - eps1, got " + std::to_string(raw));
}

/// A revealed load and its normalized value under some thresholds.
struct LoadSample {
  double raw = 0.0;
  double normalized = 0.0;

  LoadSample() = default;
  LoadSample(double raw_load, const Thresholds& th)
      : raw(raw_load), normalized(normalize_load(raw_load, th)) {}
};

}  // namespace oppbandit
