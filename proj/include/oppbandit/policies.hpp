// Arm-selection strategies behind one stateful interface.
//
// Each slot the simulator calls select(t, raw_load, rng) and then
// update(arm, nominal_reward, rng). Policies that normalize the load do so
// with their own thresholds, so the interface carries the raw value.
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "oppbandit/core.hpp"
#include "oppbandit/quantile.hpp"
#include "oppbandit/rng.hpp"

namespace oppbandit {

/// AdaUCB index: mean + sqrt(alpha (1 - normalized_load) ln t / pulls).
/// With normalized_load = 0 this is the UCB(alpha) index bit for bit.
inline double adaucb_index(const ArmState& state, std::uint64_t t, double alpha, double normalized_load) {
  if (t < 2) throw std::invalid_argument("index needs t >= 2");
  if (state.pulls() == 0) throw std::invalid_argument("index needs at least one pull");
  const double width =
      alpha * (1.0 - normalized_load) * std::log(static_cast<double>(t)) / static_cast<double>(state.pulls());
  return state.mean_reward() + std::sqrt(width);
}

/// Index of the largest score; ties go to the lowest index.
template <typename Scores>
std::size_t argmax_lowest(const Scores& scores) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < scores.size(); ++k) {
    if (scores[k] > scores[best]) best = k;
  }
  return best;
}

class Policy {
 public:
  explicit Policy(std::size_t arms) : arms_(arms) {
    if (arms < 2) throw std::invalid_argument("a policy needs at least 2 arms");
    scores_.resize(arms);
  }
  virtual ~Policy() = default;
  Policy(const Policy&) = default;
  Policy& operator=(const Policy&) = default;

  virtual std::string_view kind() const = 0;

  std::size_t arms() const noexcept { return arms_.size(); }
  const std::vector<ArmState>& arm_states() const noexcept { return arms_; }
  const ArmState& arm_state(std::size_t k) const { return arms_.at(k); }

  /// Chooses the arm for slot t. Slots 1..K pull arms 0..K-1 in order unless
  /// the policy opts out of forced initialization.
  std::size_t select(std::uint64_t t, double raw_load, RngStream& rng) {
    if (t < 1) throw std::invalid_argument("time slots start at 1");
    observe_load(raw_load);
    if (forced_init() && t <= arms_.size()) return static_cast<std::size_t>(t - 1);
    return choose(t, raw_load, rng);
  }

  void update(std::size_t arm, double nominal_reward, RngStream& rng) {
    if (arm >= arms_.size()) throw std::out_of_range("arm index out of range");
    if (!(nominal_reward >= 0.0 && nominal_reward <= 1.0)) {
      throw std::invalid_argument("nominal reward must lie in [0, 1]");
    }
    arms_[arm].update(nominal_reward);
    on_reward(arm, nominal_reward, rng);
  }

  void reset() {
    for (auto& a : arms_) a.reset();
    on_reset();
  }

 protected:
  virtual bool forced_init() const { return true; }
  virtual void observe_load(double /*raw_load*/) {}
  virtual std::size_t choose(std::uint64_t t, double raw_load, RngStream& rng) = 0;
  virtual void on_reward(std::size_t /*arm*/, double /*reward*/, RngStream& /*rng*/) {}
  virtual void on_reset() {}

  std::vector<ArmState> arms_;
  std::vector<double> scores_;
};

/// UCB(alpha); ignores the load. alpha = 2 is UCB1.
class UcbPolicy final : public Policy {
 public:
  UcbPolicy(std::size_t arms, double alpha) : Policy(arms), alpha_(alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  }
  std::string_view kind() const override { return "ucb"; }
  double alpha() const noexcept { return alpha_; }

 protected:
  std::size_t choose(std::uint64_t t, double, RngStream&) override {
    for (std::size_t k = 0; k < arms_.size(); ++k) scores_[k] = adaucb_index(arms_[k], t, alpha_, 0.0);
    return argmax_lowest(scores_);
  }

 private:
  double alpha_;
};

/// AdaUCB with fixed truncation thresholds.
class AdaUcbPolicy final : public Policy {
 public:
  AdaUcbPolicy(std::size_t arms, double alpha, Thresholds thresholds)
      : Policy(arms), alpha_(alpha), thresholds_(thresholds) {
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  }
  std::string_view kind() const override { return "adaucb"; }
  double alpha() const noexcept { return alpha_; }
  const Thresholds& thresholds() const noexcept { return thresholds_; }

 protected:
  std::size_t choose(std::uint64_t t, double raw_load, RngStream&) override {
    const double nl = normalize_load(raw_load, thresholds_);
    for (std::size_t k = 0; k < arms_.size(); ++k) scores_[k] = adaucb_index(arms_[k], t, alpha_, nl);
    return argmax_lowest(scores_);
  }

 private:
  double alpha_;
  Thresholds thresholds_;
};

/// AdaUCB whose thresholds are empirical quantiles of the loads seen so far,
/// the current slot included.
class EAdaUcbPolicy final : public Policy {
 public:
  EAdaUcbPolicy(std::size_t arms, double alpha, double lower_quantile = 0.05, double upper_quantile = 0.95,
                std::optional<std::size_t> window = std::nullopt)
      : Policy(arms),
        alpha_(alpha),
        lower_p_(lower_quantile),
        upper_p_(upper_quantile),
        window_(window),
        lower_(lower_quantile),
        upper_(upper_quantile) {
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
    if (lower_quantile > upper_quantile) throw std::invalid_argument("lower quantile exceeds upper quantile");
    if (window_) windowed_.emplace(*window_);
  }
  std::string_view kind() const override { return "eadaucb"; }
  double alpha() const noexcept { return alpha_; }

  /// Effective thresholds after the most recent load; requires one observation.
  Thresholds thresholds() const {
    if (windowed_) return {windowed_->quantile(lower_p_), windowed_->quantile(upper_p_)};
    return {lower_.value(), upper_.value()};
  }

  /// Feeds one raw load to the sketch and returns the updated thresholds.
  Thresholds observe(double raw_load) {
    if (windowed_) {
      windowed_->insert(raw_load);
    } else {
      lower_.insert(raw_load);
      upper_.insert(raw_load);
    }
    return thresholds();
  }

 protected:
  void observe_load(double raw_load) override { observe(raw_load); }

  std::size_t choose(std::uint64_t t, double raw_load, RngStream&) override {
    const double nl = normalize_load(raw_load, thresholds());
    for (std::size_t k = 0; k < arms_.size(); ++k) scores_[k] = adaucb_index(arms_[k], t, alpha_, nl);
    return argmax_lowest(scores_);
  }

  void on_reset() override {
    lower_ = StreamingQuantile(lower_p_);
    upper_ = StreamingQuantile(upper_p_);
    if (window_) windowed_.emplace(*window_);
  }

 private:
  double alpha_;
  double lower_p_;
  double upper_p_;
  std::optional<std::size_t> window_;
  StreamingQuantile lower_;
  StreamingQuantile upper_;
  std::optional<WindowedQuantiles> windowed_;
};

/// Beta-Bernoulli Thompson sampling. A reward x in [0, 1] counts as a success
/// with probability x.
class ThompsonPolicy final : public Policy {
 public:
  explicit ThompsonPolicy(std::size_t arms) : Policy(arms), a_(arms, 1.0), b_(arms, 1.0) {}
  std::string_view kind() const override { return "ts"; }

  double alpha_param(std::size_t k) const { return a_.at(k); }
  double beta_param(std::size_t k) const { return b_.at(k); }

 protected:
  std::size_t choose(std::uint64_t, double, RngStream& rng) override {
    for (std::size_t k = 0; k < arms_.size(); ++k) scores_[k] = rng.beta(a_[k], b_[k]);
    return argmax_lowest(scores_);
  }

  void on_reward(std::size_t arm, double reward, RngStream& rng) override {
    if (rng.bernoulli(reward)) {
      a_[arm] += 1.0;
    } else {
      b_[arm] += 1.0;
    }
  }

  void on_reset() override {
    std::fill(a_.begin(), a_.end(), 1.0);
    std::fill(b_.begin(), b_.end(), 1.0);
  }

 private:
  std::vector<double> a_;
  std::vector<double> b_;
};

/// Symmetric 2x2 matrix stored as (xx, xy, yy).
struct Sym2 {
  double xx = 1.0;
  double xy = 0.0;
  double yy = 1.0;

  double det() const noexcept { return xx * yy - xy * xy; }
  double min_eigenvalue() const noexcept {
    const double mid = 0.5 * (xx + yy);
    const double half = 0.5 * (xx - yy);
    return mid - std::sqrt(half * half + xy * xy);
  }
  /// xᵀ M⁻¹ x
  double inverse_quadratic(const std::array<double, 2>& x) const noexcept {
    return (yy * x[0] * x[0] - 2.0 * xy * x[0] * x[1] + xx * x[1] * x[1]) / det();
  }
  /// M⁻¹ v
  std::array<double, 2> solve(const std::array<double, 2>& v) const noexcept {
    const double d = det();
    return {(yy * v[0] - xy * v[1]) / d, (xx * v[1] - xy * v[0]) / d};
  }
};

/// LinUCB with disjoint linear models over the context (1, raw load),
/// regressing the actual reward load * nominal. Ridge parameter 1.
class LinUcbDisjointPolicy final : public Policy {
 public:
  LinUcbDisjointPolicy(std::size_t arms, double alpha) : Policy(arms), alpha_(alpha), a_(arms), b_(arms) {
    if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be nonnegative");
  }
  std::string_view kind() const override { return "linucb"; }
  double alpha() const noexcept { return alpha_; }

  const Sym2& design(std::size_t k) const { return a_.at(k); }
  const std::array<double, 2>& response(std::size_t k) const { return b_.at(k); }

  std::array<double, 2> theta(std::size_t k) const { return a_.at(k).solve(b_.at(k)); }

  double predicted(std::size_t k, double raw_load) const {
    const auto th = theta(k);
    return th[0] + th[1] * raw_load;
  }
  double width(std::size_t k, double raw_load) const {
    return alpha_ * std::sqrt(a_.at(k).inverse_quadratic({1.0, raw_load}));
  }
  double score(std::size_t k, double raw_load) const { return predicted(k, raw_load) + width(k, raw_load); }

 protected:
  void observe_load(double raw_load) override { last_load_ = raw_load; }

  std::size_t choose(std::uint64_t, double raw_load, RngStream&) override {
    for (std::size_t k = 0; k < arms_.size(); ++k) scores_[k] = score(k, raw_load);
    return argmax_lowest(scores_);
  }

  void on_reward(std::size_t arm, double reward, RngStream&) override {
    const double x1 = last_load_;
    const double actual = last_load_ * reward;
    auto& m = a_[arm];
    m.xx += 1.0;
    m.xy += x1;
    m.yy += x1 * x1;
    b_[arm][0] += actual;
    b_[arm][1] += actual * x1;
  }

  void on_reset() override {
    std::fill(a_.begin(), a_.end(), Sym2{});
    std::fill(b_.begin(), b_.end(), std::array<double, 2>{0.0, 0.0});
    last_load_ = 0.0;
  }

 private:
  double alpha_;
  std::vector<Sym2> a_;
  std::vector<std::array<double, 2>> b_;
  double last_load_ = 0.0;
};

/// Round-robin exploration on zero normalized load, greedy on the empirical
/// mean otherwise.
class RoundRobinGreedyPolicy final : public Policy {
 public:
  RoundRobinGreedyPolicy(std::size_t arms, Thresholds thresholds) : Policy(arms), thresholds_(thresholds) {}
  std::string_view kind() const override { return "rrgreedy"; }

 protected:
  std::size_t choose(std::uint64_t, double raw_load, RngStream&) override {
    if (normalize_load(raw_load, thresholds_) == 0.0) {
      const std::size_t arm = next_;
      next_ = (next_ + 1) % arms_.size();
      return arm;
    }
    for (std::size_t k = 0; k < arms_.size(); ++k) scores_[k] = arms_[k].mean_reward();
    return argmax_lowest(scores_);
  }
  void on_reset() override { next_ = 0; }

 private:
  Thresholds thresholds_;
  std::size_t next_ = 0;
};

/// Always pulls the true best arm; the zero-regret reference.
class OraclePolicy final : public Policy {
 public:
  OraclePolicy(std::size_t arms, std::size_t best_arm) : Policy(arms), best_(best_arm) {
    if (best_arm >= arms) throw std::out_of_range("best arm out of range");
  }
  std::string_view kind() const override { return "oracle"; }

 protected:
  bool forced_init() const override { return false; }
  std::size_t choose(std::uint64_t, double, RngStream&) override { return best_; }

 private:
  std::size_t best_;
};

}  // namespace oppbandit
