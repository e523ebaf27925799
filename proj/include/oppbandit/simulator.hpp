// The opportunistic bandit run loop, replication and aggregation.
//
// Per slot: reveal L_t, let the policy choose a_t, draw the nominal reward
// X_{a_t,t}, feed it back, and add the load-weighted regret increment.
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "oppbandit/core.hpp"
#include "oppbandit/environments.hpp"
#include "oppbandit/policies.hpp"
#include "oppbandit/rng.hpp"

namespace oppbandit {

/// Policy kind plus parameters as read from a config.
struct PolicySpec {
  std::string kind;   // ucb | adaucb | eadaucb | ts | linucb | rrgreedy | oracle
  std::string label;  // column value in results; defaults to kind
  double alpha = 2.0;
  // adaucb / rrgreedy: resolved absolute thresholds. When the config gave
  // probabilities, they are kept alongside so the config reserializes as written.
  Thresholds thresholds{};
  std::optional<double> lower_prob;
  std::optional<double> upper_prob;
  // eadaucb
  double lower_quantile = 0.05;
  double upper_quantile = 0.95;
  std::optional<std::size_t> window;

  bool operator==(const PolicySpec&) const = default;
};

enum class RegretKind { kPseudo, kRealized };

struct BoundsSpec {
  double quadrature_step = 0.25;
  std::optional<double> alpha;    // defaults to the first AdaUCB-family policy
  std::optional<double> l_minus;  // defaults to that policy's lower threshold
  bool operator==(const BoundsSpec&) const = default;
};

struct ExperimentConfig {
  std::string name = "experiment";
  RewardModel reward_model = BernoulliReward{};
  LoadModel load_model = ConstantLoad{};
  std::vector<PolicySpec> policies;
  std::uint64_t horizon = 1000;
  std::uint64_t replications = 1;
  std::uint64_t seed = 1;
  std::size_t checkpoint_count = 50;
  std::vector<std::uint64_t> checkpoints;  // explicit schedule; empty = log-spaced default
  RegretKind regret = RegretKind::kPseudo;
  bool shared_streams = false;  // every replication reuses replication 0's streams
  unsigned threads = 1;         // 0 = hardware concurrency; never affects results
  bool plot = true;
  BoundsSpec bounds{};

  bool operator==(const ExperimentConfig&) const = default;
};

/// `count` log-spaced slots in [1, T], deduplicated, always ending at T.
inline std::vector<std::uint64_t> log_spaced_checkpoints(std::uint64_t horizon, std::size_t count) {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  std::vector<std::uint64_t> out;
  if (count >= 2) {
    const double top = std::log(static_cast<double>(horizon));
    for (std::size_t i = 0; i < count; ++i) {
      const double x = std::exp(top * static_cast<double>(i) / static_cast<double>(count - 1));
      out.push_back(std::clamp<std::uint64_t>(static_cast<std::uint64_t>(std::llround(x)), 1, horizon));
    }
  }
  out.push_back(horizon);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline std::vector<std::uint64_t> resolved_checkpoints(const ExperimentConfig& cfg) {
  return cfg.checkpoints.empty() ? log_spaced_checkpoints(cfg.horizon, cfg.checkpoint_count) : cfg.checkpoints;
}

inline BanditInstance make_instance(const ExperimentConfig& cfg) { return make_instance(cfg.reward_model); }

/// Throws std::invalid_argument naming the offending field.
inline void validate(const ExperimentConfig& cfg) {
  const auto instance = make_instance(cfg);
  validate(cfg.load_model);
  if (cfg.horizon < instance.arms()) throw std::invalid_argument("horizon: must be >= number of arms");
  if (cfg.replications < 1) throw std::invalid_argument("replications: must be >= 1");
  if (cfg.policies.empty()) throw std::invalid_argument("policies: at least one policy is required");
  if (const auto* tr = std::get_if<TraceReward>(&cfg.reward_model); tr && tr->trace && tr->trace->arms() < 2) {
    throw std::invalid_argument("reward_model: trace has no reward columns");
  }
  const auto& cps = cfg.checkpoints;
  for (std::size_t i = 0; i < cps.size(); ++i) {
    if (cps[i] < 1 || cps[i] > cfg.horizon) throw std::invalid_argument("checkpoints: values must lie in [1, horizon]");
    if (i > 0 && cps[i] <= cps[i - 1]) throw std::invalid_argument("checkpoints: must be strictly increasing");
  }
  if (cps.empty() && cfg.checkpoint_count < 1) throw std::invalid_argument("checkpoint_count: must be >= 1");
}

inline std::unique_ptr<Policy> make_policy(const PolicySpec& spec, const BanditInstance& instance) {
  const std::size_t k = instance.arms();
  if (spec.kind == "ucb") return std::make_unique<UcbPolicy>(k, spec.alpha);
  if (spec.kind == "adaucb") return std::make_unique<AdaUcbPolicy>(k, spec.alpha, spec.thresholds);
  if (spec.kind == "eadaucb") {
    return std::make_unique<EAdaUcbPolicy>(k, spec.alpha, spec.lower_quantile, spec.upper_quantile, spec.window);
  }
  if (spec.kind == "ts") return std::make_unique<ThompsonPolicy>(k);
  if (spec.kind == "linucb") return std::make_unique<LinUcbDisjointPolicy>(k, spec.alpha);
  if (spec.kind == "rrgreedy") return std::make_unique<RoundRobinGreedyPolicy>(k, spec.thresholds);
  if (spec.kind == "oracle") return std::make_unique<OraclePolicy>(k, instance.best_arm());
  throw std::invalid_argument("policies.kind: unknown policy '" + spec.kind + "'");
}

/// Everything observable about one slot.
struct Step {
  std::uint64_t t = 0;
  double load = 0.0;
  std::size_t arm = 0;
  double reward = 0.0;
  double regret = 0.0;  // cumulative through t
};

/// Checkpointed trajectory of one replication.
struct ReplicationTrace {
  std::vector<double> regret;                     // per checkpoint
  std::vector<std::vector<std::uint64_t>> pulls;  // per checkpoint, per arm
};

namespace detail {

struct Streams {
  RngStream load;
  RngStream reward;
  RngStream policy;
};

inline Streams streams_for(const ExperimentConfig& cfg, std::size_t policy_index, std::uint64_t replication) {
  const std::uint64_t rep = cfg.shared_streams ? 0 : replication;
  return {RngStream(cfg.seed, make_stream_id(rep, 0, StreamRole::kLoad)),
          RngStream(cfg.seed, make_stream_id(rep, 0, StreamRole::kReward)),
          RngStream(cfg.seed, make_stream_id(rep, policy_index + 1, StreamRole::kPolicy))};
}

}  // namespace detail

/// Runs one replication of `policy` and calls observer(const Step&, const Policy&)
/// after every slot. policy_index selects the policy's private stream.
template <typename Observer>
void simulate(const ExperimentConfig& cfg, const BanditInstance& instance, Policy& policy, std::size_t policy_index,
              std::uint64_t replication, Observer&& observer) {
  auto rng = detail::streams_for(cfg, policy_index, replication);
  policy.reset();
  const std::size_t best = instance.best_arm();
  const double best_mean = instance.best_mean();
  double regret = 0.0;
  for (std::uint64_t t = 1; t <= cfg.horizon; ++t) {
    const double load = next_load(cfg.load_model, t, rng.load);
    const std::size_t arm = policy.select(t, load, rng.policy);
    if (arm >= instance.arms()) throw std::logic_error("policy selected an arm out of range");
    const double reward = sample_reward(cfg.reward_model, arm, t, rng.reward);
    policy.update(arm, reward, rng.policy);
    if (cfg.regret == RegretKind::kPseudo) {
      regret += load * (best_mean - instance.mean(arm));
    } else {
      regret += load * (sample_reward(cfg.reward_model, best, t, rng.reward) - reward);
    }
    observer(Step{t, load, arm, reward, regret}, static_cast<const Policy&>(policy));
  }
}

/// A single replication recorded at the configured checkpoints.
inline ReplicationTrace run_once(const ExperimentConfig& cfg, std::size_t policy_index, std::uint64_t replication) {
  const auto instance = make_instance(cfg);
  auto policy = make_policy(cfg.policies.at(policy_index), instance);
  const auto cps = resolved_checkpoints(cfg);
  ReplicationTrace out;
  out.regret.reserve(cps.size());
  out.pulls.reserve(cps.size());
  std::size_t next = 0;
  simulate(cfg, instance, *policy, policy_index, replication, [&](const Step& s, const Policy& p) {
    if (next < cps.size() && s.t == cps[next]) {
      out.regret.push_back(s.regret);
      std::vector<std::uint64_t> pulls(p.arms());
      for (std::size_t k = 0; k < p.arms(); ++k) pulls[k] = p.arm_state(k).pulls();
      out.pulls.push_back(std::move(pulls));
      ++next;
    }
  });
  return out;
}

/// All replications of one policy plus across-replication statistics.
struct RegretTrace {
  std::string label;
  std::string kind;
  std::vector<std::uint64_t> checkpoints;
  std::vector<ReplicationTrace> replications;
  std::vector<double> mean_regret;
  std::vector<double> std_regret;               // sample (n - 1) standard deviation; 0 when R = 1
  std::vector<std::vector<double>> mean_pulls;  // per checkpoint, per arm

  std::size_t index_of(std::uint64_t t) const {
    const auto it = std::lower_bound(checkpoints.begin(), checkpoints.end(), t);
    if (it == checkpoints.end() || *it != t) throw std::out_of_range("not a checkpoint: " + std::to_string(t));
    return static_cast<std::size_t>(it - checkpoints.begin());
  }
  double mean_regret_at(std::uint64_t t) const { return mean_regret[index_of(t)]; }
  double mean_pulls_at(std::uint64_t t, std::size_t arm) const { return mean_pulls[index_of(t)].at(arm); }
};

/// Mean and sample standard deviation over replications, in replication order.
inline void aggregate(RegretTrace& trace) {
  const std::size_t n_cp = trace.checkpoints.size();
  const std::size_t reps = trace.replications.size();
  const std::size_t arms = reps ? trace.replications.front().pulls.front().size() : 0;
  trace.mean_regret.assign(n_cp, 0.0);
  trace.std_regret.assign(n_cp, 0.0);
  trace.mean_pulls.assign(n_cp, std::vector<double>(arms, 0.0));
  for (std::size_t c = 0; c < n_cp; ++c) {
    // shifted by the first replication: identical replications give exactly zero spread
    const double origin = trace.replications.front().regret[c];
    double sum = 0.0;
    for (const auto& r : trace.replications) sum += r.regret[c] - origin;
    const double shift = sum / static_cast<double>(reps);
    double ss = 0.0;
    for (const auto& r : trace.replications) {
      const double d = r.regret[c] - origin - shift;
      ss += d * d;
    }
    trace.mean_regret[c] = origin + shift;
    trace.std_regret[c] = reps > 1 ? std::sqrt(ss / static_cast<double>(reps - 1)) : 0.0;
    for (std::size_t k = 0; k < arms; ++k) {
      double p = 0.0;
      for (const auto& r : trace.replications) p += static_cast<double>(r.pulls[c][k]);
      trace.mean_pulls[c][k] = p / static_cast<double>(reps);
    }
  }
}

/// R replications of every configured policy. Jobs may run on several
/// threads; each writes only its own slot, so results do not depend on
/// scheduling.
inline std::vector<RegretTrace> run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  const auto cps = resolved_checkpoints(cfg);
  const std::size_t n_pol = cfg.policies.size();
  const std::uint64_t reps = cfg.replications;
  std::vector<RegretTrace> traces(n_pol);
  for (std::size_t p = 0; p < n_pol; ++p) {
    traces[p].label = cfg.policies[p].label.empty() ? cfg.policies[p].kind : cfg.policies[p].label;
    traces[p].kind = cfg.policies[p].kind;
    traces[p].checkpoints = cps;
    traces[p].replications.resize(reps);
  }

  const std::uint64_t jobs = n_pol * reps;
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::uint64_t j = next.fetch_add(1);
      if (j >= jobs) return;
      const std::size_t p = static_cast<std::size_t>(j / reps);
      const std::uint64_t r = j % reps;
      try {
        traces[p].replications[r] = run_once(cfg, p, r);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(jobs);
      }
    }
  };
  unsigned n_threads = cfg.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg.threads;
  n_threads = static_cast<unsigned>(std::min<std::uint64_t>(n_threads, jobs));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  for (auto& t : traces) aggregate(t);
  return traces;
}

}  // namespace oppbandit
