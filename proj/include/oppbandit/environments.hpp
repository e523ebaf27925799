// Load sequences, nominal reward processes and trace ingestion.
#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <memory>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "oppbandit/core.hpp"
#include "oppbandit/quantile.hpp"
#include "oppbandit/rng.hpp"

namespace oppbandit {

/// A parse or validation failure in a trace file. line() is 1-based, 0 when
/// the problem is not tied to a row.
class TraceError : public std::runtime_error {
 public:
  TraceError(const std::string& path, std::size_t line, const std::string& what)
      : std::runtime_error(path + (line ? ":" + std::to_string(line) : std::string{}) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Loads (max-scaled into [0, 1]) and optional per-arm nominal rewards.
struct Trace {
  std::string path;
  std::vector<double> loads;
  std::vector<std::vector<double>> rewards;  // rows x arms; empty for load-only traces
  double scale = 1.0;                        // raw maximum the loads were divided by

  std::size_t rows() const noexcept { return loads.size(); }
  bool has_rewards() const noexcept { return !rewards.empty(); }
  std::size_t arms() const noexcept { return rewards.empty() ? 0 : rewards.front().size(); }

  std::vector<double> reward_means() const {
    std::vector<double> means(arms(), 0.0);
    for (const auto& row : rewards) {
      for (std::size_t k = 0; k < row.size(); ++k) means[k] += row[k];
    }
    for (double& m : means) m /= static_cast<double>(rewards.size());
    return means;
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline bool parse_real(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace detail

/// Parses CSV text: column 1 is the load, optional columns 2..K+1 are
/// per-arm rewards in [0, 1]. A non-numeric first row is taken as a header.
inline Trace parse_trace(std::istream& in, const std::string& path) {
  Trace trace;
  trace.path = path;
  std::vector<double> raw;
  std::string line;
  std::size_t lineno = 0;
  std::size_t columns = 0;
  bool seen_row = false;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = line;
    if (lineno == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    if (detail::trim(view).empty()) continue;
    const auto fields = detail::split_csv(view);
    double load = 0.0;
    if (!detail::parse_real(fields[0], load)) {
      if (!seen_row) {
        seen_row = true;  // header
        continue;
      }
      throw TraceError(path, lineno, "load is not a number");
    }
    seen_row = true;
    if (!std::isfinite(load) || load < 0.0) throw TraceError(path, lineno, "load must be finite and >= 0");
    if (raw.empty()) {
      columns = fields.size();
    } else if (fields.size() != columns) {
      throw TraceError(path, lineno,
                       "expected " + std::to_string(columns) + " columns, found " + std::to_string(fields.size()));
    }
    raw.push_back(load);
    if (columns > 1) {
      std::vector<double> row(columns - 1);
      for (std::size_t k = 1; k < columns; ++k) {
        if (!detail::parse_real(fields[k], row[k - 1])) {
          throw TraceError(path, lineno, "reward column " + std::to_string(k) + " is not a number");
        }
        if (!(row[k - 1] >= 0.0 && row[k - 1] <= 1.0)) {
          throw TraceError(path, lineno, "reward column " + std::to_string(k) + " outside [0, 1]");
        }
      }
      trace.rewards.push_back(std::move(row));
    }
  }
  if (raw.empty()) throw TraceError(path, 0, "trace has no data rows");
  if (trace.has_rewards() && trace.arms() < 2) throw TraceError(path, 0, "reward columns need at least 2 arms");
  trace.scale = *std::max_element(raw.begin(), raw.end());
  if (!(trace.scale > 0.0)) throw TraceError(path, 0, "trace loads are all zero");
  trace.loads.reserve(raw.size());
  for (double x : raw) trace.loads.push_back(x / trace.scale);
  return trace;
}

inline Trace load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TraceError(path, 0, "cannot open trace file");
  return parse_trace(in, path);
}

// ---------------------------------------------------------------------------
// Load models

/// eps0 on even slots, 1 - eps1 on odd slots.
struct PeriodicSquareWave {
  double eps0 = 0.0;
  double eps1 = 0.0;
  bool operator==(const PeriodicSquareWave&) const = default;
};

/// eps0 with probability rho, 1 - eps1 otherwise, i.i.d.
struct BinaryRandom {
  double eps0 = 0.0;
  double eps1 = 0.0;
  double rho = 0.5;
  bool operator==(const BinaryRandom&) const = default;
};

struct BetaLoad {
  double a = 2.0;
  double b = 2.0;
  bool operator==(const BetaLoad&) const = default;
};

/// Uniform on [0, 1].
struct UniformLoad {
  bool operator==(const UniformLoad&) const = default;
};

struct ConstantLoad {
  double value = 1.0;
  bool operator==(const ConstantLoad&) const = default;
};

/// Replays a trace, wrapping around when the horizon exceeds its length.
struct TraceLoad {
  std::string path;
  std::shared_ptr<const Trace> trace;
  bool operator==(const TraceLoad& o) const { return path == o.path; }
};

/// Daily-periodic sinusoid with multiplicative Beta noise normalized to
/// mean 1: (base + amplitude (1 + sin(2 pi t / period)) / 2) * B / E[B].
struct SemiPeriodicSynthetic {
  double period = 1440.0;
  double base = 0.1;
  double amplitude = 0.8;
  double noise_a = 8.0;
  double noise_b = 8.0;
  bool operator==(const SemiPeriodicSynthetic&) const = default;
};

using LoadModel =
    std::variant<PeriodicSquareWave, BinaryRandom, BetaLoad, UniformLoad, ConstantLoad, TraceLoad, SemiPeriodicSynthetic>;

inline void validate(const LoadModel& model) {
  auto eps_ok = [](double e) { return e >= 0.0 && e < 0.5; };
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, PeriodicSquareWave>) {
          if (!eps_ok(m.eps0) || !eps_ok(m.eps1)) throw std::invalid_argument("eps0, eps1 must lie in [0, 0.5)");
        } else if constexpr (std::is_same_v<M, BinaryRandom>) {
          if (!eps_ok(m.eps0) || !eps_ok(m.eps1)) throw std::invalid_argument("eps0, eps1 must lie in [0, 0.5)");
          if (!(m.rho >= 0.0 && m.rho <= 1.0)) throw std::invalid_argument("rho must lie in [0, 1]");
        } else if constexpr (std::is_same_v<M, BetaLoad>) {
          if (!(m.a > 0.0 && m.b > 0.0)) throw std::invalid_argument("beta parameters must be positive");
        } else if constexpr (std::is_same_v<M, ConstantLoad>) {
          if (!(m.value >= 0.0) || !std::isfinite(m.value)) throw std::invalid_argument("constant load must be >= 0");
        } else if constexpr (std::is_same_v<M, TraceLoad>) {
          if (!m.trace) throw std::invalid_argument("trace load has not been loaded: " + m.path);
        } else if constexpr (std::is_same_v<M, SemiPeriodicSynthetic>) {
          if (!(m.period > 0.0 && m.base >= 0.0 && m.amplitude >= 0.0 && m.noise_a > 0.0 && m.noise_b > 0.0)) {
            throw std::invalid_argument("semi-periodic parameters out of range");
          }
        }
      },
      model);
}

/// Load revealed at slot t (1-based). Stochastic models draw from rng in
/// sequence; deterministic ones do not touch it.
inline double next_load(const LoadModel& model, std::uint64_t t, RngStream& rng) {
  if (t < 1) throw std::invalid_argument("time slots start at 1");
  return std::visit(
      [&](const auto& m) -> double {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, PeriodicSquareWave>) {
          return t % 2 == 0 ? m.eps0 : 1.0 - m.eps1;
        } else if constexpr (std::is_same_v<M, BinaryRandom>) {
          return rng.uniform() < m.rho ? m.eps0 : 1.0 - m.eps1;
        } else if constexpr (std::is_same_v<M, BetaLoad>) {
          return rng.beta(m.a, m.b);
        } else if constexpr (std::is_same_v<M, UniformLoad>) {
          return rng.uniform();
        } else if constexpr (std::is_same_v<M, ConstantLoad>) {
          return m.value;
        } else if constexpr (std::is_same_v<M, TraceLoad>) {
          return m.trace->loads[(t - 1) % m.trace->rows()];
        } else {
          const double phase = 2.0 * std::numbers::pi * static_cast<double>(t) / m.period;
          const double level = m.base + m.amplitude * 0.5 * (1.0 + std::sin(phase));
          const double noise = rng.beta(m.noise_a, m.noise_b) * (m.noise_a + m.noise_b) / m.noise_a;
          return level * noise;
        }
      },
      model);
}

/// Number of times a trace-backed load wraps within horizon T (0 otherwise).
inline std::uint64_t trace_wraps(const LoadModel& model, std::uint64_t horizon) {
  if (const auto* m = std::get_if<TraceLoad>(&model); m && m->trace && horizon > 0) {
    return (horizon - 1) / m->trace->rows();
  }
  return 0;
}

/// Generalized inverse CDF inf{x : P(L <= x) >= p} of the load distribution.
inline double load_quantile(const LoadModel& model, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile probability must lie in [0, 1]");
  return std::visit(
      [&](const auto& m) -> double {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, PeriodicSquareWave>) {
          return p <= 0.5 ? std::min(m.eps0, 1.0 - m.eps1) : std::max(m.eps0, 1.0 - m.eps1);
        } else if constexpr (std::is_same_v<M, BinaryRandom>) {
          const double lo = std::min(m.eps0, 1.0 - m.eps1);
          const double hi = std::max(m.eps0, 1.0 - m.eps1);
          const double p_lo = m.eps0 <= 1.0 - m.eps1 ? m.rho : 1.0 - m.rho;
          return p <= p_lo ? lo : hi;
        } else if constexpr (std::is_same_v<M, BetaLoad>) {
          return boost::math::ibeta_inv(m.a, m.b, p);
        } else if constexpr (std::is_same_v<M, UniformLoad>) {
          return p;
        } else if constexpr (std::is_same_v<M, ConstantLoad>) {
          return m.value;
        } else if constexpr (std::is_same_v<M, TraceLoad>) {
          std::vector<double> sorted = m.trace->loads;
          std::sort(sorted.begin(), sorted.end());
          if (p == 0.0) return sorted.front();
          return sorted[nearest_rank(p, sorted.size()) - 1];
        } else {
          throw std::invalid_argument("the semi-periodic load has no closed-form quantile");
        }
      },
      model);
}

/// Lower threshold with P(L <= l) = rho.
inline double lower_threshold_for(const LoadModel& model, double rho) { return load_quantile(model, rho); }
/// Upper threshold with P(L >= l) = rho.
inline double upper_threshold_for(const LoadModel& model, double rho) { return load_quantile(model, 1.0 - rho); }

// ---------------------------------------------------------------------------
// Reward models

/// X_{k,t} = u_k for every t.
struct DiracReward {
  std::vector<double> means;
  bool operator==(const DiracReward&) const = default;
};

/// X_{k,t} ~ Bernoulli(u_k).
struct BernoulliReward {
  std::vector<double> means;
  bool operator==(const BernoulliReward&) const = default;
};

/// X_{k,t} read from the trace row of slot t (wrapping).
struct TraceReward {
  std::string path;
  std::shared_ptr<const Trace> trace;
  bool operator==(const TraceReward& o) const { return path == o.path; }
};

using RewardModel = std::variant<DiracReward, BernoulliReward, TraceReward>;

/// True means u_k: configured values, or trace-wide column means.
inline std::vector<double> reward_means(const RewardModel& model) {
  return std::visit(
      [](const auto& m) -> std::vector<double> {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, TraceReward>) {
          if (!m.trace || !m.trace->has_rewards()) {
            throw std::invalid_argument("trace reward model needs a trace with reward columns: " + m.path);
          }
          return m.trace->reward_means();
        } else {
          return m.means;
        }
      },
      model);
}

inline BanditInstance make_instance(const RewardModel& model) { return BanditInstance(reward_means(model)); }

/// Nominal reward of `arm` at slot t. Stochastic rewards use the random-access
/// draw at index (t - 1) K + arm of the reward stream, so the reward table of
/// a replication does not depend on which arms were pulled.
inline double sample_reward(const RewardModel& model, std::size_t arm, std::uint64_t t, const RngStream& rng) {
  return std::visit(
      [&](const auto& m) -> double {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, DiracReward>) {
          return m.means.at(arm);
        } else if constexpr (std::is_same_v<M, BernoulliReward>) {
          const std::uint64_t index = (t - 1) * m.means.size() + arm;
          return rng.uniform_at(index) < m.means.at(arm) ? 1.0 : 0.0;
        } else {
          return m.trace->rewards[(t - 1) % m.trace->rows()].at(arm);
        }
      },
      model);
}

/// Rows of a synthetic semi-periodic trace with Bernoulli reward columns for
/// `means`. The first column is the raw (unscaled) load.
inline std::vector<std::vector<double>> generate_semi_periodic_rows(const SemiPeriodicSynthetic& params,
                                                                    const std::vector<double>& means,
                                                                    std::uint64_t rows, std::uint64_t seed) {
  const LoadModel load{params};
  validate(load);
  const RewardModel rewards{BernoulliReward{means}};
  RngStream load_rng(seed, make_stream_id(0, 0, StreamRole::kLoad));
  const RngStream reward_rng(seed, make_stream_id(0, 0, StreamRole::kReward));
  std::vector<std::vector<double>> out;
  out.reserve(rows);
  for (std::uint64_t t = 1; t <= rows; ++t) {
    std::vector<double> row{next_load(load, t, load_rng)};
    for (std::size_t k = 0; k < means.size(); ++k) row.push_back(sample_reward(rewards, k, t, reward_rng));
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace oppbandit
