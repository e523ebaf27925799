// Closed-form regret and pull-count bounds for AdaUCB.
//
// Additive O(1) constants have no computable value and are never folded into
// these numbers; callers report them symbolically.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "oppbandit/environments.hpp"
#include "oppbandit/rng.hpp"

namespace oppbandit::bounds {

namespace detail {
inline void require_gap(double gap) {
  if (!(gap > 0.0) || !std::isfinite(gap)) throw std::invalid_argument("gap must be positive");
}
inline double inverse_gap_sum(const std::vector<double>& gaps) {
  if (gaps.empty()) throw std::invalid_argument("need at least one suboptimal gap");
  double s = 0.0;
  for (double g : gaps) {
    require_gap(g);
    s += 1.0 / g;
  }
  return s;
}
}  // namespace detail

/// Deterministic square-wave scenario: C_2(t) <= alpha ln t / gap^2 + 1.
inline double lemma1_upper(double t, double alpha, double gap) {
  detail::require_gap(gap);
  if (!(t >= 1.0)) throw std::invalid_argument("t must be >= 1");
  return alpha * std::log(t) / (gap * gap) + 1.0;
}

/// h(s) = (alpha ln s / gap^2) (1 + sqrt(2 alpha ln s / ((2s - 1) gap^2)))^-2.
inline double lemma1_h(double s, double alpha, double gap) {
  const double ls = std::log(s);
  const double g2 = gap * gap;
  const double inner = 1.0 + std::sqrt(2.0 * alpha * ls / ((2.0 * s - 1.0) * g2));
  return alpha * ls / g2 / (inner * inner);
}

/// h'(s) by a central difference with relative step 1e-5.
inline double lemma1_h_prime(double s, double alpha, double gap) {
  const double d = 1e-5 * s;
  return (lemma1_h(s + d, alpha, gap) - lemma1_h(s - d, alpha, gap)) / (2.0 * d);
}

inline constexpr double kDefaultQuadratureStep = 0.25;

namespace detail {

/// Trapezoid integral of min(h', 1) over [a, b] with ceil((b - a) / step) panels.
inline double clipped_slope_integral(double a, double b, double alpha, double gap, double step) {
  if (b <= a) return 0.0;
  const auto panels = static_cast<std::size_t>(std::max(1.0, std::ceil((b - a) / step - 1e-12)));
  const double w = (b - a) / static_cast<double>(panels);
  auto g = [&](double s) { return std::min(lemma1_h_prime(s, alpha, gap), 1.0); };
  double sum = 0.5 * (g(a) + g(b));
  for (std::size_t i = 1; i < panels; ++i) sum += g(a + w * static_cast<double>(i));
  return sum * w;
}

inline void require_step(double step) {
  if (!(step > 0.0) || !std::isfinite(step)) throw std::invalid_argument("quadrature step must be positive");
}

}  // namespace detail

/// f(tau) = int_2^tau min(h'(s), 1) ds - h(2): lower bound on C_2(2 tau).
///
/// The integral is accumulated one unit interval at a time, so values at
/// integer tau agree exactly with lemma1_lower_curve.
inline double lemma1_lower(double tau, double alpha, double gap, double step = kDefaultQuadratureStep) {
  detail::require_gap(gap);
  detail::require_step(step);
  if (!(tau >= 2.0)) throw std::invalid_argument("tau must be >= 2");
  double integral = 0.0;
  double s = 2.0;
  for (; s + 1.0 <= tau; s += 1.0) integral += detail::clipped_slope_integral(s, s + 1.0, alpha, gap, step);
  integral += detail::clipped_slope_integral(s, tau, alpha, gap, step);
  return integral - lemma1_h(2.0, alpha, gap);
}

/// f(tau) for tau = 0..tau_max; entries below 2 are NaN.
inline std::vector<double> lemma1_lower_curve(std::uint64_t tau_max, double alpha, double gap,
                                               double step = kDefaultQuadratureStep) {
  detail::require_gap(gap);
  detail::require_step(step);
  std::vector<double> f(tau_max + 1, std::numeric_limits<double>::quiet_NaN());
  if (tau_max < 2) return f;
  const double h2 = lemma1_h(2.0, alpha, gap);
  double integral = 0.0;
  f[2] = integral - h2;
  for (std::uint64_t tau = 3; tau <= tau_max; ++tau) {
    const double a = static_cast<double>(tau - 1);
    integral += detail::clipped_slope_integral(a, a + 1.0, alpha, gap, step);
    f[tau] = integral - h2;
  }
  return f;
}

/// Two-arm deterministic regret log term: eps0 alpha ln T / gap.
inline double theorem1_log_term(double horizon, double alpha, double eps0, double gap) {
  detail::require_gap(gap);
  return eps0 * alpha * std::log(horizon) / gap;
}

/// A bound coefficient together with the hypotheses it was evaluated outside of.
struct Coefficient {
  double value = 0.0;
  std::vector<std::string> warnings;
};

/// Log-term coefficient 4 eps0 alpha sum_k 1/gap_k for random binary load.
inline Coefficient theorem2_coeff(double alpha, double eps0, double eps1, const std::vector<double>& gaps) {
  Coefficient c;
  c.value = 4.0 * eps0 * alpha * detail::inverse_gap_sum(gaps);
  if (!(alpha > 16.0)) c.warnings.push_back("alpha <= 16: outside the hypotheses of the binary-load bound");
  if (!(std::sqrt(eps1 / (1.0 - eps0)) < 0.125)) {
    c.warnings.push_back("sqrt(eps1 / (1 - eps0)) >= 1/8: outside the hypotheses of the binary-load bound");
  }
  return c;
}

inline constexpr std::size_t kConditionalMeanSamples = 1'000'000;
inline constexpr std::uint64_t kConditionalMeanSeed = 0x5eed0c0ffee;

/// E[L | L <= l_minus] under a load model. Uniform and discrete models are
/// exact; Beta uses Monte Carlo with `samples` draws.
inline double conditional_load_mean(const LoadModel& model, double l_minus,
                                    std::size_t samples = kConditionalMeanSamples,
                                    std::uint64_t seed = kConditionalMeanSeed) {
  auto no_mass = [&] {
    return std::invalid_argument("no load mass at or below l_minus = " + std::to_string(l_minus));
  };
  auto two_point = [&](double lo_value, double p_lo, double hi_value) -> double {
    const double p_hi = 1.0 - p_lo;
    double mass = 0.0;
    double acc = 0.0;
    if (lo_value <= l_minus && p_lo > 0.0) {
      mass += p_lo;
      acc += p_lo * lo_value;
    }
    if (hi_value <= l_minus && p_hi > 0.0) {
      mass += p_hi;
      acc += p_hi * hi_value;
    }
    if (mass == 0.0) throw no_mass();
    return acc / mass;
  };
  return std::visit(
      [&](const auto& m) -> double {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, UniformLoad>) {
          if (!(l_minus > 0.0)) throw no_mass();
          return std::min(l_minus, 1.0) / 2.0;
        } else if constexpr (std::is_same_v<M, BinaryRandom>) {
          return two_point(m.eps0, m.rho, 1.0 - m.eps1);
        } else if constexpr (std::is_same_v<M, PeriodicSquareWave>) {
          return two_point(m.eps0, 0.5, 1.0 - m.eps1);
        } else if constexpr (std::is_same_v<M, ConstantLoad>) {
          if (m.value > l_minus) throw no_mass();
          return m.value;
        } else if constexpr (std::is_same_v<M, BetaLoad>) {
          if (!(l_minus > 0.0)) throw no_mass();
          RngStream rng(seed, make_stream_id(0, 0, StreamRole::kAux));
          double acc = 0.0;
          std::size_t hits = 0;
          for (std::size_t i = 0; i < samples; ++i) {
            const double x = rng.beta(m.a, m.b);
            if (x <= l_minus) {
              acc += x;
              ++hits;
            }
          }
          if (hits == 0) throw no_mass();
          return acc / static_cast<double>(hits);
        } else if constexpr (std::is_same_v<M, TraceLoad>) {
          double acc = 0.0;
          std::size_t hits = 0;
          for (double x : m.trace->loads) {
            if (x <= l_minus) {
              acc += x;
              ++hits;
            }
          }
          if (hits == 0) throw no_mass();
          return acc / static_cast<double>(hits);
        } else {
          throw std::invalid_argument("conditional load mean is not available for this load model");
        }
      },
      model);
}

struct Theorem3Coefficient {
  double conditional_mean = 0.0;
  double value = 0.0;
};

/// Single-threshold continuous-load coefficient 4 alpha E[L | L <= l-] sum_k 1/gap_k.
inline Theorem3Coefficient theorem3_coeff(double alpha, const LoadModel& model, double l_minus,
                                          const std::vector<double>& gaps,
                                          std::size_t samples = kConditionalMeanSamples) {
  Theorem3Coefficient c;
  c.conditional_mean = conditional_load_mean(model, l_minus, samples);
  c.value = 4.0 * alpha * c.conditional_mean * detail::inverse_gap_sum(gaps);
  return c;
}

/// E[C_k(T)] <= 4 alpha ln T / gap^2 + O(1).
inline double lemma3_pull_bound(double horizon, double alpha, double gap) {
  detail::require_gap(gap);
  if (!(horizon >= 2.0)) throw std::invalid_argument("horizon must be >= 2");
  return 4.0 * alpha * std::log(horizon) / (gap * gap);
}

}  // namespace oppbandit::bounds
