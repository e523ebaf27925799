#include "oppbandit/bounds.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

namespace oppbandit::bounds {
namespace {

TEST(Lemma1Upper, Values) {
  EXPECT_EQ(lemma1_upper(1.0, 2.0, 0.5), 1.0);
  EXPECT_EQ(lemma1_upper(std::numbers::e, 2.0, 0.5), 9.0);
  EXPECT_THROW(lemma1_upper(10.0, 2.0, 0.0), std::invalid_argument);
  EXPECT_THROW(lemma1_upper(10.0, 2.0, -0.1), std::invalid_argument);
}

// Reference values from adaptive Gauss-Kronrod quadrature (30 digits) of the
// symbolically differentiated h; computed offline, frozen here.
struct Golden {
  double alpha, gap, tau, f;
};
constexpr Golden kGolden[] = {
    {2.0, 0.2, 3.0, -0.357534133969976},   {2.0, 0.2, 10.0, 3.677463824603806},
    {2.0, 0.2, 100.0, 34.167692644807964}, {2.0, 0.2, 1000.0, 134.9350730581011},
    {2.0, 0.2, 10000.0, 310.10464591693227}, {2.0, 0.2, 50000.0, 441.79358695740336},
    {2.0, 0.5, 10.0, 1.9198491433728886},  {2.0, 0.5, 10000.0, 61.194983114424716},
};

TEST(Lemma1Lower, MatchesIndependentQuadrature) {
  for (const auto& g : kGolden) {
    const double f = lemma1_lower(g.tau, g.alpha, g.gap);
    EXPECT_NEAR(f, g.f, 1e-3 * std::max(1.0, std::abs(g.f))) << "tau=" << g.tau;
  }
}

TEST(Lemma1Lower, AtTwoIsMinusH2) {
  EXPECT_EQ(lemma1_lower(2.0, 2.0, 0.2), -lemma1_h(2.0, 2.0, 0.2));
  EXPECT_NEAR(lemma1_h(2.0, 2.0, 0.2), 1.0278465144893976, 1e-12);
  EXPECT_LT(lemma1_lower(2.0, 2.0, 0.2), 0.0);
}

TEST(Lemma1Lower, NondecreasingInTau) {
  const auto curve = lemma1_lower_curve(20000, 2.0, 0.2);
  for (std::size_t tau = 3; tau < curve.size(); ++tau) ASSERT_GE(curve[tau], curve[tau - 1]);
}

TEST(Lemma1Lower, CurveMatchesPointEvaluation) {
  const auto curve = lemma1_lower_curve(500, 2.0, 0.2, 0.25);
  EXPECT_TRUE(std::isnan(curve[1]));
  for (std::size_t tau : {2u, 3u, 17u, 250u, 500u}) {
    EXPECT_EQ(curve[tau], lemma1_lower(static_cast<double>(tau), 2.0, 0.2, 0.25));
  }
}

TEST(Lemma1Lower, QuadratureHalvingConverges) {
  const double coarse = lemma1_lower(1e4, 2.0, 0.2, 0.25);
  const double fine = lemma1_lower(1e4, 2.0, 0.2, 0.125);
  EXPECT_LT(std::abs(coarse - fine) / std::abs(fine), 1e-3);
}

TEST(Lemma1Lower, Errors) {
  EXPECT_THROW(lemma1_lower(1.5, 2.0, 0.2), std::invalid_argument);
  EXPECT_THROW(lemma1_lower(5.0, 2.0, 0.2, 0.0), std::invalid_argument);
}

TEST(HPrime, FiniteDifferenceMatchesSymbolicDerivative) {
  // symbolic derivative of h for alpha = 2, gap = 0.2, evaluated to 20 digits offline
  EXPECT_NEAR(lemma1_h_prime(2.0, 2.0, 0.2), 0.69490999775050526802, 1e-7);
  EXPECT_NEAR(lemma1_h_prime(10.0, 2.0, 0.2), 0.52438168744343703153, 1e-7);
  EXPECT_NEAR(lemma1_h_prime(1000.0, 2.0, 0.2), 0.063230977175431329932, 1e-7);
}

TEST(Theorem1, IsEps0TimesGapTimesLemma1LogTerm) {
  for (double T : {10.0, 1e3, 1e5}) {
    const double log_pulls = lemma1_upper(T, 2.0, 0.2) - 1.0;
    EXPECT_NEAR(theorem1_log_term(T, 2.0, 0.05, 0.2), 0.05 * 0.2 * log_pulls, 1e-12);
  }
}

TEST(Theorem2, Coefficient) {
  const auto zero = theorem2_coeff(17.0, 0.0, 0.0, {0.2, 0.15, 0.1, 0.05});
  EXPECT_EQ(zero.value, 0.0);
  EXPECT_TRUE(zero.warnings.empty());
  const auto c = theorem2_coeff(17.0, 0.05, 0.0, {0.2, 0.15, 0.1, 0.05});
  EXPECT_NEAR(c.value, 4 * 0.05 * 17 * (5.0 + 1.0 / 0.15 + 10.0 + 20.0), 1e-9);
  EXPECT_NEAR(c.value, 141.6667, 1e-3);
  EXPECT_TRUE(c.warnings.empty());
  EXPECT_EQ(theorem2_coeff(0.51, 0.0, 0.0, {0.2}).warnings.size(), 1u);
  EXPECT_EQ(theorem2_coeff(17.0, 0.0, 0.1, {0.2}).warnings.size(), 1u);
  EXPECT_THROW(theorem2_coeff(17.0, 0.0, 0.0, {0.0}), std::invalid_argument);
}

TEST(Theorem3, UniformConditionalMean) {
  for (double l : {0.001, 0.05, 0.3, 0.77}) {
    EXPECT_EQ(conditional_load_mean(LoadModel{UniformLoad{}}, l), l / 2.0);
  }
  EXPECT_THROW(conditional_load_mean(LoadModel{UniformLoad{}}, 0.0), std::invalid_argument);
}

TEST(Theorem3, BetaConditionalMeanMonteCarlo) {
  // closed form: int_0^0.5 x 6x(1-x) dx / 0.5 = 0.3125
  const double mc = conditional_load_mean(LoadModel{BetaLoad{2.0, 2.0}}, 0.5);
  EXPECT_NEAR(mc, 0.3125, 0.002);
  // trapezoid oracle of the same integral
  const int n = 100000;
  double num = 0.0, den = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = 0.5 * i / n;
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    num += w * x * 6 * x * (1 - x);
    den += w * 6 * x * (1 - x);
  }
  EXPECT_NEAR(num / den, 0.3125, 1e-8);
}

TEST(Theorem3, Coefficient) {
  const auto c = theorem3_coeff(0.51, LoadModel{UniformLoad{}}, 0.1, {0.5, 0.25});
  EXPECT_EQ(c.conditional_mean, 0.05);
  EXPECT_NEAR(c.value, 4 * 0.51 * 0.05 * 6.0, 1e-12);
  EXPECT_THROW(theorem3_coeff(0.51, LoadModel{ConstantLoad{0.5}}, 0.2, {0.1}), std::invalid_argument);
  EXPECT_THROW(theorem3_coeff(0.51, LoadModel{BinaryRandom{0.1, 0.1, 0.5}}, 0.05, {0.1}), std::invalid_argument);
  EXPECT_EQ(conditional_load_mean(LoadModel{BinaryRandom{0.1, 0.1, 0.5}}, 0.1), 0.1);
}

TEST(Lemma3, PullBound) {
  EXPECT_NEAR(lemma3_pull_bound(4.0, 1.0, 0.3) / lemma3_pull_bound(2.0, 1.0, 0.3), 2.0, 1e-14);
  EXPECT_NEAR(lemma3_pull_bound(1e5, 0.51, 0.2), 4 * 0.51 * std::log(1e5) / 0.04, 1e-9);
  EXPECT_NEAR(lemma3_pull_bound(1e5, 0.51, 0.2), 587.16, 0.01);
  EXPECT_THROW(lemma3_pull_bound(10.0, 1.0, 0.0), std::invalid_argument);
}

TEST(Bounds, LinearInAlpha) {
  const std::vector<double> gaps{0.2, 0.1};
  EXPECT_NEAR(theorem2_coeff(4.0, 0.05, 0.0, gaps).value, 2 * theorem2_coeff(2.0, 0.05, 0.0, gaps).value, 1e-12);
  EXPECT_NEAR(lemma3_pull_bound(1e4, 4.0, 0.1), 2 * lemma3_pull_bound(1e4, 2.0, 0.1), 1e-9);
  EXPECT_NEAR(theorem1_log_term(1e4, 4.0, 0.05, 0.1), 2 * theorem1_log_term(1e4, 2.0, 0.05, 0.1), 1e-12);
  EXPECT_NEAR(theorem3_coeff(4.0, LoadModel{UniformLoad{}}, 0.2, gaps).value,
              2 * theorem3_coeff(2.0, LoadModel{UniformLoad{}}, 0.2, gaps).value, 1e-12);
}

}  // namespace
}  // namespace oppbandit::bounds
