#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "zmgx/limit_laws.hpp"

using namespace zmgx;

namespace {
std::vector<LimitLaw> all_laws() {
  return {law::GumbelShift{0.3},        law::TruncatedGumbel{1.5},     law::DiscreteMaxLimit{0.5, 0.4},
          law::DiscreteMaxLimit{0.5, 0.0}, law::ShiftedExpPositivePart{1.0}, law::ZmgMinLimit{0.7, 0.3},
          law::ZmgMinLimit{0.7, 0.0},   law::LogisticShift{-1.0},      law::TruncatedLogistic{0.5},
          law::DefectiveTwoPoint{0.3}};
}
}  // namespace

TEST(LimitCdf, Examples) {
  EXPECT_NEAR(limit_cdf(law::GumbelShift{0.0}, 0.0), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(limit_cdf(law::ShiftedExpPositivePart{1.0}, 0.0), 1 - std::exp(-1.0), 1e-15);
  EXPECT_NEAR(limit_cdf(law::DiscreteMaxLimit{0.0, 0.5}, 1.0), std::exp(-0.5), 1e-15);
  EXPECT_DOUBLE_EQ(limit_cdf(law::LogisticShift{0.0}, 0.0), 0.5);
}

TEST(LimitCdf, MonotoneAndBoundedByMass) {
  for (const auto& l : all_laws()) {
    double prev = 0.0;
    const double mass = limit_mass(l);
    for (int i = 0; i < 10000; ++i) {
      const double x = -20.0 + 40.0 * i / 9999.0;
      const double c = limit_cdf(l, x);
      ASSERT_GE(c, prev);
      ASSERT_LE(c, mass + 1e-15);
      prev = c;
    }
  }
}

TEST(LimitCdf, ShiftAndTruncationIdentities) {
  for (double x = -5; x < 5; x += 0.37) {
    EXPECT_EQ(limit_cdf(law::GumbelShift{0.8}, x), limit_cdf(law::GumbelShift{0.0}, x + 0.8));
    const double t = limit_cdf(law::TruncatedGumbel{1.2}, x);
    if (x > -1.2) {
      EXPECT_EQ(t, gumbel_cdf(x));
    }
    if (x < -1.2) {
      EXPECT_EQ(t, 0.0);
    }
  }
  const LimitLaw d = law::DiscreteMaxLimit{0.4, 0.3};
  for (int k = 0; k < 10; ++k) {
    const double v = std::exp(-std::exp(0.4) * std::pow(0.7, k));
    EXPECT_NEAR(limit_cdf(d, k), v, 1e-15);
    EXPECT_EQ(limit_cdf(d, k + 0.99), limit_cdf(d, k));
  }
}

TEST(LimitMass, DefectiveCases) {
  EXPECT_NEAR(limit_mass(law::DiscreteMaxLimit{0.0, 0.0}), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(limit_mass(law::ZmgMinLimit{2.0, 0.0}), 1 - std::exp(-2.0), 1e-15);
  EXPECT_EQ(limit_mass(law::DefectiveTwoPoint{0.25}), 0.25);
  EXPECT_EQ(limit_mass(law::GumbelShift{1.0}), 1.0);
}

TEST(LimitQuantile, InvertsCdf) {
  for (const auto& l : all_laws())
    for (double q : {0.001, 0.05, 0.3, 0.5, 0.9, 0.999}) {
      const auto x = limit_quantile(l, q);
      if (q > limit_mass(l)) {
        EXPECT_FALSE(x.has_value());
        continue;
      }
      ASSERT_TRUE(x.has_value());
      EXPECT_GE(limit_cdf(l, *x), q - 1e-12);
      EXPECT_LT(limit_cdf(l, *x - 1e-6), q + 1e-12);
    }
}

TEST(Logistic, StableInTails) {
  EXPECT_EQ(logistic_cdf(-800.0), std::exp(-800.0));
  EXPECT_EQ(logistic_cdf(800.0), 1.0);
  EXPECT_NEAR(logistic_cdf(-1.0), 1.0 / (1.0 + std::exp(1.0)), 1e-16);
}
