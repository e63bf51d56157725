#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "zmgx/branching.hpp"
#include "zmgx/rng.hpp"
#include "zmgx/scenarios.hpp"

using namespace zmgx;

namespace {
OffspringSchedule critical() { return OffspringSchedule(std::vector<ZmgParams>{ZmgParams(0.5, 0.5)}); }

std::vector<ZmgParams> random_laws(std::mt19937_64& g, int n) {
  std::uniform_real_distribution<double> up(0.1, 0.9), um(0.5, 2.0);
  std::vector<ZmgParams> out;
  for (int i = 0; i < n; ++i) {
    const double p = up(g);
    const double a = std::min(1.0, um(g) * p);
    out.emplace_back(a, p);
  }
  return out;
}
}  // namespace

TEST(Schedule, RepeatsLastEntryAndIsOneBased) {
  const OffspringSchedule s(std::vector<ZmgParams>{ZmgParams(0.2, 0.3), ZmgParams(0.4, 0.5)});
  EXPECT_EQ(s.at(1), ZmgParams(0.2, 0.3));
  EXPECT_EQ(s.at(2), ZmgParams(0.4, 0.5));
  EXPECT_EQ(s.at(9), ZmgParams(0.4, 0.5));
  EXPECT_THROW(s.at(0), std::out_of_range);
  EXPECT_THROW(OffspringSchedule(std::vector<ZmgParams>{}), std::invalid_argument);
}

TEST(Aggregates, CriticalGeometric) {
  const auto t = aggregate_table(critical(), 10);
  for (const auto& g : t) {
    const double n = static_cast<double>(g.n);
    EXPECT_DOUBLE_EQ(g.m, 1.0);
    EXPECT_DOUBLE_EQ(g.r, 1.0);
    EXPECT_DOUBLE_EQ(g.R, 1.0);
    EXPECT_NEAR(g.M, 1.0, 1e-15);
    EXPECT_NEAR(g.B, n, 1e-12);
    EXPECT_NEAR(g.survival, 1.0 / (1.0 + n), 1e-15);
  }
  EXPECT_NEAR(t[3].survival, 0.2, 1e-15);
  for (int n = 1; n <= 6; ++n) EXPECT_NEAR(t[n - 1].survival, oracle::critical_geometric_survival(n), 1e-14);
}

TEST(Aggregates, OneStepIdentities) {
  const ZmgParams z(0.37, 0.61);
  const auto g = aggregates(OffspringSchedule(std::vector<ZmgParams>{z}), 1);
  EXPECT_NEAR(g.A, g.R, 1e-15);
  EXPECT_NEAR(g.B, g.r, 1e-15);
  EXPECT_NEAR(g.survival, 0.37, 1e-15);
}

TEST(Aggregates, IdentityAndMonotoneSurvivalOnRandomSchedules) {
  std::mt19937_64 gen(17);
  for (int rep = 0; rep < 20; ++rep) {
    const OffspringSchedule s(random_laws(gen, 40));
    const auto t = aggregate_table(s, 40);
    double prev = 1.0;
    for (const auto& g : t) {
      EXPECT_NEAR((1.0 + g.B - g.A) / g.M, 1.0, 1e-9);
      EXPECT_LE(g.survival, prev * (1 + 1e-15));
      EXPECT_GT(g.survival, 0.0);
      prev = g.survival;
    }
    EXPECT_NEAR(t[0].survival, s.at(1).a(), 1e-15);
  }
}

TEST(Pgf, ClosedFormMatchesComposition) {
  std::mt19937_64 gen(99);
  for (int rep = 0; rep < 10; ++rep) {
    const auto laws = random_laws(gen, 12);
    const OffspringSchedule s(laws);
    std::vector<std::array<double, 2>> ap;
    for (int n = 1; n <= 12; ++n) {
      ap.push_back({laws[n - 1].a(), laws[n - 1].p()});
      for (double x : {0.0, 0.3, 0.77, 0.999})
        EXPECT_NEAR(pgf_eval(s, n, x), oracle::composed_pgf(ap, x), 1e-12);
    }
  }
}

TEST(Pgf, Examples) {
  EXPECT_EQ(pgf_eval(critical(), 4, 1.0), 1.0);
  EXPECT_NEAR(pgf_eval(critical(), 4, 0.0), 0.8, 1e-15);
  EXPECT_THROW(pgf_eval(critical(), 4, 1.5), std::invalid_argument);
}

TEST(Conditioned, PmfExamplesAndTail) {
  EXPECT_EQ(conditioned_pmf(0.0, 1), 1.0);
  EXPECT_EQ(conditioned_pmf(0.0, 2), 0.0);
  EXPECT_NEAR(conditioned_pmf(3.0, 1), 0.25, 1e-15);
  EXPECT_NEAR(conditioned_pmf(3.0, 2), 0.1875, 1e-15);
  for (double B : {0.5, 3.0, 40.0}) {
    double s = 0.0;
    for (std::uint64_t k = 1; k <= 200; ++k) {
      s += conditioned_pmf(B, k);
      ASSERT_NEAR(s, 1.0 - std::pow(B / (1 + B), static_cast<double>(k)), 1e-12);
      ASSERT_NEAR(ConditionedLaw{B}.cdf(static_cast<double>(k)), s, 1e-12);
    }
  }
}

TEST(Conditioned, MeanBySeries) {
  for (double B : {0.0, 1.0, 7.5, 100.0}) {
    double mean = 0.0, tail = 1.0;
    for (std::uint64_t k = 1; tail > 1e-14; ++k) {
      const double pk = conditioned_pmf(B, k);
      mean += static_cast<double>(k) * pk;
      tail -= pk;
      if (k > 100000) break;
    }
    EXPECT_NEAR(mean, ConditionedLaw{B}.mean(), 1e-9 * (1 + B));
  }
}

TEST(Conditioned, ScaledLawApproachesExponential) {
  auto dist = [](double B) {
    double worst = 0.0;
    for (double z = 0.0; z < 8.0; z += 0.01) worst = std::max(worst, std::abs(ConditionedLaw{B}.scaled_cdf(z) + std::expm1(-z)));
    return worst;
  };
  const auto t = aggregate_table(critical(), 1000);
  EXPECT_LT(dist(t[999].B), dist(t[9].B));
}

TEST(Environment, Classification) {
  const OffspringSchedule super([](std::uint64_t n) { return ZmgParams(0.5 * (1 + 1.0 / n), 0.5); });
  EXPECT_EQ(classify_environment(super, 200), Environment::Supercritical);
  EXPECT_EQ(classify_environment(critical(), 50), Environment::Critical);
  const double m = std::exp(-1.0);
  const OffspringSchedule sub(std::vector<ZmgParams>{ZmgParams(m * 0.5, 0.5)});
  EXPECT_EQ(classify_environment(sub, 50), Environment::Subcritical);
  EXPECT_THROW(classify_environment(sub, 5), std::invalid_argument);
}

TEST(Extinction, CriticalGeometric) {
  const auto rep = extinction_report(critical(), 100);
  EXPECT_TRUE(rep.extinction_certain_trend);
  EXPECT_TRUE(rep.B_infinite_trend);
  EXPECT_TRUE(rep.criterion_predicts_certain);
  EXPECT_TRUE(rep.consistent);
}

TEST(Extinction, SupercriticalBirthDeath) {
  std::vector<double> t;
  for (int n = 1; n <= 60; ++n) t.push_back(n);
  const auto s = bd_offspring(bd_schedule(2.0, 1.0, t));
  const auto rep = extinction_report(s, 60);
  EXPECT_FALSE(rep.extinction_certain_trend);
  EXPECT_TRUE(rep.B_infinite_trend);
  EXPECT_NEAR(rep.Q_estimate, 0.5, 1e-9);
  EXPECT_TRUE(rep.consistent);
}

TEST(Extinction, SlowExtinctionDespiteGrowingMean) {
  // p_n = a / (b_n m^n), a_n = m p_n, b_n = 1: M_n = m^n -> inf, sum r_j/M_j = inf
  const OffspringSchedule s([](std::uint64_t n) {
    const double p = 0.5 / std::pow(2.0, static_cast<double>(n));
    return ZmgParams(2.0 * p, p);
  });
  const auto rep = extinction_report(s, 200);
  EXPECT_TRUE(rep.M.tends_to_infinity());
  EXPECT_TRUE(rep.extinction_certain_trend);
  EXPECT_TRUE(rep.consistent);
}

TEST(Simulation, NoExtinctionWhenAIsOne) {
  Rng g(RngSpec{1, 2});
  const OffspringSchedule s(std::vector<ZmgParams>{ZmgParams(1.0, 0.9)});
  const Path p = simulate_path(s, 20, g, true);
  EXPECT_EQ(p.outcome, PathOutcome::Completed);
  for (auto z : p.sizes) EXPECT_GE(z, 1u);
  EXPECT_EQ(p.max_family.size(), 20u);
}

TEST(Simulation, SurvivalFrequencyCriticalGeometric) {
  constexpr int paths = 1'000'000;
  int alive = 0;
  for (int i = 0; i < paths; ++i) {
    Rng g(RngSpec{7, static_cast<std::uint64_t>(i)});
    alive += simulate_path(critical(), 4, g, false).sizes[4] > 0;
  }
  EXPECT_NEAR(static_cast<double>(alive) / paths, 0.2, 0.0013);
}

TEST(Simulation, ReproducibleAndCapped) {
  Rng a(RngSpec{3, 3}), b(RngSpec{3, 3});
  const auto pa = simulate_path(critical(), 30, a, true), pb = simulate_path(critical(), 30, b, true);
  EXPECT_EQ(pa.sizes, pb.sizes);
  EXPECT_EQ(pa.max_family, pb.max_family);
  Rng c(RngSpec{3, 4});
  const OffspringSchedule explode(std::vector<ZmgParams>{ZmgParams(1.0, 0.1)});
  EXPECT_EQ(simulate_path(explode, 50, c, false, 10000).outcome, PathOutcome::PopulationCapExceeded);
}
