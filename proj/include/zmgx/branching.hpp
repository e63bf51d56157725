#pragma once

// Branching process Z_n = sum_{i <= Z_{n-1}} X_i(n), Z_0 = 1, with
// generation-n offspring law ZMG(a_n, p_n).
//
// The offspring pgf f_n(s) = ((1-s) R_n + s) / ((1-s) r_n + 1) is a Mobius
// map, so the n-fold composition keeps the same shape:
//   phi_n(s) = ((1-s) A_n + s) / ((1-s) B_n + 1),
//   A_n = M_n sum_j R_j / M_j,  B_n = M_n sum_j r_j / M_j,  M_n = prod m_j,
// with r_j = 1/p_j - 1 = (1-p_j)/p_j and R_j = 1/p_j - m_j = (1-a_j)/p_j.
// M_n is carried as log M_n and the two sums are compensated, since
// schedules mixing very large and very small M_j otherwise lose the
// survival probability.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <random>
#include <span>
#include <stdexcept>
#include <string_view>
#include <utility>
#include <vector>

#include "numeric.hpp"
#include "trend.hpp"
#include "zmg.hpp"

namespace zmgx {

// Generation n (1-based) offspring laws. A finite list repeats its last
// entry beyond its end.
class OffspringSchedule {
 public:
  using Generator = std::function<ZmgParams(std::uint64_t)>;

  explicit OffspringSchedule(std::vector<ZmgParams> generations) {
    if (generations.empty()) throw std::invalid_argument("OffspringSchedule: empty generation list");
    auto shared = std::make_shared<const std::vector<ZmgParams>>(std::move(generations));
    gen_ = [shared](std::uint64_t n) { return (*shared)[std::min<std::uint64_t>(n, shared->size()) - 1]; };
  }

  explicit OffspringSchedule(Generator gen) : gen_(std::move(gen)) {
    if (!gen_) throw std::invalid_argument("OffspringSchedule: null generator");
  }

  ZmgParams at(std::uint64_t n) const {
    if (n < 1) throw std::out_of_range("OffspringSchedule: generations are numbered from 1");
    return gen_(n);
  }

 private:
  Generator gen_;
};

struct GenerationAggregates {
  std::uint64_t n = 0;
  double m = 1.0;  // a_n / p_n
  double r = 0.0;  // 1/p_n - 1
  double R = 0.0;  // 1/p_n - m_n
  double log_M = 0.0;
  double log_A = -numeric::inf;
  double log_B = -numeric::inf;
  double A = 0.0;
  double B = 0.0;
  double M = 1.0;
  double survival = 1.0;  // P(Z_n > 0) = M_n / (1 + B_n)
  double log_survival = 0.0;
  bool overflow = false;  // M, A or B not representable; log fields remain valid
};

namespace detail {

class AggregateAccumulator {
 public:
  GenerationAggregates step(const ZmgParams& z) {
    ++n_;
    const double log_p = std::log(z.p());
    const double log_m = z.log_a() - log_p;
    log_M_.add(log_m);
    const double log_M = log_M_.value();
    const double log_r = z.log_q() - log_p;
    sum_r_.add(std::exp(log_r - log_M));
    if (z.log_a() != 0.0) sum_R_.add(std::exp(std::log(z.one_minus_a()) - log_p - log_M));

    GenerationAggregates g;
    g.n = n_;
    g.m = z.mean();
    g.r = std::exp(log_r);
    g.R = z.one_minus_a() / z.p();
    g.log_M = log_M;
    const double s_r = sum_r_.value();
    const double s_R = sum_R_.value();
    g.log_B = log_M + std::log(s_r);
    g.log_A = s_R > 0.0 ? log_M + std::log(s_R) : -numeric::inf;
    g.M = std::exp(log_M);
    g.B = std::exp(g.log_B);
    g.A = std::exp(g.log_A);
    // P(Z_n > 0) = [1/M_n + sum r_j/M_j]^{-1}
    g.log_survival = -numeric::logaddexp(-log_M, std::log(s_r));
    g.survival = std::exp(g.log_survival);
    g.overflow = !std::isfinite(g.M) || !std::isfinite(g.B) || !std::isfinite(g.A);
    return g;
  }

 private:
  std::uint64_t n_ = 0;
  numeric::CompensatedSum log_M_;
  numeric::CompensatedSum sum_r_;
  numeric::CompensatedSum sum_R_;
};

}  // namespace detail

// Aggregates for generations 1..horizon; element i is generation i + 1.
inline std::vector<GenerationAggregates> aggregate_table(const OffspringSchedule& schedule, std::uint64_t horizon) {
  detail::AggregateAccumulator acc;
  std::vector<GenerationAggregates> out;
  out.reserve(horizon);
  for (std::uint64_t n = 1; n <= horizon; ++n) out.push_back(acc.step(schedule.at(n)));
  return out;
}

inline GenerationAggregates aggregates(const OffspringSchedule& schedule, std::uint64_t n) {
  if (n < 1) throw std::invalid_argument("aggregates: n must be >= 1");
  detail::AggregateAccumulator acc;
  GenerationAggregates g;
  for (std::uint64_t k = 1; k <= n; ++k) g = acc.step(schedule.at(k));
  return g;
}

// phi_n(s) = 1 - (1-s) M_n / ((1-s) B_n + 1), formed in logs.
inline double pgf_eval(const GenerationAggregates& g, double s) {
  if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("pgf_eval: s must lie in [0,1]");
  if (s == 1.0) return 1.0;
  const double log_1ms = std::log1p(-s);
  const double log_tail = log_1ms + g.log_M - numeric::logaddexp(log_1ms + g.log_B, 0.0);
  return -std::expm1(log_tail);
}

inline double pgf_eval(const OffspringSchedule& schedule, std::uint64_t n, double s) {
  return pgf_eval(aggregates(schedule, n), s);
}

// ---------------------------------------------------------------------------
// Conditioned law (Z_n | Z_n > 0): pgf s / ((1-s) B + 1), i.e. a geometric
// law on {1, 2, ...} with mean 1 + B.

inline double conditioned_pmf(double B, std::uint64_t k) {
  if (B < 0.0) throw std::invalid_argument("conditioned_pmf: B must be >= 0");
  if (k < 1) throw std::invalid_argument("conditioned_pmf: k must be >= 1");
  if (B == 0.0) return k == 1 ? 1.0 : 0.0;
  const double kk = static_cast<double>(k);
  return std::exp((kk - 1.0) * std::log(B) - kk * std::log1p(B));
}

struct ConditionedLaw {
  double B = 0.0;

  double pmf(std::uint64_t k) const { return conditioned_pmf(B, k); }

  // P(Z <= k) = 1 - (B/(1+B))^k
  double cdf(double k) const {
    if (k < 1.0) return 0.0;
    if (B == 0.0) return 1.0;
    return -std::expm1(std::floor(k) * -std::log1p(1.0 / B));
  }

  double mean() const { return 1.0 + B; }

  // P(Z / B <= z); tends to 1 - e^{-z} as B -> infinity.
  double scaled_cdf(double z) const { return cdf(z * B); }
};

// ---------------------------------------------------------------------------
// Finite-horizon classifications

enum class Environment { Supercritical, Critical, Subcritical, NotWeaklyVarying };

inline std::string_view to_string(Environment e) {
  switch (e) {
    case Environment::Supercritical: return "supercritical";
    case Environment::Critical: return "critical";
    case Environment::Subcritical: return "subcritical";
    case Environment::NotWeaklyVarying: return "not_weakly_varying";
  }
  return "?";
}

// Partial sums of (m_j - 1) and log M_n must agree on the direction; any
// disagreement or an inconclusive fit means M_n has no visible limit.
inline Environment classify_environment(const OffspringSchedule& schedule, std::uint64_t horizon) {
  if (horizon < 10) throw std::invalid_argument("classify_environment: horizon must be >= 10");
  std::vector<double> partial, log_M;
  numeric::CompensatedSum s, lm;
  for (std::uint64_t n = 1; n <= horizon; ++n) {
    const ZmgParams z = schedule.at(n);
    s.add(z.mean() - 1.0);
    lm.add(z.log_a() - std::log(z.p()));
    partial.push_back(s.value());
    log_M.push_back(lm.value());
  }
  const Trend ts = classify_trend(partial, TrendScale::Linear);
  const Trend tm = classify_trend(log_M, TrendScale::Linear);
  if (ts.inconclusive || tm.inconclusive || ts.kind != tm.kind) return Environment::NotWeaklyVarying;
  switch (ts.kind) {
    case TrendKind::ToInfinity: return Environment::Supercritical;
    case TrendKind::ToMinusInfinity: return Environment::Subcritical;
    default: return Environment::Critical;
  }
}

struct ExtinctionReport {
  Trend survival;                 // P(Z_n > 0), log scale
  Trend B;                        // B_n, log scale
  Trend M;                        // M_n, log scale
  Trend sum_r_over_M;             // sum_j r_j / M_j, log scale
  bool extinction_certain_trend;  // survival -> 0, i.e. Q -> 1
  double Q_estimate;              // 1 - P(Z_horizon > 0)
  bool B_infinite_trend;
  bool criterion_predicts_certain;  // M_n -> 0 and/or sum r_j/M_j -> inf
  bool consistent;                  // extinction trend agrees with the criterion
};

inline ExtinctionReport extinction_report(const OffspringSchedule& schedule, std::uint64_t horizon) {
  if (horizon < 10) throw std::invalid_argument("extinction_report: horizon must be >= 10");
  const auto table = aggregate_table(schedule, horizon);
  std::vector<double> log_surv, log_B, log_M, log_S;
  for (const auto& g : table) {
    log_surv.push_back(g.log_survival);
    log_B.push_back(g.log_B);
    log_M.push_back(g.log_M);
    log_S.push_back(g.log_B - g.log_M);
  }
  // log-scale trends built from log fields directly, so nothing overflows
  auto from_logs = [](const std::vector<double>& logs) {
    Trend t = classify_trend(logs, TrendScale::Linear);
    if (t.kind == TrendKind::ToMinusInfinity) {
      t.kind = TrendKind::ToZero;
      t.limit = 0.0;
    } else if (t.kind == TrendKind::Constant) {
      t.limit = std::exp(logs.back());
    }
    return t;
  };
  ExtinctionReport rep;
  rep.survival = from_logs(log_surv);
  rep.B = from_logs(log_B);
  rep.M = from_logs(log_M);
  rep.sum_r_over_M = from_logs(log_S);
  rep.extinction_certain_trend = rep.survival.tends_to_zero();
  rep.Q_estimate = -std::expm1(table.back().log_survival);
  rep.B_infinite_trend = rep.B.tends_to_infinity();
  rep.criterion_predicts_certain = rep.M.tends_to_zero() || rep.sum_r_over_M.tends_to_infinity();
  rep.consistent = rep.extinction_certain_trend == rep.criterion_predicts_certain;
  return rep;
}

// ---------------------------------------------------------------------------
// Path simulation

enum class PathOutcome { Completed, PopulationCapExceeded };

inline constexpr std::uint64_t kDefaultPopulationCap = 1'000'000'000;

struct Path {
  std::vector<std::uint64_t> sizes;       // Z_0 .. Z_{generations}
  std::vector<std::uint64_t> max_family;  // entry n-1 is the max family size of generation n (0 if Z_{n-1} = 0)
  PathOutcome outcome = PathOutcome::Completed;
};

template <std::uniform_random_bit_generator G>
Path simulate_path(const OffspringSchedule& schedule, std::uint64_t n_max, G& rng, bool track_families,
                   std::uint64_t population_cap = kDefaultPopulationCap) {
  if (n_max < 1) throw std::invalid_argument("simulate_path: n_max must be >= 1");
  Path path;
  path.sizes.reserve(n_max + 1);
  path.sizes.push_back(1);
  if (track_families) path.max_family.reserve(n_max);
  for (std::uint64_t n = 1; n <= n_max; ++n) {
    const std::uint64_t parents = path.sizes.back();
    const ZmgParams law = schedule.at(n);
    std::uint64_t total = 0;
    std::uint64_t largest = 0;
    for (std::uint64_t i = 0; i < parents; ++i) {
      const std::uint64_t x = sample(law, rng);
      largest = std::max(largest, x);
      if (x > population_cap - total) {
        path.outcome = PathOutcome::PopulationCapExceeded;
        return path;
      }
      total += x;
    }
    path.sizes.push_back(total);
    if (track_families) path.max_family.push_back(largest);
  }
  return path;
}

}  // namespace zmgx
