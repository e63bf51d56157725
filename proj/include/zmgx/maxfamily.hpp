#pragma once

// Largest family size in generation n of the branching process, conditioned
// on Z_{n-1} > 0. Given Z_{n-1} = k the maximum family has cdf F_n(x)^k; the
// mixture over the conditioned geometric law of Z_{n-1} gives
//   H_n(x) = F_n(x) / ((1 - F_n(x)) B_{n-1} + 1).

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "asymptotics.hpp"
#include "branching.hpp"
#include "limit_laws.hpp"
#include "montecarlo.hpp"
#include "numeric.hpp"
#include "rng.hpp"
#include "zmg.hpp"

namespace zmgx {

struct MaxFamilyQuery {
  std::uint64_t n = 1;
  ZmgParams offspring;             // law of generation n
  double B_prev = 0.0;             // B_{n-1}, 0 for n = 1
  double log_B_prev = -numeric::inf;
  std::optional<double> alpha_star;  // log(a_n B_{n-1}), present when B_{n-1} > 0
};

inline MaxFamilyQuery make_maxfam_query(const OffspringSchedule& schedule, std::uint64_t n) {
  if (n < 1) throw std::invalid_argument("make_maxfam_query: n must be >= 1");
  MaxFamilyQuery q{n, schedule.at(n), 0.0, -numeric::inf, std::nullopt};
  if (n >= 2) {
    const GenerationAggregates g = aggregates(schedule, n - 1);
    q.B_prev = g.B;
    q.log_B_prev = g.log_B;
    if (g.B > 0.0 || std::isfinite(g.log_B)) q.alpha_star = q.offspring.log_a() + g.log_B;
  }
  return q;
}

inline double maxfam_cdf(const MaxFamilyQuery& q, double x) {
  if (x < 0.0) return 0.0;
  const double log_s = log_survival(q.offspring, x);  // log(1 - F_n(x))
  const double f = -std::expm1(log_s);
  if (!std::isfinite(q.log_B_prev)) return f;
  // (1 - F) B + 1 = exp(logaddexp(log S + log B, 0))
  return f * std::exp(-numeric::logaddexp(log_s + q.log_B_prev, 0.0));
}

// Limit laws of H_n as n -> infinity.
struct FiniteBLimit {
  double a = 1.0;
  double p = 0.5;
  double B = 0.0;
};
struct DivergentBLimit {
  double alpha = 0.0;  // lim log(a_n B_{n-1})
  double p = 0.5;
};
using MaxFamLimit = std::variant<FiniteBLimit, DivergentBLimit>;

inline double maxfam_limit_cdf(const MaxFamLimit& limit, double x) {
  if (x < 0.0) return 0.0;
  const double k = std::floor(x);
  return std::visit(overloaded{
                        [k](const FiniteBLimit& l) {
                          if (!(l.a > 0.0 && l.a <= 1.0) || !(l.p > 0.0 && l.p < 1.0) || l.B < 0.0)
                            throw std::invalid_argument("maxfam_limit_cdf: need 0 < a <= 1, 0 < p < 1, B >= 0");
                          const double t = l.a * std::exp(k * std::log1p(-l.p));
                          return (1.0 - t) / (1.0 + l.B * t);
                        },
                        [k](const DivergentBLimit& l) {
                          if (!(l.p >= 0.0 && l.p < 1.0))
                            throw std::invalid_argument("maxfam_limit_cdf: need 0 <= p < 1");
                          const double log_t = l.p == 0.0 ? l.alpha : l.alpha + k * std::log1p(-l.p);
                          return logistic_cdf(-log_t);
                        },
                    },
                    limit);
}

// Centered: law of p_n M_n - alpha*_n.  Uncentered: law of p_n M_n.
enum class MaxFamNormalization { Centered, Uncentered };

inline double normalized_maxfam_cdf(const MaxFamilyQuery& q, double x,
                                    MaxFamNormalization mode = MaxFamNormalization::Centered) {
  const double p = q.offspring.p();
  if (mode == MaxFamNormalization::Uncentered) return maxfam_cdf(q, x / p);
  if (!q.alpha_star) throw std::invalid_argument("normalized_maxfam_cdf: alpha* undefined when B_{n-1} = 0");
  return maxfam_cdf(q, (x + *q.alpha_star) / p);
}

// [L(gamma (x-1)), L(gamma x)], gamma = -log(1-p), envelope of
// P(M_n - C*_n <= x) with C*_n = -alpha*_n / log(1-p_n).
inline Band maxfam_oscillation_band(double p_lim, double x) {
  if (!(p_lim > 0.0 && p_lim < 1.0)) throw std::invalid_argument("maxfam_oscillation_band: p must lie in (0,1)");
  const double gamma = -std::log1p(-p_lim);
  return {logistic_cdf(gamma * (x - 1.0)), logistic_cdf(gamma * x)};
}

inline double maxfam_centering(const MaxFamilyQuery& q) {
  if (!q.alpha_star) throw std::invalid_argument("maxfam_centering: alpha* undefined when B_{n-1} = 0");
  return -*q.alpha_star / q.offspring.log_q();
}

// ---------------------------------------------------------------------------
// Monte Carlo

inline constexpr std::uint64_t kMinMaxFamPaths = 1000;
inline constexpr std::uint64_t kMinRetained = 100;

class InsufficientSurvivors : public std::runtime_error {
 public:
  InsufficientSurvivors(std::uint64_t retained, std::uint64_t paths)
      : std::runtime_error("mc_maxfam: only " + std::to_string(retained) + " of " + std::to_string(paths) +
                           " paths survive to generation n-1 (need " + std::to_string(kMinRetained) + ")"),
        retained_(retained) {}
  std::uint64_t retained() const { return retained_; }

 private:
  std::uint64_t retained_;
};

class PopulationOverflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MaxFamSample {
  std::vector<double> values;  // one per retained path, in path order
  std::uint64_t paths = 0;
  std::uint64_t retained = 0;
  EmpiricalCdf empirical() const { return EmpiricalCdf(values); }
};

// Path i uses stream base.stream + i. Paths with Z_{n-1} = 0 are discarded.
inline MaxFamSample mc_maxfam(const OffspringSchedule& schedule, std::uint64_t n, std::uint64_t paths, RngSpec base,
                              unsigned workers = 1, std::uint64_t population_cap = kDefaultPopulationCap) {
  if (n < 1) throw std::invalid_argument("mc_maxfam: n must be >= 1");
  if (paths < kMinMaxFamPaths) throw std::invalid_argument("mc_maxfam: paths must be >= 1000");
  // -1: extinct before n-1, -2: population cap exceeded
  const auto draws = run_replicates(paths, base, workers, [&](Rng& rng, std::uint64_t) -> std::int64_t {
    const Path path = simulate_path(schedule, n, rng, true, population_cap);
    if (path.outcome == PathOutcome::PopulationCapExceeded) return -2;
    if (path.sizes[n - 1] == 0) return -1;
    return static_cast<std::int64_t>(path.max_family[n - 1]);
  });
  MaxFamSample out;
  out.paths = paths;
  for (std::int64_t d : draws) {
    if (d == -2) throw PopulationOverflow("mc_maxfam: population exceeded the cap before generation n");
    if (d >= 0) out.values.push_back(static_cast<double>(d));
  }
  out.retained = out.values.size();
  if (out.retained < kMinRetained) throw InsufficientSurvivors(out.retained, paths);
  return out;
}

}  // namespace zmgx
