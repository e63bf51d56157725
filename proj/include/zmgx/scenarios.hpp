#pragma once

// Parameter sequences that satisfy the hypotheses of the limit results.
//
//   Power:      a_n = e^{-alpha} nu_n^{-delta}, p_n = gamma nu_n^{-zeta}
//   LogPower:   a_n = e^{-alpha} nu_n^{-delta}, p_n = A (log nu_n)^{-zeta}
//   Table:      explicit rows, repeated from the last one past the end
//   BirthDeath: linear birth-death process (rates lambda, mu) observed at
//               times t_1 < t_2 < ..., t_0 = 0
//
// For Power/LogPower nu_n = base^n. Any formula giving a > 1 or p outside
// (0,1) is an error, never clamped.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "branching.hpp"
#include "extremes.hpp"
#include "limit_laws.hpp"
#include "zmg.hpp"

namespace zmgx {

namespace scenario {

struct Power {
  double alpha = 0.0;
  double delta = 0.0;
  double gamma = 1.0;
  double zeta = 1.0;
  std::uint64_t nu_base = 2;
};

struct LogPower {
  double alpha = 0.0;
  double delta = 0.0;
  double A = 1.0;
  double zeta = 1.0;
  std::uint64_t nu_base = 2;
};

struct Table {
  std::vector<RowParams> rows;
};

struct BirthDeath {
  double lambda = 1.0;
  double mu = 1.0;
  std::vector<double> times;
};

}  // namespace scenario

using ScenarioSpec = std::variant<scenario::Power, scenario::LogPower, scenario::Table, scenario::BirthDeath>;

// base^n, rejecting anything beyond 2^63.
inline std::uint64_t nu_for_index(std::uint64_t base, std::uint64_t n) {
  if (base < 2) throw std::invalid_argument("nu_base must be >= 2");
  std::uint64_t nu = 1;
  for (std::uint64_t i = 0; i < n; ++i) {
    if (nu > (std::uint64_t{1} << 63) / base)
      throw std::invalid_argument("nu = base^n overflows 2^63 at n = " + std::to_string(n));
    nu *= base;
  }
  return nu;
}

namespace detail {

inline void check_indices(std::span<const std::uint64_t> indices) {
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 1) throw std::invalid_argument("scenario indices must be >= 1");
    if (i > 0 && indices[i] <= indices[i - 1]) throw std::invalid_argument("scenario indices must increase");
  }
}

inline RowParams make_power_row(std::uint64_t nu, double alpha, double delta, double p, std::uint64_t n) {
  const double log_a = -alpha - delta * std::log(static_cast<double>(nu));
  if (log_a > 0.0) throw std::invalid_argument("scenario gives a > 1 at n = " + std::to_string(n));
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("scenario gives p outside (0,1) at n = " + std::to_string(n));
  return RowParams(nu, ZmgParams::from_log_a(log_a, p));
}

}  // namespace detail

inline void validate(const scenario::Power& s) {
  if (s.delta < 0.0) throw std::invalid_argument("power scenario: delta must be >= 0");
  if (!(s.gamma > 0.0)) throw std::invalid_argument("power scenario: gamma must be > 0");
  if (!(s.zeta > 0.0)) throw std::invalid_argument("power scenario: zeta must be > 0");
}

inline void validate(const scenario::LogPower& s) {
  if (s.delta < 0.0 || !(s.delta < 1.0)) throw std::invalid_argument("log-power scenario: delta must lie in [0,1)");
  if (!(s.A > 0.0)) throw std::invalid_argument("log-power scenario: A must be > 0");
  if (!(s.zeta > 0.0)) throw std::invalid_argument("log-power scenario: zeta must be > 0");
}

inline void validate(const scenario::Table& s) {
  if (s.rows.empty()) throw std::invalid_argument("table scenario: no rows");
}

inline void validate(const scenario::BirthDeath& s) {
  if (!(s.lambda > 0.0)) throw std::invalid_argument("birth-death scenario: lambda must be > 0");
  if (!(s.mu >= 0.0)) throw std::invalid_argument("birth-death scenario: mu must be >= 0");
  double prev = 0.0;
  for (double t : s.times) {
    if (!(t > prev)) throw std::invalid_argument("birth-death scenario: times must be positive and strictly increasing");
    prev = t;
  }
}

inline void validate(const ScenarioSpec& spec) {
  std::visit([](const auto& s) { validate(s); }, spec);
}

inline std::vector<RowParams> generate_rows(const ScenarioSpec& spec, std::span<const std::uint64_t> indices) {
  validate(spec);
  detail::check_indices(indices);
  std::vector<RowParams> rows;
  rows.reserve(indices.size());
  std::visit(overloaded{
                 [&](const scenario::Power& s) {
                   for (std::uint64_t n : indices) {
                     const std::uint64_t nu = nu_for_index(s.nu_base, n);
                     const double p = s.gamma * std::exp(-s.zeta * std::log(static_cast<double>(nu)));
                     rows.push_back(detail::make_power_row(nu, s.alpha, s.delta, p, n));
                   }
                 },
                 [&](const scenario::LogPower& s) {
                   for (std::uint64_t n : indices) {
                     const std::uint64_t nu = nu_for_index(s.nu_base, n);
                     const double p = s.A * std::pow(std::log(static_cast<double>(nu)), -s.zeta);
                     rows.push_back(detail::make_power_row(nu, s.alpha, s.delta, p, n));
                   }
                 },
                 [&](const scenario::Table& s) {
                   for (std::uint64_t n : indices) rows.push_back(s.rows[std::min<std::size_t>(n, s.rows.size()) - 1]);
                 },
                 [&](const scenario::BirthDeath&) {
                   throw std::invalid_argument("birth-death scenarios define an offspring schedule, not array rows");
                 },
             },
             spec);
  return rows;
}

// Rows for n = first..last.
inline std::vector<RowParams> generate_rows(const ScenarioSpec& spec, std::uint64_t first, std::uint64_t last) {
  std::vector<std::uint64_t> idx;
  for (std::uint64_t n = first; n <= last; ++n) idx.push_back(n);
  return generate_rows(spec, idx);
}

// ---------------------------------------------------------------------------
// Birth-death sampling

struct BdGeneration {
  double d;      // t_n - t_{n-1}
  double p;      // p_n
  double a;      // a_n = m_n p_n
  double log_a;  // log a_n, exact even when a_n rounds to 1
  double m;      // e^{(lambda-mu) d_n}
  double log_M;  // (lambda-mu) t_n
  double B;      // lambda (M_n - 1)/(lambda - mu), or lambda t_n when lambda = mu
};

inline std::vector<BdGeneration> bd_schedule(double lambda, double mu, std::span<const double> times) {
  validate(scenario::BirthDeath{lambda, mu, std::vector<double>(times.begin(), times.end())});
  std::vector<BdGeneration> out;
  out.reserve(times.size());
  double prev = 0.0;
  const double rate = lambda - mu;
  for (double t : times) {
    BdGeneration g{};
    g.d = t - prev;
    prev = t;
    if (rate == 0.0) {
      g.p = 1.0 / (1.0 + lambda * g.d);
      g.log_a = -std::log1p(lambda * g.d);
      g.m = 1.0;
      g.log_M = 0.0;
      g.B = lambda * t;
    } else {
      g.m = std::exp(rate * g.d);
      const double denom = lambda * g.m - mu;
      g.p = rate / denom;
      // 1 - a = mu (m - 1) / (lambda m - mu)
      g.log_a = std::log1p(-mu * std::expm1(rate * g.d) / denom);
      g.log_M = rate * t;
      g.B = lambda * std::expm1(rate * t) / rate;
    }
    g.a = std::exp(g.log_a);
    out.push_back(g);
  }
  return out;
}

inline OffspringSchedule bd_offspring(std::span<const BdGeneration> gens) {
  std::vector<ZmgParams> laws;
  laws.reserve(gens.size());
  for (const auto& g : gens) laws.push_back(ZmgParams::from_log_a(g.log_a, g.p));
  return OffspringSchedule(std::move(laws));
}

// Offspring schedule of any scenario, for generations 1..horizon.
inline OffspringSchedule offspring_schedule(const ScenarioSpec& spec, std::uint64_t horizon) {
  if (const auto* bd = std::get_if<scenario::BirthDeath>(&spec)) {
    if (bd->times.size() < horizon) throw std::invalid_argument("birth-death scenario: fewer times than horizon");
    const auto gens = bd_schedule(bd->lambda, bd->mu, bd->times);
    return bd_offspring(gens);
  }
  std::vector<ZmgParams> laws;
  for (const auto& row : generate_rows(spec, 1, horizon)) laws.push_back(row.zmg);
  return OffspringSchedule(std::move(laws));
}

struct BdDiscrepancy {
  double B_relative = 0.0;  // max_n |B_closed - B_rec| / max(1, |B_closed|)
  double log_M_absolute = 0.0;
  double max() const { return std::max(B_relative, log_M_absolute); }
};

// Closed forms against the generic branching recurrences.
inline BdDiscrepancy bd_crosscheck(double lambda, double mu, std::span<const double> times) {
  const auto gens = bd_schedule(lambda, mu, times);
  const auto table = aggregate_table(bd_offspring(gens), gens.size());
  BdDiscrepancy out;
  for (std::size_t i = 0; i < gens.size(); ++i) {
    const double b = gens[i].B;
    out.B_relative = std::max(out.B_relative, std::abs(b - table[i].B) / std::max(1.0, std::abs(b)));
    out.log_M_absolute = std::max(out.log_M_absolute, std::abs(gens[i].log_M - table[i].log_M));
  }
  return out;
}

}  // namespace zmgx
