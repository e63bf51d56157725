#pragma once

// The limit distributions that appear for row extrema and maximum family
// sizes. Every variant is a nondecreasing right-continuous cdf; all have
// total mass 1 on the reals except the defective ones, whose deficit sits at
// +infinity.

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <type_traits>
#include <variant>

#include "numeric.hpp"

namespace zmgx {

// G(x) = exp(-e^{-x})
inline double gumbel_cdf(double x) { return std::exp(-std::exp(-x)); }

// L(x) = 1 / (1 + e^{-x})
inline double logistic_cdf(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

namespace law {

// Lambda - c
struct GumbelShift {
  double c = 0.0;
};
// max(Lambda, -alpha): G(x) for x >= -alpha, 0 below
struct TruncatedGumbel {
  double alpha = 0.0;
};
// exp(-e^alpha (1-p)^{floor x}) on x >= 0; defective when p = 0
struct DiscreteMaxLimit {
  double alpha = 0.0;
  double p = 0.0;
};
// (E - beta)^+: 1 - e^{-y-beta} on y >= 0
struct ShiftedExpPositivePart {
  double beta = 0.0;
};
// 1 - e^{-beta - rho floor y} on y >= 0; defective when rho = 0
struct ZmgMinLimit {
  double beta = 0.0;
  double rho = 0.0;
};
// V - c
struct LogisticShift {
  double c = 0.0;
};
// max(V, -alpha)
struct TruncatedLogistic {
  double alpha = 0.0;
};
// mass_at_zero at 0, the rest at +infinity
struct DefectiveTwoPoint {
  double mass_at_zero = 1.0;
};

}  // namespace law

using LimitLaw = std::variant<law::GumbelShift, law::TruncatedGumbel, law::DiscreteMaxLimit,
                              law::ShiftedExpPositivePart, law::ZmgMinLimit, law::LogisticShift,
                              law::TruncatedLogistic, law::DefectiveTwoPoint>;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

inline double limit_cdf(const LimitLaw& l, double x) {
  return std::visit(
      overloaded{
          [x](const law::GumbelShift& g) { return gumbel_cdf(x + g.c); },
          [x](const law::TruncatedGumbel& g) { return x >= -g.alpha ? gumbel_cdf(x) : 0.0; },
          [x](const law::DiscreteMaxLimit& d) {
            if (x < 0.0) return 0.0;
            const double k = std::floor(x);
            const double log_tail = d.p == 0.0 ? 0.0 : k * std::log1p(-d.p);
            return std::exp(-std::exp(d.alpha + log_tail));
          },
          [x](const law::ShiftedExpPositivePart& e) { return x < 0.0 ? 0.0 : -std::expm1(-x - e.beta); },
          [x](const law::ZmgMinLimit& z) {
            if (x < 0.0) return 0.0;
            const double lin = z.rho == 0.0 ? 0.0 : z.rho * std::floor(x);
            return -std::expm1(-z.beta - lin);
          },
          [x](const law::LogisticShift& g) { return logistic_cdf(x + g.c); },
          [x](const law::TruncatedLogistic& g) { return x >= -g.alpha ? logistic_cdf(x) : 0.0; },
          [x](const law::DefectiveTwoPoint& d) { return x < 0.0 ? 0.0 : d.mass_at_zero; },
      },
      l);
}

// Total mass on the reals.
inline double limit_mass(const LimitLaw& l) {
  return std::visit(overloaded{
                        [](const law::DiscreteMaxLimit& d) { return d.p == 0.0 ? std::exp(-std::exp(d.alpha)) : 1.0; },
                        [](const law::ZmgMinLimit& z) { return z.rho == 0.0 ? -std::expm1(-z.beta) : 1.0; },
                        [](const law::DefectiveTwoPoint& d) { return d.mass_at_zero; },
                        [](const auto&) { return 1.0; },
                    },
                    l);
}

namespace detail {

// Integer quantile of a lattice law starting from an approximate solution.
inline double settle_integer(const LimitLaw& l, double q, double approx) {
  double k = std::max(0.0, std::ceil(approx));
  while (k > 0.0 && limit_cdf(l, k - 1.0) >= q) k -= 1.0;
  while (limit_cdf(l, k) < q) k += 1.0;
  return k;
}

}  // namespace detail

// Left-continuous inverse inf{x : cdf(x) >= q}; empty when q exceeds the mass.
inline std::optional<double> limit_quantile(const LimitLaw& l, double q) {
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("limit_quantile: q must lie in (0,1)");
  if (q > limit_mass(l)) return std::nullopt;
  const double gumbel_inv = -std::log(-std::log(q));
  const double logistic_inv = std::log(q) - std::log1p(-q);
  return std::visit(
      overloaded{
          [&](const law::GumbelShift& g) -> std::optional<double> { return gumbel_inv - g.c; },
          [&](const law::TruncatedGumbel& g) -> std::optional<double> { return std::max(gumbel_inv, -g.alpha); },
          [&](const law::DiscreteMaxLimit& d) -> std::optional<double> {
            if (d.p == 0.0) return 0.0;
            // exp(-e^alpha (1-p)^k) >= q  <=>  k log(1-p) <= log(-log q) - alpha
            return detail::settle_integer(l, q, (std::log(-std::log(q)) - d.alpha) / std::log1p(-d.p));
          },
          [&](const law::ShiftedExpPositivePart& e) -> std::optional<double> {
            return std::max(0.0, -std::log1p(-q) - e.beta);
          },
          [&](const law::ZmgMinLimit& z) -> std::optional<double> {
            if (z.rho == 0.0) return 0.0;
            return detail::settle_integer(l, q, (-std::log1p(-q) - z.beta) / z.rho);
          },
          [&](const law::LogisticShift& g) -> std::optional<double> { return logistic_inv - g.c; },
          [&](const law::TruncatedLogistic& g) -> std::optional<double> { return std::max(logistic_inv, -g.alpha); },
          [&](const law::DefectiveTwoPoint&) -> std::optional<double> { return 0.0; },
      },
      l);
}

}  // namespace zmgx
