#pragma once

// Zero-modified geometric law:
//   P(X = 0) = 1 - a,   P(X = j) = a p (1-p)^{j-1}  (j >= 1),
// with 0 < a <= 1 and 0 < p < 1. The standard geometric law is a = 1 - p.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include "numeric.hpp"
#include "rng.hpp"

namespace zmgx {

class ZmgParams {
 public:
  ZmgParams(double a, double p) : a_(a), log_a_(std::log(a)), p_(p) { validate(); }

  // Construct from log(a). Keeps a close to 1 (a = e^{-beta/nu}) exact in
  // everything that only needs log a or 1 - a.
  static ZmgParams from_log_a(double log_a, double p) {
    if (!(log_a <= 0.0) || !std::isfinite(log_a))
      throw std::invalid_argument("ZmgParams: log(a) must be finite and <= 0, got " + std::to_string(log_a));
    ZmgParams out;
    out.a_ = std::exp(log_a);
    out.log_a_ = log_a;
    out.p_ = p;
    out.validate();
    return out;
  }

  double a() const { return a_; }
  double p() const { return p_; }
  double log_a() const { return log_a_; }
  // 1 - a without cancellation
  double one_minus_a() const { return -std::expm1(log_a_); }
  // log(1 - p)
  double log_q() const { return std::log1p(-p_); }
  double mean() const { return a_ / p_; }

  friend bool operator==(const ZmgParams&, const ZmgParams&) = default;

 private:
  ZmgParams() = default;

  void validate() const {
    if (!(a_ > 0.0 && a_ <= 1.0))
      throw std::invalid_argument("ZmgParams: a must lie in (0, 1], got " + std::to_string(a_));
    if (!(p_ > 0.0 && p_ < 1.0))
      throw std::invalid_argument("ZmgParams: p must lie in (0, 1), got " + std::to_string(p_));
  }

  double a_ = 1.0;
  double log_a_ = 0.0;
  double p_ = 0.5;
};

inline double pmf(const ZmgParams& z, std::uint64_t j) {
  if (j == 0) return z.one_minus_a();
  return z.a() * z.p() * numeric::pow_one_minus(z.p(), static_cast<double>(j - 1));
}

// P(X > x) = a (1-p)^{floor x} for x >= 0.
inline double survival(const ZmgParams& z, double x) {
  if (x < 0.0) return 1.0;
  return z.a() * numeric::pow_one_minus(z.p(), std::floor(x));
}

inline double cdf(const ZmgParams& z, double x) {
  if (x < 0.0) return 0.0;
  return 1.0 - survival(z, x);
}

// log P(X > x), never formed from 1 - cdf. Returns 0 for x < 0.
inline double log_survival(const ZmgParams& z, double x) {
  if (x < 0.0) return 0.0;
  const double k = std::floor(x);
  return k == 0.0 ? z.log_a() : z.log_a() + k * z.log_q();
}

// Two uniforms per draw regardless of outcome: the first decides the zero
// class, the second inverts the geometric tail on {1, 2, ...}.
template <std::uniform_random_bit_generator G>
std::uint64_t sample(const ZmgParams& z, G& g) {
  const double u_zero = uniform01(g);
  const double u_tail = uniform01_open_below(g);
  if (u_zero >= z.a()) return 0;
  const double k = std::ceil(std::log(u_tail) / z.log_q());
  if (!(k >= 1.0)) return 1;
  if (k >= 0x1.0p64) return std::numeric_limits<std::uint64_t>::max();
  return static_cast<std::uint64_t>(k);
}

}  // namespace zmgx
