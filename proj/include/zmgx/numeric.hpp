#pragma once

// Log-space helpers shared by every module.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace zmgx::numeric {

inline constexpr double inf = std::numeric_limits<double>::infinity();

// log(1 - e^x) for x <= 0. Switches branch at -log 2 (Maechler 2012).
inline double log1mexp(double x) {
  if (x >= 0.0) return -inf;
  if (x > -std::numbers::ln2) return std::log(-std::expm1(x));
  return std::log1p(-std::exp(x));
}

// log(e^x + e^y)
inline double logaddexp(double x, double y) {
  if (x == -inf) return y;
  if (y == -inf) return x;
  const double hi = std::max(x, y);
  return hi + std::log1p(std::exp(-std::abs(x - y)));
}

// (1 - p)^k for integer-valued k >= 0. Repeated multiplication is exact
// enough for short exponents; beyond that go through log1p.
inline double pow_one_minus(double p, double k) {
  if (k <= 64.0) {
    const double q = 1.0 - p;
    double out = 1.0;
    for (int i = 0; i < static_cast<int>(k); ++i) out *= q;
    return out;
  }
  return std::exp(k * std::log1p(-p));
}

// Neumaier's variant of Kahan summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace zmgx::numeric
