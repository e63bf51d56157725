#pragma once

// Finite-horizon trend classification of a sequence x_1..x_N.
//
// The slope of x_n against log n is fitted by least squares over the last
// half of the horizon; |slope| < 0.01 counts as "settles to a constant".
// Positive sequences that may tend to 0 are classified on the log scale.
// A trend is flagged inconclusive when the last quarter disagrees with the
// last half.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace zmgx {

inline constexpr double kTrendSlopeThreshold = 0.01;

enum class TrendKind { ToZero, ToInfinity, ToMinusInfinity, Constant };

inline std::string_view to_string(TrendKind k) {
  switch (k) {
    case TrendKind::ToZero: return "to_zero";
    case TrendKind::ToInfinity: return "to_infinity";
    case TrendKind::ToMinusInfinity: return "to_minus_infinity";
    case TrendKind::Constant: return "constant";
  }
  return "?";
}

struct Trend {
  TrendKind kind = TrendKind::Constant;
  double slope = 0.0;
  double limit = 0.0;  // last value when Constant, else the direction's limit
  bool inconclusive = false;

  bool tends_to_zero() const { return kind == TrendKind::ToZero; }
  bool tends_to_infinity() const { return kind == TrendKind::ToInfinity; }
  bool finite_limit() const { return kind == TrendKind::Constant || kind == TrendKind::ToZero; }
};

namespace detail {

// values[i] belongs to n = i + 1
inline double log_index_slope(std::span<const double> values, std::size_t first) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double count = static_cast<double>(values.size() - first);
  for (std::size_t i = first; i < values.size(); ++i) {
    const double x = std::log(static_cast<double>(i + 1));
    sx += x;
    sy += values[i];
    sxx += x * x;
    sxy += x * values[i];
  }
  const double denom = count * sxx - sx * sx;
  if (denom == 0.0) return 0.0;
  return (count * sxy - sx * sy) / denom;
}

inline int slope_sign(double slope) {
  if (std::abs(slope) < kTrendSlopeThreshold) return 0;
  return slope > 0 ? 1 : -1;
}

}  // namespace detail

enum class TrendScale { Linear, Log };

// Log scale: values must be positive; a negative slope means "tends to 0".
inline Trend classify_trend(std::span<const double> values, TrendScale scale) {
  if (values.size() < 4) throw std::invalid_argument("classify_trend: need at least 4 points");
  std::vector<double> y(values.begin(), values.end());
  if (scale == TrendScale::Log)
    for (double& v : y) v = std::log(v);
  for (double v : y)
    if (std::isnan(v)) throw std::invalid_argument("classify_trend: NaN in trajectory");

  // infinities (e.g. log 0) are saturated so the fit stays finite
  for (double& v : y) {
    if (v == INFINITY) v = 1e300;
    if (v == -INFINITY) v = -1e300;
  }

  const std::size_t n = y.size();
  const double half_slope = detail::log_index_slope(y, n / 2);
  const double quarter_slope = detail::log_index_slope(y, n - std::max<std::size_t>(n / 4, 2));

  Trend t;
  t.slope = half_slope;
  const int s = detail::slope_sign(half_slope);
  t.inconclusive = s != detail::slope_sign(quarter_slope);
  if (s == 0) {
    t.kind = TrendKind::Constant;
    t.limit = values.back();
  } else if (s > 0) {
    t.kind = TrendKind::ToInfinity;
    t.limit = INFINITY;
  } else {
    t.kind = scale == TrendScale::Log ? TrendKind::ToZero : TrendKind::ToMinusInfinity;
    t.limit = scale == TrendScale::Log ? 0.0 : -INFINITY;
  }
  return t;
}

}  // namespace zmgx
