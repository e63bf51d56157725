#pragma once

// Seeded replicate harness, empirical cdfs and Kolmogorov-Smirnov machinery.
//
// Replicate i always draws from stream (seed, base_stream + i), and results
// are stored by index, so output is identical for any worker count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "extremes.hpp"
#include "rng.hpp"
#include "zmg.hpp"

namespace zmgx {

class EmpiricalCdf {
 public:
  explicit EmpiricalCdf(std::vector<double> samples) : sorted_(std::move(samples)) {
    if (sorted_.empty()) throw std::invalid_argument("EmpiricalCdf: no samples");
    std::sort(sorted_.begin(), sorted_.end());
  }

  std::size_t size() const { return sorted_.size(); }
  std::span<const double> values() const { return sorted_; }

  // F_hat(x) = #{X_i <= x} / n
  double operator()(double x) const {
    return static_cast<double>(std::upper_bound(sorted_.begin(), sorted_.end(), x) - sorted_.begin()) / n();
  }
  // F_hat(x-) = #{X_i < x} / n
  double left_limit(double x) const {
    return static_cast<double>(std::lower_bound(sorted_.begin(), sorted_.end(), x) - sorted_.begin()) / n();
  }

  friend bool operator==(const EmpiricalCdf&, const EmpiricalCdf&) = default;

 private:
  double n() const { return static_cast<double>(sorted_.size()); }
  std::vector<double> sorted_;
};

// Two-sided KS distance sup_x |F_hat(x) - F(x)| against a cdf that may have
// atoms. Both one-sided limits are compared at every distinct sample point;
// F(x-) is taken at the next representable double below x.
template <class Cdf>
double ks_distance(const EmpiricalCdf& emp, Cdf&& exact) {
  const auto v = emp.values();
  const double n = static_cast<double>(v.size());
  double worst = 0.0;
  std::size_t i = 0;
  while (i < v.size()) {
    const double x = v[i];
    std::size_t j = i;
    while (j < v.size() && v[j] == x) ++j;
    const double below = static_cast<double>(i) / n;
    const double at = static_cast<double>(j) / n;
    const double f_at = exact(x);
    const double f_below = exact(std::nextafter(x, -std::numeric_limits<double>::infinity()));
    worst = std::max({worst, std::abs(at - f_at), std::abs(below - f_below)});
    i = j;
  }
  return worst;
}

// Two-sample KS distance.
inline double ks_two_sample(const EmpiricalCdf& x, const EmpiricalCdf& y) {
  double worst = 0.0;
  for (const auto* e : {&x, &y})
    for (double v : e->values()) {
      worst = std::max(worst, std::abs(x(v) - y(v)));
      worst = std::max(worst, std::abs(x.left_limit(v) - y.left_limit(v)));
    }
  return worst;
}

// Asymptotic KS coefficient c(alpha) for alpha in {0.1, 0.05, 0.01}.
inline double ks_coefficient(double alpha) {
  if (alpha == 0.1) return 1.224;
  if (alpha == 0.05) return 1.358;
  if (alpha == 0.01) return 1.628;
  throw std::invalid_argument("ks_coefficient: alpha must be 0.1, 0.05 or 0.01");
}

inline double ks_critical_value(double alpha, std::size_t n) {
  return ks_coefficient(alpha) / std::sqrt(static_cast<double>(n));
}

inline double ks_two_sample_critical_value(double alpha, std::size_t n, std::size_t m) {
  const double nn = static_cast<double>(n), mm = static_cast<double>(m);
  return ks_coefficient(alpha) * std::sqrt((nn + mm) / (nn * mm));
}

// ---------------------------------------------------------------------------

// Runs fn(rng, i) for i in [0, count) with rng on stream (seed, base_stream + i).
template <class Fn>
auto run_replicates(std::uint64_t count, RngSpec base, unsigned workers, Fn&& fn) {
  using Result = std::invoke_result_t<Fn&, Rng&, std::uint64_t>;
  std::vector<Result> out(count);
  auto work = [&](std::uint64_t begin, std::uint64_t end) {
    for (std::uint64_t i = begin; i < end; ++i) {
      Rng rng(RngSpec{base.seed, base.stream + i});
      out[i] = fn(rng, i);
    }
  };
  workers = std::max(1u, workers);
  if (workers == 1 || count < 2) {
    work(0, count);
    return out;
  }
  std::vector<std::jthread> pool;
  const std::uint64_t chunk = (count + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::uint64_t b = std::min(count, w * chunk);
    const std::uint64_t e = std::min(count, b + chunk);
    if (b < e) pool.emplace_back(work, b, e);
  }
  pool.clear();  // join before out is returned
  return out;
}

// ---------------------------------------------------------------------------

inline constexpr std::uint64_t kDirectRowLimit = 10'000'000;

class UnsupportedCombination : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RowExtrema {
  std::uint64_t max = 0;
  std::uint64_t min = 0;
  std::optional<std::uint64_t> range;
};

// One row: nu direct draws when nu <= 1e7, otherwise max and min drawn by
// inverse transform from their exact laws (range unavailable there).
template <std::uniform_random_bit_generator G>
RowExtrema sample_row_extrema(const RowParams& row, G& g, bool want_range = true) {
  RowExtrema out;
  if (row.nu <= kDirectRowLimit) {
    out.min = std::numeric_limits<std::uint64_t>::max();
    for (std::uint64_t i = 0; i < row.nu; ++i) {
      const std::uint64_t x = sample(row.zmg, g);
      out.max = std::max(out.max, x);
      out.min = std::min(out.min, x);
    }
    if (want_range) out.range = out.max - out.min;
    return out;
  }
  if (want_range) throw UnsupportedCombination("sample_row_extrema: range needs nu <= 1e7 direct simulation");
  out.max = max_quantile(row, uniform01_open(g));
  out.min = min_quantile(row, uniform01_open(g));
  return out;
}

// Inverse-transform draw of the row maximum only; valid for any nu.
template <std::uniform_random_bit_generator G>
std::uint64_t sample_row_max_inverse(const RowParams& row, G& g) {
  return max_quantile(row, uniform01_open(g));
}

}  // namespace zmgx
