#pragma once

// Exact laws of the maximum, minimum, joint (max, min) and range of a row of
// nu iid zero-modified geometric variables. nu may be as large as ~1e15, so
// every power F^nu goes through log space.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

#include "numeric.hpp"
#include "zmg.hpp"

namespace zmgx {

struct RowParams {
  std::uint64_t nu;
  ZmgParams zmg;

  RowParams(std::uint64_t count, ZmgParams law) : nu(count), zmg(law) {
    if (nu < 1) throw std::invalid_argument("RowParams: nu must be >= 1");
  }

  double nu_real() const { return static_cast<double>(nu); }
};

namespace detail {

// log F(x) for x >= 0
inline double log_cdf(const ZmgParams& z, double x) { return numeric::log1mexp(log_survival(z, x)); }

}  // namespace detail

// H(x) = F(x)^nu
inline double max_cdf(const RowParams& row, double x) {
  if (x < 0.0) return 0.0;
  const double log_f = detail::log_cdf(row.zmg, x);
  if (log_f == -numeric::inf) return 0.0;
  return std::exp(row.nu_real() * log_f);
}

// log P(M > x), accurate when P(M > x) is far below double precision of 1 - H.
inline double max_log_survival(const RowParams& row, double x) {
  if (x < 0.0) return 0.0;
  const double log_f = detail::log_cdf(row.zmg, x);
  if (log_f == -numeric::inf) return 0.0;
  return numeric::log1mexp(row.nu_real() * log_f);
}

// K(y) = 1 - (a (1-p)^{floor y})^nu
inline double min_cdf(const RowParams& row, double y) {
  if (y < 0.0) return 0.0;
  return -std::expm1(row.nu_real() * log_survival(row.zmg, y));
}

// P(M <= x, mu <= y) = F(x)^nu - (F(x) - F(y))^nu for 0 <= y < x.
inline double joint_cdf(const RowParams& row, double x, double y) {
  if (x < 0.0 || y < 0.0) return 0.0;
  const double kx = std::floor(x);
  const double ky = std::floor(y);
  if (ky >= kx) return max_cdf(row, x);
  const double log_fx = detail::log_cdf(row.zmg, x);
  if (log_fx == -numeric::inf) return 0.0;
  // F(x) - F(y) = S(y) (1 - (1-p)^{kx-ky})
  const double log_gap = log_survival(row.zmg, y) + numeric::log1mexp((kx - ky) * row.zmg.log_q());
  const double nu = row.nu_real();
  return std::exp(nu * log_fx) * -std::expm1(nu * (log_gap - log_fx));
}

// P(M - mu <= r) summed over the value m of the minimum:
//   sum_m (F(m+r) - F(m-1))^nu - (F(m+r) - F(m))^nu,   F(-1) := 0.
// The sum stops once P(mu >= m) < tail_tol, so the result is a lower bound
// within tail_tol of the exact value.
inline double range_cdf(const RowParams& row, std::uint64_t r, double tail_tol) {
  if (!(tail_tol > 0.0 && tail_tol <= 1e-8))
    throw std::invalid_argument("range_cdf: tail_tol must lie in (0, 1e-8], got " + std::to_string(tail_tol));
  const ZmgParams& z = row.zmg;
  const double nu = row.nu_real();
  const double rr = static_cast<double>(r);
  const double log_q = z.log_q();
  const double log_window_wide = numeric::log1mexp((rr + 1.0) * log_q);  // log(1 - q^{r+1})
  const double log_window = r == 0 ? -numeric::inf : numeric::log1mexp(rr * log_q);
  const double log_tol = std::log(tail_tol);

  // P(mu >= m) = exp(nu (log a + (m-1) log q)); solve for the first m below tol.
  const double m_stop = std::ceil(1.0 + (log_tol / nu - z.log_a()) / log_q);
  constexpr double kMaxTerms = 4.0e9;
  if (m_stop > kMaxTerms)
    throw std::length_error("range_cdf: truncation needs more than 4e9 terms; p too small for this tail_tol");

  numeric::CompensatedSum total;
  for (double m = 0.0;; m += 1.0) {
    double log_p_ge;  // log P(m <= X <= m+r)
    if (m == 0.0) {
      log_p_ge = detail::log_cdf(z, rr);
    } else {
      log_p_ge = z.log_a() + (m - 1.0) * log_q + log_window_wide;
    }
    const double log_p_gt = z.log_a() + m * log_q + log_window;  // log P(m < X <= m+r)
    if (log_p_ge != -numeric::inf) {
      const double lead = std::exp(nu * log_p_ge);
      const double term = log_p_gt == -numeric::inf ? lead : lead * -std::expm1(nu * (log_p_gt - log_p_ge));
      total.add(term);
    }
    // remaining mass is P(mu >= m+1)
    if (nu * (z.log_a() + m * log_q) < log_tol) break;
  }
  return std::min(1.0, total.value());
}

namespace detail {

template <class Cdf>
std::uint64_t smallest_integer_reaching(Cdf&& cdf, double q) {
  if (cdf(0.0) >= q) return 0;
  std::uint64_t lo = 0;
  std::uint64_t hi = 1;
  while (cdf(static_cast<double>(hi)) < q) {
    lo = hi;
    if (hi >= (std::uint64_t{1} << 62)) {
      hi = std::numeric_limits<std::uint64_t>::max();
      break;
    }
    hi *= 2;
  }
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (cdf(static_cast<double>(mid)) >= q)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

inline void check_level(double q, const char* who) {
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument(std::string(who) + ": q must lie in (0, 1)");
}

}  // namespace detail

// Smallest integer k with H(k) >= q.
inline std::uint64_t max_quantile(const RowParams& row, double q) {
  detail::check_level(q, "max_quantile");
  return detail::smallest_integer_reaching([&](double k) { return max_cdf(row, k); }, q);
}

// Smallest integer k with K(k) >= q.
inline std::uint64_t min_quantile(const RowParams& row, double q) {
  detail::check_level(q, "min_quantile");
  return detail::smallest_integer_reaching([&](double k) { return min_cdf(row, k); }, q);
}

}  // namespace zmgx
