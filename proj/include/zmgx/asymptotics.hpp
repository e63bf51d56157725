#pragma once

// Normalizing constants, normalized exact laws, oscillation bands, the
// large-deviation ratio, sup-distance diagnostics and finite-horizon regime
// classification for row extrema.

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "extremes.hpp"
#include "limit_laws.hpp"
#include "trend.hpp"

namespace zmgx {

struct Normalizers {
  double alpha_n;  // log(nu a)
  double beta_n;   // -nu log a
  double C_n;      // -alpha_n / log(1-p)
};

inline Normalizers normalizers(const RowParams& row) {
  const double alpha = std::log(row.nu_real()) + row.zmg.log_a();
  const double beta = row.zmg.log_a() == 0.0 ? 0.0 : -row.nu_real() * row.zmg.log_a();
  return {alpha, beta, -alpha / row.zmg.log_q()};
}

// Exact law of p M - alpha_n.
inline double normalized_max_cdf(const RowParams& row, double x) {
  const double alpha = normalizers(row).alpha_n;
  return max_cdf(row, (x + alpha) / row.zmg.p());
}

// Exact law of nu p mu.
inline double normalized_min_cdf(const RowParams& row, double y) {
  return min_cdf(row, y / (row.nu_real() * row.zmg.p()));
}

// Exact joint law of (p M - log nu, nu p mu), the pair whose limit is
// (Lambda, (E - beta)^+) with independent components.
inline double normalized_joint_cdf(const RowParams& row, double x, double y) {
  const double nu = row.nu_real();
  const double p = row.zmg.p();
  return joint_cdf(row, (x + std::log(nu)) / p, y / (nu * p));
}

// ---------------------------------------------------------------------------
// Sup-distance over a quantile grid

inline const std::vector<double>& default_quantile_levels() {
  static const std::vector<double> levels{0.001, 0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5,
                                          0.6,   0.7,  0.8,  0.9, 0.95, 0.99, 0.999};
  return levels;
}

struct GridSpec {
  std::vector<double> levels = default_quantile_levels();
  std::vector<double> extra_points;
};

// Quantiles of `limit` at each level it reaches, then the extras; sorted.
inline std::vector<double> grid_points(const LimitLaw& limit, const GridSpec& grid) {
  std::vector<double> pts;
  for (double q : grid.levels)
    if (auto x = limit_quantile(limit, q)) pts.push_back(*x);
  pts.insert(pts.end(), grid.extra_points.begin(), grid.extra_points.end());
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

using CdfFn = std::function<double(double)>;

inline double sup_distance(const CdfFn& exact, const LimitLaw& limit, std::span<const double> points) {
  if (points.empty()) throw std::invalid_argument("sup_distance: empty grid");
  double worst = 0.0;
  for (double x : points) worst = std::max(worst, std::abs(exact(x) - limit_cdf(limit, x)));
  return worst;
}

inline double sup_distance(const CdfFn& exact, const LimitLaw& limit, const GridSpec& grid) {
  const auto pts = grid_points(limit, grid);
  return sup_distance(exact, limit, std::span<const double>(pts));
}

// ---------------------------------------------------------------------------
// Oscillation bands

struct Band {
  double low;
  double high;
};

// Envelope of P(M_n - C_n <= x) when p_n -> p in (0,1) and alpha_n -> inf:
// [G(gamma (x-1)), G(gamma x)], gamma = -log(1-p).
inline Band max_oscillation_band(double p_lim, double x) {
  if (!(p_lim > 0.0 && p_lim < 1.0)) throw std::invalid_argument("max_oscillation_band: p must lie in (0,1)");
  const double gamma = -std::log1p(-p_lim);
  return {gumbel_cdf(gamma * (x - 1.0)), gumbel_cdf(gamma * x)};
}

// Members of the minimum band exactly as displayed: low = 1 - e^{-y-beta-xi},
// high = 1 - e^{-y-beta}. Note low >= high. The envelope that actually holds
// is min_oscillation_envelope.
inline Band min_oscillation_band(double beta, double xi, double y) {
  if (beta < 0.0 || !(xi > 0.0) || y < 0.0)
    throw std::invalid_argument("min_oscillation_band: need beta >= 0, xi > 0, y >= 0");
  return {-std::expm1(-y - beta - xi), -std::expm1(-y - beta)};
}

// For nu_n p_n -> xi and beta_n -> beta, P(nu_n p_n mu_n <= y) tends to
// 1 - exp(-beta - xi floor(y/xi)), which lies in [1 - e^{-y-beta+xi}, 1 - e^{-y-beta}].
inline Band min_oscillation_envelope(double beta, double xi, double y) {
  if (beta < 0.0 || !(xi > 0.0) || y < 0.0)
    throw std::invalid_argument("min_oscillation_envelope: need beta >= 0, xi > 0, y >= 0");
  return {std::max(0.0, -std::expm1(-y - beta + xi)), -std::expm1(-y - beta)};
}

// ---------------------------------------------------------------------------

// log P(M > x_n) / (alpha_n p) at x_n = (x + alpha_n) / p.
inline double large_deviation_ratio(const RowParams& row, double x) {
  const double alpha = normalizers(row).alpha_n;
  if (!(alpha > 0.0)) throw std::invalid_argument("large_deviation_ratio: needs alpha_n = log(nu a) > 0");
  const double p = row.zmg.p();
  return max_log_survival(row, (x + alpha) / p) / (alpha * p);
}

// ---------------------------------------------------------------------------
// Finite-horizon regime classification

struct RegimeReport {
  Trend nu_a;             // nu a
  Trend alpha;            // log(nu a)
  Trend p;                // p
  Trend alpha_p;          // alpha_n p_n
  Trend a_pow_nu;         // a^nu
  Trend nu_one_minus_a;   // nu (1 - a)
  Trend nu_p;             // nu p
  Trend beta;             // -nu log a
  std::vector<std::string> applicable;
  std::vector<LimitLaw> max_limits;
  std::vector<LimitLaw> min_limits;
  bool inconclusive = false;

  bool has(const std::string& name) const {
    return std::find(applicable.begin(), applicable.end(), name) != applicable.end();
  }
};

// Reads the trajectories of rows[0..horizon) and lists which limit results
// have their hypotheses met on this horizon:
//   max_to_zero          nu a -> 0, M -> 0 in probability
//   max_discrete_limit   alpha_n -> alpha, p_n -> p   (defective when p = 0)
//   max_diverges         alpha_n -> inf, limsup p_n < 1
//   max_gumbel           p_n -> 0, alpha_n p_n -> 2c, alpha_n -> inf
//   max_gumbel_truncated p_n -> 0, alpha_n -> alpha
//   max_oscillating_band alpha_n -> inf, p_n -> p in (0,1)
//   min_to_zero          a^nu -> 0
//   min_zmg_limit        nu(1-a) -> beta, nu p -> rho, both finite
//   min_diverges         nu(1-a) -> 0, nu p -> 0
//   min_exponential      nu p -> 0, beta_n -> beta finite
//   min_oscillating_band nu p -> xi in (0,inf), beta_n -> beta
//   joint_independent    nu p -> 0, beta_n -> beta finite
inline RegimeReport classify_regimes(std::span<const RowParams> rows, std::size_t horizon) {
  if (horizon < 10) throw std::invalid_argument("classify_regimes: horizon must be >= 10");
  if (rows.size() < horizon) throw std::invalid_argument("classify_regimes: fewer rows than horizon");

  std::vector<double> nu_a, alpha, p, alpha_p, a_pow_nu, nu_om, nu_p, beta;
  for (std::size_t i = 0; i < horizon; ++i) {
    const RowParams& r = rows[i];
    const Normalizers nz = normalizers(r);
    nu_a.push_back(std::exp(nz.alpha_n));
    alpha.push_back(nz.alpha_n);
    p.push_back(r.zmg.p());
    alpha_p.push_back(std::abs(nz.alpha_n * r.zmg.p()));
    a_pow_nu.push_back(std::exp(r.nu_real() * r.zmg.log_a()));
    nu_om.push_back(r.nu_real() * r.zmg.one_minus_a());
    nu_p.push_back(r.nu_real() * r.zmg.p());
    beta.push_back(nz.beta_n);
  }
  // Log-scale fits need strictly positive values; exact zeros (a = 1)
  // are a constant-zero trajectory.
  auto positive_trend = [](std::vector<double>& v) {
    const bool all_zero = std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
    if (all_zero) return Trend{TrendKind::Constant, 0.0, 0.0, false};
    for (double& x : v) x = std::max(x, 1e-300);
    return classify_trend(v, TrendScale::Log);
  };

  RegimeReport rep;
  rep.nu_a = positive_trend(nu_a);
  rep.alpha = classify_trend(alpha, TrendScale::Linear);
  rep.p = positive_trend(p);
  rep.alpha_p = positive_trend(alpha_p);
  rep.a_pow_nu = positive_trend(a_pow_nu);
  rep.nu_one_minus_a = positive_trend(nu_om);
  rep.nu_p = positive_trend(nu_p);
  rep.beta = positive_trend(beta);
  for (const Trend* t : {&rep.nu_a, &rep.alpha, &rep.p, &rep.alpha_p, &rep.a_pow_nu, &rep.nu_one_minus_a,
                         &rep.nu_p, &rep.beta})
    rep.inconclusive = rep.inconclusive || t->inconclusive;

  const double p_last = p.back();
  const bool p_to_zero = rep.p.tends_to_zero();
  const bool p_interior = rep.p.kind == TrendKind::Constant && p_last < 1.0;
  const bool alpha_const = rep.alpha.kind == TrendKind::Constant;
  const bool alpha_inf = rep.alpha.kind == TrendKind::ToInfinity;
  auto add = [&rep](const char* name) { rep.applicable.emplace_back(name); };

  if (rep.nu_a.tends_to_zero()) {
    add("max_to_zero");
    rep.max_limits.push_back(law::DefectiveTwoPoint{1.0});
  }
  if (alpha_const && (p_to_zero || p_interior)) {
    add("max_discrete_limit");
    rep.max_limits.push_back(law::DiscreteMaxLimit{rep.alpha.limit, p_to_zero ? 0.0 : p_last});
  }
  if (alpha_inf && (p_to_zero || p_interior)) add("max_diverges");
  if (p_to_zero && alpha_inf && rep.alpha_p.finite_limit()) {
    add("max_gumbel");
    rep.max_limits.push_back(law::GumbelShift{rep.alpha_p.limit / 2.0});
  }
  if (p_to_zero && alpha_const) {
    add("max_gumbel_truncated");
    rep.max_limits.push_back(law::TruncatedGumbel{rep.alpha.limit});
  }
  if (alpha_inf && p_interior) add("max_oscillating_band");

  if (rep.a_pow_nu.tends_to_zero()) add("min_to_zero");
  const bool om_finite = rep.nu_one_minus_a.finite_limit();
  const bool nup_finite = rep.nu_p.finite_limit();
  if (om_finite && nup_finite) {
    add("min_zmg_limit");
    rep.min_limits.push_back(law::ZmgMinLimit{rep.nu_one_minus_a.limit, rep.nu_p.limit});
  }
  const bool om_zero = rep.nu_one_minus_a.tends_to_zero() ||
                       (rep.nu_one_minus_a.kind == TrendKind::Constant && rep.nu_one_minus_a.limit == 0.0);
  if (om_zero && rep.nu_p.tends_to_zero()) add("min_diverges");
  if (rep.nu_p.tends_to_zero() && rep.beta.finite_limit()) {
    add("min_exponential");
    add("joint_independent");
    rep.min_limits.push_back(law::ShiftedExpPositivePart{rep.beta.limit});
  }
  if (rep.nu_p.kind == TrendKind::Constant && rep.nu_p.limit > 0.0 && rep.beta.finite_limit())
    add("min_oscillating_band");
  return rep;
}

}  // namespace zmgx
