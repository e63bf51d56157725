#pragma once

// Experiment execution. Every experiment builds its tables completely before
// anything is written, so a failing run leaves no partial artifacts.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "../asymptotics.hpp"
#include "../branching.hpp"
#include "../extremes.hpp"
#include "../maxfamily.hpp"
#include "../montecarlo.hpp"
#include "../rng.hpp"
#include "../scenarios.hpp"
#include "config.hpp"
#include "output.hpp"

namespace zmgx::driver {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitParse = 2,
  kExitValidation = 3,
  kExitOverflow = 4,
  kExitInsufficientSurvivors = 5,
};

class NumericOverflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunResult {
  int exit_code = kExitOk;
  std::string message;
  std::vector<std::filesystem::path> files;
};

// Hash of the canonical config without the knobs that must not change the
// data: seed (reported separately), worker count and output location.
inline std::string config_sha(const RunConfig& c) {
  json j = to_json(c);
  j["mc"].erase("seed");
  j["mc"].erase("workers");
  j.erase("output");
  return sha256_hex(j.dump());
}

namespace detail {

// Monte Carlo streams for index n start at n << 32.
inline RngSpec stream_for(const RunConfig& c, std::uint64_t n) { return {c.mc.seed, n << 32}; }

inline std::vector<double> points_or(const GridSpec& g, std::vector<double> fallback) {
  return g.extra_points.empty() ? fallback : g.extra_points;
}

inline std::vector<double> integer_range(int lo, int hi) {
  std::vector<double> v;
  for (int k = lo; k <= hi; ++k) v.push_back(k);
  return v;
}

inline std::vector<RowParams> rows_for(const RunConfig& c) {
  try {
    return generate_rows(c.scenario, c.indices);
  } catch (const std::invalid_argument& e) {
    throw ConfigValidationError(e.what());
  }
}

inline OffspringSchedule schedule_for(const RunConfig& c) {
  try {
    return offspring_schedule(c.scenario, c.horizon);
  } catch (const std::invalid_argument& e) {
    throw ConfigValidationError(e.what());
  }
}

inline LimitLaw limit_law_or(const RunConfig& c, LimitLaw fallback) {
  if (!c.limit) return fallback;
  if (const auto* l = std::get_if<LimitLaw>(&*c.limit)) return *l;
  throw ConfigValidationError("this experiment needs a row-extreme limit law");
}

template <class ExactRaw, class Sampler>
void mc_rows(const RunConfig& c, std::uint64_t n, Table& mc, ExactRaw&& exact_raw, Sampler&& draw) {
  auto samples = run_replicates(c.mc.paths, stream_for(c, n), c.mc.workers,
                                [&](Rng& rng, std::uint64_t) { return static_cast<double>(draw(rng)); });
  const EmpiricalCdf emp(std::move(samples));
  mc.add(n, c.mc.paths, ks_distance(emp, exact_raw), ks_critical_value(0.01, c.mc.paths));
}

inline Table mc_table() { return {"mc", {"n", "paths", "ks_distance", "ks_critical_0.01"}, {}}; }

// ---------------------------------------------------------------------------

inline std::vector<Table> run_max_limit(const RunConfig& c) {
  const auto rows = rows_for(c);
  const LimitLaw limit = limit_law_or(c, law::GumbelShift{0.0});
  const auto xs = grid_points(limit, c.grid);
  Table main{"", {"n", "nu", "a", "p", "alpha_n", "x", "exact_cdf", "limit_cdf", "abs_diff"}, {}};
  Table summary{"summary", {"n", "nu", "sup_distance"}, {}};
  Table mc = mc_table();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const RowParams& r = rows[i];
    const double alpha = normalizers(r).alpha_n;
    double sup = 0.0;
    for (double x : xs) {
      const double e = normalized_max_cdf(r, x), l = limit_cdf(limit, x);
      main.add(c.indices[i], r.nu, r.zmg.a(), r.zmg.p(), alpha, x, e, l, std::abs(e - l));
      sup = std::max(sup, std::abs(e - l));
    }
    summary.add(c.indices[i], r.nu, sup);
    if (c.mc.paths > 0)
      mc_rows(c, c.indices[i], mc, [&](double m) { return max_cdf(r, m); },
              [&](Rng& g) { return sample_row_max_inverse(r, g); });
  }
  std::vector<Table> out{main, summary};
  if (c.mc.paths > 0) out.push_back(mc);
  return out;
}

inline std::vector<Table> run_min_limit(const RunConfig& c) {
  const auto rows = rows_for(c);
  const LimitLaw limit = limit_law_or(c, law::ShiftedExpPositivePart{normalizers(rows.back()).beta_n});
  const auto ys = grid_points(limit, c.grid);
  Table main{"", {"n", "nu", "a", "p", "beta_n", "y", "exact_cdf", "limit_cdf", "abs_diff"}, {}};
  Table summary{"summary", {"n", "nu", "sup_distance"}, {}};
  Table mc = mc_table();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const RowParams& r = rows[i];
    const double beta = normalizers(r).beta_n;
    double sup = 0.0;
    for (double y : ys) {
      const double e = normalized_min_cdf(r, y), l = limit_cdf(limit, y);
      main.add(c.indices[i], r.nu, r.zmg.a(), r.zmg.p(), beta, y, e, l, std::abs(e - l));
      sup = std::max(sup, std::abs(e - l));
    }
    summary.add(c.indices[i], r.nu, sup);
    if (c.mc.paths > 0)
      mc_rows(c, c.indices[i], mc, [&](double m) { return min_cdf(r, m); },
              [&](Rng& g) { return min_quantile(r, uniform01_open(g)); });
  }
  std::vector<Table> out{main, summary};
  if (c.mc.paths > 0) out.push_back(mc);
  return out;
}

inline std::vector<Table> run_joint(const RunConfig& c) {
  const auto rows = rows_for(c);
  const LimitLaw min_limit = limit_law_or(c, law::ShiftedExpPositivePart{normalizers(rows.back()).beta_n});
  if (!std::holds_alternative<law::ShiftedExpPositivePart>(min_limit))
    throw ConfigValidationError("joint: limit must be shifted-exp");
  const LimitLaw max_limit = law::GumbelShift{0.0};
  GridSpec xgrid = c.grid;
  xgrid.extra_points.clear();
  const auto xs = grid_points(max_limit, xgrid);
  const auto ys = grid_points(min_limit, xgrid);
  Table main{"", {"n", "nu", "a", "p", "x", "y", "exact_cdf", "product_limit", "abs_diff"}, {}};
  Table summary{"summary", {"n", "nu", "sup_distance"}, {}};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const RowParams& r = rows[i];
    double sup = 0.0;
    for (double x : xs)
      for (double y : ys) {
        const double e = normalized_joint_cdf(r, x, y);
        const double l = limit_cdf(max_limit, x) * limit_cdf(min_limit, y);
        main.add(c.indices[i], r.nu, r.zmg.a(), r.zmg.p(), x, y, e, l, std::abs(e - l));
        sup = std::max(sup, std::abs(e - l));
      }
    summary.add(c.indices[i], r.nu, sup);
  }
  return {main, summary};
}

inline std::vector<Table> run_range(const RunConfig& c) {
  const auto rows = rows_for(c);
  Table main{"", {"n", "nu", "a", "p", "r", "range_cdf", "max_cdf", "abs_diff"}, {}};
  Table summary{"summary", {"n", "nu", "sup_distance"}, {}};
  Table mc{"mc", {"n", "paths", "ks_distance_range", "ks_critical_0.01"}, {}};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const RowParams& r = rows[i];
    std::vector<std::uint64_t> rs;
    if (!c.grid.extra_points.empty()) {
      for (double x : c.grid.extra_points) {
        if (x < 0.0) throw ConfigValidationError("range: points must be >= 0");
        rs.push_back(static_cast<std::uint64_t>(std::floor(x)));
      }
    } else {
      for (double q : c.grid.levels) rs.push_back(max_quantile(r, q));
    }
    std::sort(rs.begin(), rs.end());
    rs.erase(std::unique(rs.begin(), rs.end()), rs.end());
    double sup = 0.0;
    for (std::uint64_t k : rs) {
      double rc;
      try {
        rc = range_cdf(r, k, c.range_tail_tol);
      } catch (const std::length_error& e) {
        throw NumericOverflow(e.what());
      }
      const double mc_ = max_cdf(r, static_cast<double>(k));
      main.add(c.indices[i], r.nu, r.zmg.a(), r.zmg.p(), k, rc, mc_, std::abs(rc - mc_));
      sup = std::max(sup, std::abs(rc - mc_));
    }
    summary.add(c.indices[i], r.nu, sup);
    if (c.mc.paths > 0) {
      if (r.nu > kDirectRowLimit)
        throw ConfigValidationError("range: Monte Carlo needs nu <= 1e7 (direct row simulation)");
      mc_rows(c, c.indices[i], mc, [&](double k) { return k < 0 ? 0.0 : range_cdf(r, static_cast<std::uint64_t>(k), c.range_tail_tol); },
              [&](Rng& g) { return *sample_row_extrema(r, g, true).range; });
    }
  }
  std::vector<Table> out{main, summary};
  if (c.mc.paths > 0) out.push_back(mc);
  return out;
}

inline std::vector<Table> run_band_sweep(const RunConfig& c) {
  const auto xs = points_or(c.grid, [] {
    std::vector<double> v;
    for (int k = -8; k <= 16; ++k) v.push_back(0.5 * k);
    return v;
  }());
  Table main{"", {"n", "center", "x", "exact_cdf", "band_low", "band_high", "violation"}, {}};
  Table summary{"summary", {"n", "max_violation", "within_tolerance"}, {}};
  auto sweep = [&](std::uint64_t n, double center, auto&& exact, auto&& band) {
    double worst = 0.0;
    for (double x : xs) {
      const double e = exact(x + center);
      const Band b = band(c.band.p_lim, x);
      const double v = std::max({0.0, b.low - e, e - b.high});
      main.add(n, center, x, e, b.low, b.high, v);
      worst = std::max(worst, v);
    }
    summary.add(n, worst, worst <= c.band.tolerance);
  };
  if (c.band.target == BandTarget::Max) {
    const auto rows = rows_for(c);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const RowParams& r = rows[i];
      sweep(c.indices[i], normalizers(r).C_n, [&](double y) { return max_cdf(r, y); }, max_oscillation_band);
    }
  } else {
    const auto schedule = schedule_for(c);
    for (std::uint64_t n : c.indices) {
      if (n < 2) throw ConfigValidationError("band-sweep (maxfam): indices must be >= 2");
      const auto q = make_maxfam_query(schedule, n);
      sweep(n, maxfam_centering(q), [&](double y) { return maxfam_cdf(q, y); }, maxfam_oscillation_band);
    }
  }
  return {main, summary};
}

inline std::vector<Table> run_branching_survival(const RunConfig& c, bool& overflow) {
  const auto schedule = schedule_for(c);
  const auto table = aggregate_table(schedule, c.horizon);
  Table main{"", {"n", "m", "log_M", "M", "B", "A", "survival", "log_survival"}, {}};
  for (std::uint64_t n : c.indices) {
    const auto& g = table[n - 1];
    overflow = overflow || g.overflow;
    main.add(n, g.m, g.log_M, g.M, g.B, g.A, g.survival, g.log_survival);
  }
  Table summary{"summary", {"quantity", "value"}, {}};
  if (c.horizon >= 10) {
    const auto rep = extinction_report(schedule, c.horizon);
    summary.add("environment", std::string(to_string(classify_environment(schedule, c.horizon))));
    summary.add("survival_trend", std::string(to_string(rep.survival.kind)));
    summary.add("B_trend", std::string(to_string(rep.B.kind)));
    summary.add("M_trend", std::string(to_string(rep.M.kind)));
    summary.add("sum_r_over_M_trend", std::string(to_string(rep.sum_r_over_M.kind)));
    summary.add("extinction_certain_trend", std::string(rep.extinction_certain_trend ? "true" : "false"));
    summary.add("criterion_predicts_certain", std::string(rep.criterion_predicts_certain ? "true" : "false"));
    summary.add("consistent", std::string(rep.consistent ? "true" : "false"));
    summary.add("Q_estimate", cell(rep.Q_estimate).text);
  }
  std::vector<Table> out{main, summary};
  if (c.mc.paths > 0) {
    const auto alive = run_replicates(c.mc.paths, RngSpec{c.mc.seed, 0}, c.mc.workers,
                                      [&](Rng& rng, std::uint64_t) -> std::vector<std::uint8_t> {
                                        const Path p = simulate_path(schedule, c.horizon, rng, false);
                                        if (p.outcome == PathOutcome::PopulationCapExceeded) return {};
                                        std::vector<std::uint8_t> v;
                                        for (std::uint64_t n : c.indices) v.push_back(p.sizes[n] > 0);
                                        return v;
                                      });
    Table mc{"mc", {"n", "paths", "survivors", "empirical_survival", "exact_survival", "binomial_sd"}, {}};
    for (std::size_t k = 0; k < c.indices.size(); ++k) {
      std::uint64_t s = 0;
      for (const auto& v : alive) {
        if (v.empty()) throw NumericOverflow("branching-survival: population exceeded the simulation cap");
        s += v[k];
      }
      const double exact = table[c.indices[k] - 1].survival;
      const double np = static_cast<double>(c.mc.paths);
      mc.add(c.indices[k], c.mc.paths, s, static_cast<double>(s) / np, exact, std::sqrt(exact * (1 - exact) / np));
    }
    out.push_back(mc);
  }
  return out;
}

inline std::vector<Table> run_conditioned_law(const RunConfig& c, bool& overflow) {
  const auto schedule = schedule_for(c);
  const auto table = aggregate_table(schedule, c.horizon);
  const auto ks = points_or(c.grid, integer_range(1, 10));
  Table main{"", {"n", "B", "k", "pmf", "cdf", "k_over_B", "exponential_cdf"}, {}};
  Table summary{"summary", {"n", "B", "conditioned_mean", "survival"}, {}};
  for (std::uint64_t n : c.indices) {
    const auto& g = table[n - 1];
    overflow = overflow || g.overflow;
    const ConditionedLaw law{g.B};
    for (double k : ks) {
      if (k < 1.0) throw ConfigValidationError("conditioned-law: points must be >= 1");
      const double z = g.B > 0.0 ? k / g.B : numeric::inf;
      main.add(n, g.B, k, law.pmf(static_cast<std::uint64_t>(k)), law.cdf(k), z, -std::expm1(-z));
    }
    summary.add(n, g.B, law.mean(), g.survival);
  }
  return {main, summary};
}

inline std::vector<Table> run_maxfam_limit(const RunConfig& c) {
  const auto schedule = schedule_for(c);
  const bool raw_limit = c.limit && std::holds_alternative<MaxFamLimit>(*c.limit);
  std::vector<double> xs;
  LimitLaw limit = law::LogisticShift{0.0};
  if (raw_limit) {
    xs = points_or(c.grid, integer_range(0, 20));
  } else {
    if (c.limit) limit = std::get<LimitLaw>(*c.limit);
    xs = grid_points(limit, c.grid);
  }
  Table main{"", {"n", "B_prev", "alpha_star", "x", "exact_cdf", "limit_cdf", "abs_diff"}, {}};
  Table summary{"summary", {"n", "sup_distance"}, {}};
  for (std::uint64_t n : c.indices) {
    const auto q = make_maxfam_query(schedule, n);
    if (!raw_limit && c.maxfam_normalization == MaxFamNormalization::Centered && !q.alpha_star)
      throw ConfigValidationError("maxfam-limit: centered law undefined at generation " + std::to_string(n));
    const double alpha = q.alpha_star.value_or(-numeric::inf);
    double sup = 0.0;
    for (double x : xs) {
      double e, l;
      if (raw_limit) {
        e = maxfam_cdf(q, x);
        l = maxfam_limit_cdf(std::get<MaxFamLimit>(*c.limit), x);
      } else {
        e = normalized_maxfam_cdf(q, x, c.maxfam_normalization);
        l = limit_cdf(limit, x);
      }
      main.add(n, q.B_prev, alpha, x, e, l, std::abs(e - l));
      sup = std::max(sup, std::abs(e - l));
    }
    summary.add(n, sup);
  }
  std::vector<Table> out{main, summary};
  if (c.mc.paths > 0) {
    const std::uint64_t gen = c.mc.generation ? c.mc.generation : c.indices.back();
    const auto sample = mc_maxfam(schedule, gen, c.mc.paths, RngSpec{c.mc.seed, 0}, c.mc.workers);
    const auto q = make_maxfam_query(schedule, gen);
    const EmpiricalCdf emp = sample.empirical();
    Table mc{"mc", {"n", "paths", "retained", "ks_distance", "ks_critical_0.01"}, {}};
    mc.add(gen, sample.paths, sample.retained, ks_distance(emp, [&](double x) { return maxfam_cdf(q, x); }),
           ks_critical_value(0.01, sample.retained));
    Table cdf{"mc_cdf", {"k", "empirical_cdf", "exact_cdf"}, {}};
    const auto top = static_cast<std::uint64_t>(emp.values().back());
    for (std::uint64_t k = 0; k <= top; ++k)
      cdf.add(k, emp(static_cast<double>(k)), maxfam_cdf(q, static_cast<double>(k)));
    out.push_back(mc);
    out.push_back(cdf);
  }
  return out;
}

inline std::vector<Table> run_large_deviation(const RunConfig& c) {
  const auto rows = rows_for(c);
  const auto xs = points_or(c.grid, {0.0});
  Table main{"", {"n", "nu", "a", "p", "alpha_n", "x", "ratio"}, {}};
  Table summary{"summary", {"n", "ratio_first_x", "distance_to_minus_half"}, {}};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const RowParams& r = rows[i];
    const double alpha = normalizers(r).alpha_n;
    if (!(alpha > 0.0))
      throw ConfigValidationError("large-deviation: alpha_n <= 0 at n = " + std::to_string(c.indices[i]));
    double first = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      const double ratio = large_deviation_ratio(r, xs[k]);
      if (k == 0) first = ratio;
      main.add(c.indices[i], r.nu, r.zmg.a(), r.zmg.p(), alpha, xs[k], ratio);
    }
    summary.add(c.indices[i], first, std::abs(first + 0.5));
  }
  return {main, summary};
}

inline void add_trend(Table& t, const char* name, const Trend& tr) {
  t.add(std::string(name), std::string(to_string(tr.kind)), tr.slope, tr.limit, tr.inconclusive);
}

inline std::vector<Table> run_regimes(const RunConfig& c) {
  Table main{"", {"quantity", "trend", "slope", "limit", "inconclusive"}, {}};
  Table summary{"summary", {"result"}, {}};
  if (is_birth_death(c)) {
    const auto schedule = schedule_for(c);
    const auto rep = extinction_report(schedule, c.horizon);
    add_trend(main, "survival", rep.survival);
    add_trend(main, "B", rep.B);
    add_trend(main, "M", rep.M);
    add_trend(main, "sum_r_over_M", rep.sum_r_over_M);
    summary.add(std::string(to_string(classify_environment(schedule, c.horizon))));
    if (rep.extinction_certain_trend) summary.add("extinction_certain");
    if (!rep.consistent) summary.add("extinction_criterion_inconsistent");
    return {main, summary};
  }
  const auto rows = rows_for(c);
  if (rows.size() < 10) throw ConfigValidationError("regimes: needs at least 10 indices");
  const auto rep = classify_regimes(rows, rows.size());
  add_trend(main, "nu_a", rep.nu_a);
  add_trend(main, "alpha_n", rep.alpha);
  add_trend(main, "p", rep.p);
  add_trend(main, "alpha_p", rep.alpha_p);
  add_trend(main, "a_pow_nu", rep.a_pow_nu);
  add_trend(main, "nu_one_minus_a", rep.nu_one_minus_a);
  add_trend(main, "nu_p", rep.nu_p);
  add_trend(main, "beta_n", rep.beta);
  for (const auto& name : rep.applicable) summary.add(name);
  if (rep.inconclusive) summary.add("inconclusive");
  return {main, summary};
}

}  // namespace detail

inline std::vector<Table> compute(const RunConfig& c, bool& overflow) {
  switch (c.experiment) {
    case Experiment::MaxLimit: return detail::run_max_limit(c);
    case Experiment::MinLimit: return detail::run_min_limit(c);
    case Experiment::Joint: return detail::run_joint(c);
    case Experiment::Range: return detail::run_range(c);
    case Experiment::BandSweep: return detail::run_band_sweep(c);
    case Experiment::BranchingSurvival: return detail::run_branching_survival(c, overflow);
    case Experiment::ConditionedLaw: return detail::run_conditioned_law(c, overflow);
    case Experiment::MaxfamLimit: return detail::run_maxfam_limit(c);
    case Experiment::LargeDeviation: return detail::run_large_deviation(c);
    case Experiment::Regimes: return detail::run_regimes(c);
  }
  throw std::logic_error("unhandled experiment");
}

// Runs a validated config and writes its tables. Errors are mapped to exit
// codes; nothing is written unless every table was computed.
inline RunResult run(const RunConfig& c) {
  RunResult res;
  try {
    validate(c);
    bool overflow = false;
    const auto tables = compute(c, overflow);
    const Header h{config_sha(c), c.mc.seed, kRngIdentity, to_string(c.experiment)};
    for (const auto& t : tables)
      res.files.push_back(write_table(c.output.dir, c.output.prefix, c.output.format == OutputFormat::Json, h, t));
    if (overflow) {
      res.exit_code = kExitOverflow;
      res.message = "numeric overflow: M_n, A_n or B_n not representable as a double (log columns remain valid)";
    }
  } catch (const ConfigParseError& e) {
    res = {kExitParse, e.what(), {}};
  } catch (const ConfigValidationError& e) {
    res = {kExitValidation, e.what(), {}};
  } catch (const UnsupportedCombination& e) {
    res = {kExitValidation, e.what(), {}};
  } catch (const NumericOverflow& e) {
    res = {kExitOverflow, e.what(), {}};
  } catch (const PopulationOverflow& e) {
    res = {kExitOverflow, e.what(), {}};
  } catch (const InsufficientSurvivors& e) {
    res = {kExitInsufficientSurvivors, e.what(), {}};
  } catch (const std::invalid_argument& e) {
    res = {kExitValidation, e.what(), {}};
  } catch (const std::exception& e) {
    res = {kExitUsage, e.what(), {}};
  }
  return res;
}

}  // namespace zmgx::driver
