#pragma once

// Run configuration: JSON on disk, RunConfig in memory, canonical JSON back.
//
// {
//   "experiment": "max-limit",
//   "scenario": {"family": "power", "alpha": 0, "delta": 0.5, "gamma": 1, "zeta": 1.5, "nu_base": 2},
//   "index_range": [10, 40],            // or "indices": [...], or "horizon": N
//   "grid": {"levels": [...], "points": [...]},
//   "limit": {"kind": "gumbel", "c": 0},
//   "mc": {"paths": 0, "seed": 1, "workers": 1, "generation": 0},
//   "output": {"dir": "out", "prefix": "run", "format": "csv"},
//   "range_tail_tol": 1e-14
// }

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "../asymptotics.hpp"
#include "../limit_laws.hpp"
#include "../maxfamily.hpp"
#include "../scenarios.hpp"

namespace zmgx::driver {

using json = nlohmann::json;

class ConfigParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Experiment {
  MaxLimit,
  MinLimit,
  Joint,
  Range,
  BandSweep,
  BranchingSurvival,
  ConditionedLaw,
  MaxfamLimit,
  LargeDeviation,
  Regimes
};

inline const std::vector<std::pair<Experiment, std::string>>& experiment_names() {
  static const std::vector<std::pair<Experiment, std::string>> names{
      {Experiment::MaxLimit, "max-limit"},
      {Experiment::MinLimit, "min-limit"},
      {Experiment::Joint, "joint"},
      {Experiment::Range, "range"},
      {Experiment::BandSweep, "band-sweep"},
      {Experiment::BranchingSurvival, "branching-survival"},
      {Experiment::ConditionedLaw, "conditioned-law"},
      {Experiment::MaxfamLimit, "maxfam-limit"},
      {Experiment::LargeDeviation, "large-deviation"},
      {Experiment::Regimes, "regimes"},
  };
  return names;
}

inline std::string to_string(Experiment e) {
  for (const auto& [k, v] : experiment_names())
    if (k == e) return v;
  return "?";
}

inline Experiment experiment_from_string(const std::string& s) {
  for (const auto& [k, v] : experiment_names())
    if (v == s) return k;
  throw ConfigValidationError("unknown experiment '" + s + "'");
}

// Limit laws a config can name. The two maxfam variants are evaluated with
// maxfam_limit_cdf; everything else is a LimitLaw.
using ConfigLimit = std::variant<LimitLaw, MaxFamLimit>;

enum class BandTarget { Max, Maxfam };

struct BandSettings {
  BandTarget target = BandTarget::Max;
  double p_lim = 0.5;
  double tolerance = 1e-3;
};

struct TimeRule {
  double scale = 1.0;
  double exponent = 1.0;  // t_n = scale * n^exponent
};

struct McSettings {
  std::uint64_t paths = 0;  // 0 disables Monte Carlo
  std::uint64_t seed = 1;
  unsigned workers = 1;
  std::uint64_t generation = 0;  // maxfam-limit: generation to simulate (0 = last index)
};

enum class OutputFormat { Csv, Json };

struct OutputSettings {
  std::string dir = "out";
  std::string prefix = "run";
  OutputFormat format = OutputFormat::Csv;
};

struct RunConfig {
  Experiment experiment = Experiment::MaxLimit;
  ScenarioSpec scenario = scenario::Power{};
  std::optional<TimeRule> time_rule;  // birth-death only, when times are not listed
  std::vector<std::uint64_t> indices;  // resolved, increasing
  std::uint64_t horizon = 0;           // resolved, >= max index
  GridSpec grid;
  std::optional<ConfigLimit> limit;
  MaxFamNormalization maxfam_normalization = MaxFamNormalization::Centered;
  BandSettings band;
  McSettings mc;
  OutputSettings output;
  double range_tail_tol = 1e-14;
};

namespace detail {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigValidationError(std::string("key '") + key + "': " + e.what());
  }
}

template <class T>
T require(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigValidationError(where + ": missing key '" + key + "'");
  return get_or<T>(j, key, T{});
}

inline void reject_unknown(const json& j, const std::vector<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigValidationError(where + " must be an object");
  for (const auto& [k, v] : j.items()) {
    (void)v;
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
      throw ConfigValidationError(where + ": unknown key '" + k + "'");
  }
}

inline ScenarioSpec parse_scenario(const json& s, std::optional<TimeRule>& rule) {
  const auto family = require<std::string>(s, "family", "scenario");
  if (family == "power") {
    reject_unknown(s, {"family", "alpha", "delta", "gamma", "zeta", "nu_base"}, "scenario");
    scenario::Power p;
    p.alpha = get_or(s, "alpha", p.alpha);
    p.delta = get_or(s, "delta", p.delta);
    p.gamma = get_or(s, "gamma", p.gamma);
    p.zeta = get_or(s, "zeta", p.zeta);
    p.nu_base = get_or(s, "nu_base", p.nu_base);
    return p;
  }
  if (family == "log-power") {
    reject_unknown(s, {"family", "alpha", "delta", "A", "zeta", "nu_base"}, "scenario");
    scenario::LogPower p;
    p.alpha = get_or(s, "alpha", p.alpha);
    p.delta = get_or(s, "delta", p.delta);
    p.A = get_or(s, "A", p.A);
    p.zeta = get_or(s, "zeta", p.zeta);
    p.nu_base = get_or(s, "nu_base", p.nu_base);
    return p;
  }
  if (family == "table") {
    reject_unknown(s, {"family", "rows"}, "scenario");
    scenario::Table t;
    const json rows = require<json>(s, "rows", "table scenario");
    if (!rows.is_array()) throw ConfigValidationError("table scenario: rows must be an array");
    for (const auto& r : rows) {
      reject_unknown(r, {"nu", "a", "log_a", "p"}, "table row");
      const auto nu = require<std::uint64_t>(r, "nu", "table row");
      const auto p = require<double>(r, "p", "table row");
      if (r.contains("a") == r.contains("log_a"))
        throw ConfigValidationError("table row: give exactly one of 'a' and 'log_a'");
      try {
        const ZmgParams z = r.contains("a") ? ZmgParams(r.at("a").get<double>(), p)
                                            : ZmgParams::from_log_a(r.at("log_a").get<double>(), p);
        t.rows.emplace_back(nu, z);
      } catch (const std::invalid_argument& e) {
        throw ConfigValidationError(std::string("table row: ") + e.what());
      }
    }
    return t;
  }
  if (family == "birth-death") {
    reject_unknown(s, {"family", "lambda", "mu", "times", "time_rule"}, "scenario");
    scenario::BirthDeath b;
    b.lambda = require<double>(s, "lambda", "birth-death scenario");
    b.mu = require<double>(s, "mu", "birth-death scenario");
    if (s.contains("times") == s.contains("time_rule"))
      throw ConfigValidationError("birth-death scenario: give exactly one of 'times' and 'time_rule'");
    if (s.contains("times")) {
      b.times = get_or<std::vector<double>>(s, "times", {});
    } else {
      const json& tr = s.at("time_rule");
      reject_unknown(tr, {"scale", "exponent"}, "time_rule");
      TimeRule r;
      r.scale = get_or(tr, "scale", r.scale);
      r.exponent = get_or(tr, "exponent", r.exponent);
      if (!(r.scale > 0.0) || !(r.exponent > 0.0))
        throw ConfigValidationError("time_rule: scale and exponent must be > 0");
      rule = r;
    }
    return b;
  }
  throw ConfigValidationError("unknown scenario family '" + family + "'");
}

inline ConfigLimit parse_limit(const json& l) {
  const auto kind = require<std::string>(l, "kind", "limit");
  auto only = [&](std::vector<std::string> keys) {
    keys.push_back("kind");
    reject_unknown(l, keys, "limit");
  };
  if (kind == "gumbel") {
    only({"c"});
    return LimitLaw{law::GumbelShift{get_or(l, "c", 0.0)}};
  }
  if (kind == "truncated-gumbel") {
    only({"alpha"});
    return LimitLaw{law::TruncatedGumbel{require<double>(l, "alpha", "limit")}};
  }
  if (kind == "discrete-max") {
    only({"alpha", "p"});
    return LimitLaw{law::DiscreteMaxLimit{require<double>(l, "alpha", "limit"), require<double>(l, "p", "limit")}};
  }
  if (kind == "shifted-exp") {
    only({"beta"});
    return LimitLaw{law::ShiftedExpPositivePart{require<double>(l, "beta", "limit")}};
  }
  if (kind == "zmg-min") {
    only({"beta", "rho"});
    return LimitLaw{law::ZmgMinLimit{require<double>(l, "beta", "limit"), require<double>(l, "rho", "limit")}};
  }
  if (kind == "logistic") {
    only({"c"});
    return LimitLaw{law::LogisticShift{get_or(l, "c", 0.0)}};
  }
  if (kind == "truncated-logistic") {
    only({"alpha"});
    return LimitLaw{law::TruncatedLogistic{require<double>(l, "alpha", "limit")}};
  }
  if (kind == "two-point") {
    only({"mass_at_zero"});
    return LimitLaw{law::DefectiveTwoPoint{require<double>(l, "mass_at_zero", "limit")}};
  }
  if (kind == "maxfam-finite") {
    only({"a", "p", "B"});
    return MaxFamLimit{FiniteBLimit{require<double>(l, "a", "limit"), require<double>(l, "p", "limit"),
                                    require<double>(l, "B", "limit")}};
  }
  if (kind == "maxfam-divergent") {
    only({"alpha", "p"});
    return MaxFamLimit{DivergentBLimit{require<double>(l, "alpha", "limit"), require<double>(l, "p", "limit")}};
  }
  throw ConfigValidationError("unknown limit kind '" + kind + "'");
}

inline json limit_to_json(const ConfigLimit& limit) {
  return std::visit(
      overloaded{
          [](const LimitLaw& l) {
            return std::visit(
                overloaded{
                    [](const law::GumbelShift& g) { return json{{"kind", "gumbel"}, {"c", g.c}}; },
                    [](const law::TruncatedGumbel& g) { return json{{"kind", "truncated-gumbel"}, {"alpha", g.alpha}}; },
                    [](const law::DiscreteMaxLimit& d) {
                      return json{{"kind", "discrete-max"}, {"alpha", d.alpha}, {"p", d.p}};
                    },
                    [](const law::ShiftedExpPositivePart& e) { return json{{"kind", "shifted-exp"}, {"beta", e.beta}}; },
                    [](const law::ZmgMinLimit& z) { return json{{"kind", "zmg-min"}, {"beta", z.beta}, {"rho", z.rho}}; },
                    [](const law::LogisticShift& g) { return json{{"kind", "logistic"}, {"c", g.c}}; },
                    [](const law::TruncatedLogistic& g) {
                      return json{{"kind", "truncated-logistic"}, {"alpha", g.alpha}};
                    },
                    [](const law::DefectiveTwoPoint& d) {
                      return json{{"kind", "two-point"}, {"mass_at_zero", d.mass_at_zero}};
                    },
                },
                l);
          },
          [](const MaxFamLimit& m) {
            return std::visit(overloaded{
                                  [](const FiniteBLimit& f) {
                                    return json{{"kind", "maxfam-finite"}, {"a", f.a}, {"p", f.p}, {"B", f.B}};
                                  },
                                  [](const DivergentBLimit& d) {
                                    return json{{"kind", "maxfam-divergent"}, {"alpha", d.alpha}, {"p", d.p}};
                                  },
                              },
                              m);
          },
      },
      limit);
}

inline json scenario_to_json(const ScenarioSpec& spec, const std::optional<TimeRule>& rule) {
  return std::visit(overloaded{
                        [](const scenario::Power& p) {
                          return json{{"family", "power"}, {"alpha", p.alpha}, {"delta", p.delta},
                                      {"gamma", p.gamma},  {"zeta", p.zeta},   {"nu_base", p.nu_base}};
                        },
                        [](const scenario::LogPower& p) {
                          return json{{"family", "log-power"}, {"alpha", p.alpha}, {"delta", p.delta},
                                      {"A", p.A},              {"zeta", p.zeta},   {"nu_base", p.nu_base}};
                        },
                        [](const scenario::Table& t) {
                          json rows = json::array();
                          for (const auto& r : t.rows)
                            rows.push_back({{"nu", r.nu}, {"log_a", r.zmg.log_a()}, {"p", r.zmg.p()}});
                          return json{{"family", "table"}, {"rows", rows}};
                        },
                        [&rule](const scenario::BirthDeath& b) {
                          json j{{"family", "birth-death"}, {"lambda", b.lambda}, {"mu", b.mu}};
                          if (rule)
                            j["time_rule"] = {{"scale", rule->scale}, {"exponent", rule->exponent}};
                          else
                            j["times"] = b.times;
                          return j;
                        },
                    },
                    spec);
}

inline bool needs_array(const RunConfig& c) {
  switch (c.experiment) {
    case Experiment::MaxLimit:
    case Experiment::MinLimit:
    case Experiment::Joint:
    case Experiment::Range:
    case Experiment::LargeDeviation: return true;
    case Experiment::BandSweep: return c.band.target == BandTarget::Max;
    default: return false;
  }
}

inline bool needs_schedule(const RunConfig& c) {
  switch (c.experiment) {
    case Experiment::BranchingSurvival:
    case Experiment::ConditionedLaw:
    case Experiment::MaxfamLimit: return true;
    case Experiment::BandSweep: return c.band.target == BandTarget::Maxfam;
    default: return false;
  }
}

}  // namespace detail

inline bool is_birth_death(const RunConfig& c) { return std::holds_alternative<scenario::BirthDeath>(c.scenario); }

// Experiment/scenario compatibility and parameter ranges, checked before any
// computation.
inline void validate(const RunConfig& c) {
  try {
    zmgx::validate(c.scenario);
  } catch (const std::invalid_argument& e) {
    throw ConfigValidationError(e.what());
  }
  if (c.indices.empty()) throw ConfigValidationError("no indices selected");
  if (c.indices.front() < 1) throw ConfigValidationError("indices must be >= 1");
  for (std::size_t i = 1; i < c.indices.size(); ++i)
    if (c.indices[i] <= c.indices[i - 1]) throw ConfigValidationError("indices must be strictly increasing");
  if (c.horizon < c.indices.back()) throw ConfigValidationError("horizon must cover every index");
  if (detail::needs_array(c) && is_birth_death(c))
    throw ConfigValidationError(to_string(c.experiment) + " needs an array scenario (power, log-power or table)");
  if (detail::needs_schedule(c) && !is_birth_death(c) && !std::holds_alternative<scenario::Table>(c.scenario))
    throw ConfigValidationError(to_string(c.experiment) +
                                " needs a schedule-producing scenario (birth-death or table)");
  if (const auto* bd = std::get_if<scenario::BirthDeath>(&c.scenario); bd && !c.time_rule && bd->times.size() < c.horizon)
    throw ConfigValidationError("birth-death scenario lists fewer times than the horizon");
  for (double q : c.grid.levels)
    if (!(q > 0.0 && q < 1.0)) throw ConfigValidationError("grid levels must lie in (0,1)");
  if (!(c.range_tail_tol > 0.0 && c.range_tail_tol <= 1e-8))
    throw ConfigValidationError("range_tail_tol must lie in (0, 1e-8]");
  if (c.mc.paths > 0 && c.experiment == Experiment::MaxfamLimit && c.mc.paths < kMinMaxFamPaths)
    throw ConfigValidationError("maxfam-limit Monte Carlo needs at least 1000 paths");
  if (c.mc.workers < 1) throw ConfigValidationError("mc.workers must be >= 1");
  if (c.mc.generation > c.horizon) throw ConfigValidationError("mc.generation beyond the horizon");
  if (c.experiment == Experiment::BandSweep && !(c.band.p_lim > 0.0 && c.band.p_lim < 1.0))
    throw ConfigValidationError("band.p_lim must lie in (0,1)");
  if (c.experiment == Experiment::Regimes && c.horizon < 10)
    throw ConfigValidationError("regimes needs a horizon of at least 10");
  const bool maxfam_limit = c.limit && std::holds_alternative<MaxFamLimit>(*c.limit);
  if (maxfam_limit && c.experiment != Experiment::MaxfamLimit)
    throw ConfigValidationError("maxfam limits apply only to maxfam-limit");
  // alpha* needs B_{n-1} > 0
  const bool centered_maxfam = c.experiment == Experiment::MaxfamLimit && !maxfam_limit &&
                               c.maxfam_normalization == MaxFamNormalization::Centered;
  const bool maxfam_band = c.experiment == Experiment::BandSweep && c.band.target == BandTarget::Maxfam;
  if ((centered_maxfam || maxfam_band) && c.indices.front() < 2)
    throw ConfigValidationError("centered max-family law needs indices >= 2");
}

inline RunConfig parse_config(const json& j) {
  detail::reject_unknown(j,
                         {"experiment", "scenario", "indices", "index_range", "horizon", "grid", "limit",
                          "maxfam_normalization", "band", "mc", "output", "range_tail_tol"},
                         "config");
  RunConfig c;
  c.experiment = experiment_from_string(detail::require<std::string>(j, "experiment", "config"));
  c.scenario = detail::parse_scenario(detail::require<json>(j, "scenario", "config"), c.time_rule);

  const int selectors = int(j.contains("indices")) + int(j.contains("index_range"));
  if (selectors > 1) throw ConfigValidationError("give at most one of 'indices' and 'index_range'");
  if (j.contains("indices")) {
    c.indices = detail::get_or<std::vector<std::uint64_t>>(j, "indices", {});
  } else if (j.contains("index_range")) {
    const auto r = detail::get_or<std::vector<std::uint64_t>>(j, "index_range", {});
    if (r.size() != 2 || r[0] < 1 || r[0] > r[1])
      throw ConfigValidationError("index_range must be [first, last] with 1 <= first <= last");
    for (std::uint64_t n = r[0]; n <= r[1]; ++n) c.indices.push_back(n);
  }
  c.horizon = detail::get_or<std::uint64_t>(j, "horizon", 0);
  if (c.indices.empty())
    for (std::uint64_t n = 1; n <= c.horizon; ++n) c.indices.push_back(n);
  if (c.horizon == 0 && !c.indices.empty()) c.horizon = c.indices.back();

  if (auto* bd = std::get_if<scenario::BirthDeath>(&c.scenario); bd && c.time_rule) {
    for (std::uint64_t n = 1; n <= c.horizon; ++n)
      bd->times.push_back(c.time_rule->scale * std::pow(static_cast<double>(n), c.time_rule->exponent));
  }

  if (j.contains("grid")) {
    const json& g = j.at("grid");
    detail::reject_unknown(g, {"levels", "points"}, "grid");
    c.grid.levels = detail::get_or(g, "levels", c.grid.levels);
    c.grid.extra_points = detail::get_or(g, "points", c.grid.extra_points);
  }
  if (j.contains("limit")) c.limit = detail::parse_limit(j.at("limit"));
  const auto norm = detail::get_or<std::string>(j, "maxfam_normalization", "centered");
  if (norm == "centered")
    c.maxfam_normalization = MaxFamNormalization::Centered;
  else if (norm == "uncentered")
    c.maxfam_normalization = MaxFamNormalization::Uncentered;
  else
    throw ConfigValidationError("maxfam_normalization must be 'centered' or 'uncentered'");
  if (j.contains("band")) {
    const json& b = j.at("band");
    detail::reject_unknown(b, {"target", "p_lim", "tolerance"}, "band");
    const auto target = detail::get_or<std::string>(b, "target", "max");
    if (target == "max")
      c.band.target = BandTarget::Max;
    else if (target == "maxfam")
      c.band.target = BandTarget::Maxfam;
    else
      throw ConfigValidationError("band.target must be 'max' or 'maxfam'");
    c.band.p_lim = detail::get_or(b, "p_lim", c.band.p_lim);
    c.band.tolerance = detail::get_or(b, "tolerance", c.band.tolerance);
  }
  if (j.contains("mc")) {
    const json& m = j.at("mc");
    detail::reject_unknown(m, {"paths", "seed", "workers", "generation"}, "mc");
    c.mc.paths = detail::get_or(m, "paths", c.mc.paths);
    c.mc.seed = detail::get_or(m, "seed", c.mc.seed);
    c.mc.workers = detail::get_or(m, "workers", c.mc.workers);
    c.mc.generation = detail::get_or(m, "generation", c.mc.generation);
  }
  if (j.contains("output")) {
    const json& o = j.at("output");
    detail::reject_unknown(o, {"dir", "prefix", "format"}, "output");
    c.output.dir = detail::get_or(o, "dir", c.output.dir);
    c.output.prefix = detail::get_or(o, "prefix", c.output.prefix);
    const auto fmt = detail::get_or<std::string>(o, "format", "csv");
    if (fmt == "csv")
      c.output.format = OutputFormat::Csv;
    else if (fmt == "json")
      c.output.format = OutputFormat::Json;
    else
      throw ConfigValidationError("output.format must be 'csv' or 'json'");
  }
  c.range_tail_tol = detail::get_or(j, "range_tail_tol", c.range_tail_tol);
  validate(c);
  return c;
}

inline RunConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigParseError(e.what());
  }
  return parse_config(j);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigParseError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

// Canonical form with every default filled in. parse_config(to_json(c))
// reproduces c, and to_json is a fixed point of that round trip.
inline json to_json(const RunConfig& c) {
  json j;
  j["experiment"] = to_string(c.experiment);
  j["scenario"] = detail::scenario_to_json(c.scenario, c.time_rule);
  j["indices"] = c.indices;
  j["horizon"] = c.horizon;
  j["grid"] = {{"levels", c.grid.levels}, {"points", c.grid.extra_points}};
  if (c.limit) j["limit"] = detail::limit_to_json(*c.limit);
  j["maxfam_normalization"] = c.maxfam_normalization == MaxFamNormalization::Centered ? "centered" : "uncentered";
  j["band"] = {{"target", c.band.target == BandTarget::Max ? "max" : "maxfam"},
               {"p_lim", c.band.p_lim},
               {"tolerance", c.band.tolerance}};
  j["mc"] = {{"paths", c.mc.paths}, {"seed", c.mc.seed}, {"workers", c.mc.workers}, {"generation", c.mc.generation}};
  j["output"] = {{"dir", c.output.dir},
                 {"prefix", c.output.prefix},
                 {"format", c.output.format == OutputFormat::Csv ? "csv" : "json"}};
  j["range_tail_tol"] = c.range_tail_tol;
  return j;
}

}  // namespace zmgx::driver
