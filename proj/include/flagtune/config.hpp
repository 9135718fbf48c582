#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "flagtune/baselines.hpp"
#include "flagtune/catalog.hpp"
#include "flagtune/evaluator.hpp"
#include "flagtune/landscape.hpp"
#include "flagtune/tuner.hpp"

namespace flagtune {

using json = nlohmann::json;

// Everything a `tune` or `bruteforce` invocation needs, resolved from the
// on-disk JSON config. Relative paths are taken relative to the config file.
struct RunConfig {
  std::filesystem::path base_dir;
  Target target;
  FlagCatalog catalog;
  TunerConfig tuner;
  GaParams ga;
  Strategy strategy = Strategy::comptuner;
  std::filesystem::path output_dir = "flagtune-out";
  std::uint64_t seed = 1;
  json source;  // the parsed file, echoed into reports
};

namespace detail {

// Strict object reader: every key must be consumed, otherwise finish() throws.
class StrictObject {
 public:
  StrictObject(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  bool has(const std::string& key) {
    if (!j_.contains(key)) return false;
    used_.insert(key);
    return true;
  }

  const json& at(const std::string& key) {
    if (!has(key)) throw ConfigError(where_ + ": missing key '" + key + "'");
    return j_.at(key);
  }

  template <class T>
  T get(const std::string& key) {
    const json& v = at(key);
    try {
      return v.get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where_ + "." + key + ": wrong type");
    }
  }

  template <class T>
  void read(const std::string& key, T& into) {
    if (j_.contains(key)) into = get<T>(key);
  }

  std::string path(const std::string& key) const { return where_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) throw ConfigError(where_ + ": unknown key '" + it.key() + "'");
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> used_;
};

inline std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

inline void read_tuner(StrictObject o, TunerConfig& t) {
  o.read("ini_size", t.ini_size);
  o.read("acc_threshold_select", t.acc_threshold_select);
  o.read("acc_threshold_stop", t.acc_threshold_stop);
  o.read("max_training", t.max_training);
  o.read("candidate_pool", t.candidate_pool);
  o.read("omega", t.omega);
  o.read("c1", t.c1);
  o.read("c2", t.c2);
  o.read("c_boost", t.c_boost);
  o.read("v_max", t.v_max);
  o.read("swarm_iterations", t.swarm_iterations);
  o.read("time_budget_s", t.time_budget_s);
  o.read("repeats_per_measurement", t.repeats_per_measurement);
  o.read("penalty_factor", t.penalty_factor);
  o.read("trees", t.trees);
  o.read("finalize_top_k", t.finalize_top_k);
  o.read("max_evaluations", t.max_evaluations);
  if (o.has("partition_threshold")) t.partition_threshold = o.get<double>("partition_threshold");
  o.finish();
}

inline void read_ga(StrictObject o, GaParams& g) {
  o.read("population", g.population);
  o.read("tournament", g.tournament);
  o.read("crossover_rate", g.crossover_rate);
  if (o.has("mutation_rate")) g.mutation_rate = o.get<double>("mutation_rate");
  o.read("elitism", g.elitism);
  o.read("max_generations", g.max_generations);
  o.read("stall_generations", g.stall_generations);
  o.finish();
}

inline SyntheticLandscape read_landscape(StrictObject o) {
  const auto n = o.get<std::size_t>("n");
  SyntheticLandscape land;
  if (o.has("generate_seed")) {
    LandscapeShape shape;
    if (o.has("shape")) {
      StrictObject s(o.at("shape"), o.path("shape"));
      s.read("base_time_s", shape.base_time_s);
      s.read("linear_scale", shape.linear_scale);
      s.read("pair_density", shape.pair_density);
      s.read("pair_scale", shape.pair_scale);
      s.read("trap_block_size", shape.trap_block_size);
      s.read("trap_blocks", shape.trap_blocks);
      s.read("trap_penalty", shape.trap_penalty);
      s.read("noise_sd", shape.noise_sd);
      s.read("min_time_s", shape.min_time_s);
      s.finish();
    }
    land = generate_landscape(n, o.get<std::uint64_t>("generate_seed"), shape);
  } else {
    std::vector<PairTerm> pairs;
    if (o.has("pair_terms"))
      for (const auto& p : o.at("pair_terms")) {
        if (!p.is_array() || p.size() != 3) throw ConfigError(o.path("pair_terms") + ": expected [i, j, weight]");
        pairs.push_back({p[0].get<std::size_t>(), p[1].get<std::size_t>(), p[2].get<double>()});
      }
    std::vector<TrapBlock> traps;
    if (o.has("trap_blocks"))
      for (const auto& t : o.at("trap_blocks")) {
        StrictObject b(t, o.path("trap_blocks[]"));
        traps.push_back({b.get<std::vector<std::size_t>>("bits"), b.get<double>("penalty")});
        b.finish();
      }
    double noise_sd = 0.0;
    std::uint64_t noise_seed = 0;
    o.read("noise_sd", noise_sd);
    o.read("noise_seed", noise_seed);
    land = SyntheticLandscape(n, o.get<double>("base_time_s"), o.get<std::vector<double>>("linear_weights"),
                              std::move(pairs), std::move(traps), noise_sd, noise_seed);
  }
  if (o.has("reference")) land.set_reference(Sequence::from_string(o.get<std::string>("reference")));
  o.finish();
  return land;
}

inline CompilerTarget read_compiler(StrictObject o, const std::filesystem::path& base) {
  CompilerTarget t;
  t.compile_cmd = o.get<std::string>("compile_cmd");
  o.read("run_cmd", t.run_cmd);
  for (const auto& s : o.get<std::vector<std::string>>("sources")) t.sources.push_back(resolve(base, s).string());
  t.workdir = resolve(base, o.get<std::string>("workdir"));
  o.read("baseline_flags", t.baseline_flags);
  o.read("run_timeout_s", t.run_timeout_s);
  o.read("compile_timeout_s", t.compile_timeout_s);
  if (o.has("expected_output")) t.expected_output = resolve(base, o.get<std::string>("expected_output"));
  o.finish();
  t.validate();
  return t;
}

}  // namespace detail

inline RunConfig parse_run_config(const json& j, const std::filesystem::path& base_dir) {
  RunConfig rc;
  rc.base_dir = base_dir;
  rc.source = j;
  detail::StrictObject top(j, "config");

  top.read("seed", rc.seed);
  if (top.has("strategy")) rc.strategy = strategy_from_string(top.get<std::string>("strategy"));
  if (top.has("output_dir")) rc.output_dir = detail::resolve(base_dir, top.get<std::string>("output_dir"));
  if (top.has("tuner")) detail::read_tuner(detail::StrictObject(top.at("tuner"), "config.tuner"), rc.tuner);
  if (top.has("ga")) detail::read_ga(detail::StrictObject(top.at("ga"), "config.ga"), rc.ga);

  std::optional<FlagCatalog> catalog;
  if (top.has("catalog")) {
    detail::StrictObject c(top.at("catalog"), "config.catalog");
    const auto path = detail::resolve(base_dir, c.get<std::string>("path"));
    CompilerFamily family = CompilerFamily::gcc_like;
    if (c.has("family")) family = family_from_string(c.get<std::string>("family"));
    c.finish();
    catalog = catalog_from_file(path, family);
  }

  detail::StrictObject target(top.at("target"), "config.target");
  const bool synthetic = target.has("synthetic");
  const bool compiler = target.has("compiler");
  if (synthetic == compiler) throw ConfigError("config.target: give exactly one of 'synthetic' or 'compiler'");
  if (synthetic) {
    auto land = detail::read_landscape(detail::StrictObject(target.at("synthetic"), "config.target.synthetic"));
    rc.catalog = catalog ? *catalog : FlagCatalog::synthetic(land.size());
    if (rc.catalog.size() != land.size()) throw ConfigError("catalog size does not match landscape n");
    rc.target = std::move(land);
  } else {
    if (!catalog) throw ConfigError("config: a compiler target needs a catalog");
    rc.catalog = *catalog;
    rc.target = detail::read_compiler(detail::StrictObject(target.at("compiler"), "config.target.compiler"), base_dir);
  }
  target.finish();
  top.finish();

  rc.tuner.rng_seed = rc.seed;
  rc.tuner.validate();
  rc.ga.validate(rc.catalog.size());
  return rc;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return parse_run_config(j, std::filesystem::absolute(path).parent_path());
}

}  // namespace flagtune
