#pragma once

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "flagtune/config.hpp"
#include "flagtune/report.hpp"
#include "flagtune/tuner.hpp"

namespace flagtune {

enum ExitCode : int { kExitOk = 0, kExitUser = 1, kExitEnvironment = 2 };

struct TuneOptions {
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  std::optional<double> budget_s;
  std::optional<std::string> strategy;
  std::optional<std::filesystem::path> out;
  bool allow_empty = false;
  bool resume = false;
};

struct BruteforceOptions {
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;
  std::optional<std::filesystem::path> compare;  // report.json to overlap against the optimum
  bool confirm = false;                          // real compiler with n <= 12
  bool force = false;                            // lift the size limits
};

struct ReportOptions {
  std::vector<std::filesystem::path> inputs;
  std::optional<std::filesystem::path> csv;
  std::optional<double> reference_speedup;
};

inline RunConfig apply_overrides(RunConfig rc, const TuneOptions& o) {
  if (o.seed) rc.seed = *o.seed;
  rc.tuner.rng_seed = rc.seed;
  if (o.budget_s) rc.tuner.time_budget_s = *o.budget_s;
  if (o.strategy) rc.strategy = strategy_from_string(*o.strategy);
  if (o.out) rc.output_dir = *o.out;
  rc.tuner.validate();
  return rc;
}

// Runs one tuning session and writes report.json, measurements.csv and the
// measurement journal into the output directory. Returns the report.
inline json run_tune(const TuneOptions& opts, std::ostream& log = std::cerr) {
  const auto rc = apply_overrides(load_run_config(opts.config), opts);
  const auto started_at = iso_now();
  if (!(rc.tuner.time_budget_s > 0.0) && !opts.allow_empty) throw ConfigError("budget exhausted before baseline");

  std::filesystem::create_directories(rc.output_dir);
  const auto journal = rc.output_dir / "journal.txt";
  std::vector<Measurement> previous;
  if (opts.resume && std::filesystem::exists(journal)) previous = MeasurementCache::load_journal(journal, rc.catalog.size());
  else std::filesystem::remove(journal);

  Evaluator ev(rc.target, rc.catalog, rc.tuner, journal);
  ev.restore(previous);

  json report;
  if (!(rc.tuner.time_budget_s > 0.0)) {
    const auto baseline = ev.measure_baseline();
    report = make_report(rc, ev, baseline, nullptr, started_at);
    log << "budget is empty; report holds the baseline only\n";
  } else {
    const auto outcome = run_strategy(ev, rc.strategy, rc.tuner, rc.ga);
    report = make_report(rc, ev, outcome.baseline, &outcome, started_at);
    log << to_string(rc.strategy) << ": best " << outcome.result.best_sequence.to_string() << " time "
        << outcome.result.measured_time_s << " s, speedup " << outcome.result.speedup << " after "
        << outcome.result.evaluations_used << " evaluations\n";
  }
  write_text(rc.output_dir / "report.json", report.dump(2) + "\n");
  write_text(rc.output_dir / "measurements.csv", measurements_csv(report));
  return report;
}

// Exhaustive search. Writes bruteforce.json (optimum, optional overlap) and
// bruteforce.csv (every sequence with its time).
inline json run_bruteforce(const BruteforceOptions& opts, std::ostream& log = std::cerr) {
  const auto rc = load_run_config(opts.config);
  const auto out_dir = opts.out ? *opts.out : rc.output_dir;
  const auto n = rc.catalog.size();
  const bool synthetic = std::holds_alternative<SyntheticLandscape>(rc.target);

  if (!opts.force) {
    if (synthetic && n > kBruteForceMaxBits)
      throw ConfigError("bruteforce refuses n=" + std::to_string(n) + " > 20 without --force");
    if (!synthetic && n > 12)
      throw ConfigError("bruteforce refuses n=" + std::to_string(n) + " > 12 on a real compiler without --force");
    if (!synthetic && !opts.confirm)
      throw ConfigError("bruteforce on a real compiler runs " + std::to_string(space_size(n)) +
                        " builds; pass --confirm");
  }
  if (n >= 40) throw ConfigError("bruteforce cannot enumerate n=" + std::to_string(n));

  std::string table = "sequence,time_s,status\n";
  Sequence best;
  double best_time = std::numeric_limits<double>::infinity();
  if (synthetic) {
    const auto& land = std::get<SyntheticLandscape>(rc.target);
    for (std::uint64_t idx = 0; idx < space_size(n); ++idx) {
      auto s = Sequence::from_index(idx, n);
      const double t = land.time(s);
      table += s.to_string() + "," + detail::format_double(t) + ",ok\n";
      if (t < best_time) {
        best_time = t;
        best = std::move(s);
      }
    }
  } else {
    TunerConfig cfg = rc.tuner;
    cfg.max_evaluations = 0;
    cfg.time_budget_s = std::numeric_limits<double>::infinity();
    Evaluator ev(rc.target, rc.catalog, cfg);
    ev.measure_baseline();
    for (std::uint64_t idx = 0; idx < space_size(n); ++idx) {
      auto s = Sequence::from_index(idx, n);
      const auto& m = ev.measure(s, "bruteforce");
      table += s.to_string() + "," + detail::format_double(m.exec_time_s) + "," + std::string(to_string(m.status)) + "\n";
      if (m.exec_time_s < best_time) {
        best_time = m.exec_time_s;
        best = std::move(s);
      }
    }
  }

  json out{{"format", "flagtune-bruteforce/1"},
           {"n", n},
           {"optimum", best.to_string()},
           {"optimum_flags", join(flag_tokens(rc.catalog, best))},
           {"time_s", best_time}};
  if (opts.compare) {
    const auto rep = load_report(*opts.compare);
    if (rep.at("result").is_null()) throw ConfigError("report has no result to compare");
    const auto tuned = Sequence::from_string(rep.at("result").at("best_sequence").get<std::string>());
    if (tuned.size() != n) throw ConfigError("report sequence width does not match the catalog");
    out["overlap"] = to_json(overlap(tuned, best, rc.catalog));
    out["compared_report"] = opts.compare->string();
  }
  write_text(out_dir / "bruteforce.json", out.dump(2) + "\n");
  write_text(out_dir / "bruteforce.csv", table);
  log << "optimum " << best.to_string() << " time " << best_time << " s\n";
  return out;
}

inline Comparison run_report(const ReportOptions& opts, std::ostream& out = std::cout) {
  std::vector<json> reports;
  for (const auto& p : find_reports(opts.inputs)) reports.push_back(load_report(p));
  const auto c = compare_reports(reports, opts.reference_speedup);
  out << comparison_text(c);
  if (opts.csv) write_text(*opts.csv, comparison_csv(c));
  return c;
}

// Maps exceptions onto exit codes: 1 for user errors, 2 for environment errors.
template <class Fn>
int guarded(Fn&& fn, std::ostream& err = std::cerr) {
  try {
    fn();
    return kExitOk;
  } catch (const EnvironmentError& e) {
    err << "error: " << e.what() << "\n";
    return kExitEnvironment;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUser;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUser;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitEnvironment;
  }
}

}  // namespace flagtune
