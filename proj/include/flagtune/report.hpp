#pragma once

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "flagtune/catalog.hpp"
#include "flagtune/config.hpp"
#include "flagtune/tuner.hpp"

namespace flagtune {

inline constexpr const char* kReportFormat = "flagtune-report/1";

// Report fields that legitimately differ between otherwise identical runs.
inline const std::vector<std::string>& timestamp_fields() {
  static const std::vector<std::string> fields{"started_at", "wall_clock_s"};
  return fields;
}

// Copy of `report` with every timestamp field removed, at any depth.
inline json strip_timestamps(json report) {
  if (report.is_object()) {
    for (const auto& f : timestamp_fields()) report.erase(f);
    for (auto& [k, v] : report.items()) v = strip_timestamps(v);
  } else if (report.is_array()) {
    for (auto& v : report) v = strip_timestamps(v);
  }
  return report;
}

inline json to_json(const Measurement& m) {
  return {{"sequence", m.sequence.to_string()}, {"time_s", m.exec_time_s}, {"status", to_string(m.status)},
          {"penalized", m.penalized}, {"repeats", m.repeats}};
}

inline json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline json to_json(const TuningResult& r, const FlagCatalog& catalog) {
  return {{"strategy", r.strategy},
          {"best_sequence", r.best_sequence.to_string()},
          {"best_flags", join(flag_tokens(catalog, r.best_sequence))},
          {"predicted_time_s", optional_number(r.predicted_time_s)},
          {"measured_time_s", r.measured_time_s},
          {"baseline_time_s", r.baseline_time_s},
          {"speedup", r.speedup},
          {"evaluations_used", r.evaluations_used},
          {"time_c", r.time_c_s},
          {"wall_clock_s", r.wall_clock_s}};
}

inline std::string host_name() {
  char buf[256] = {};
  if (::gethostname(buf, sizeof buf - 1) != 0) return "unknown";
  return buf;
}

inline std::string compiler_fingerprint(const Target& target) {
  if (std::holds_alternative<SyntheticLandscape>(target)) return "synthetic";
  const auto& cmd = std::get<CompilerTarget>(target).compile_cmd;
  const auto exe = cmd.substr(0, cmd.find(' '));
  auto version = capture_shell(exe + " --version");
  version = version.substr(0, version.find('\n'));
  return version.empty() ? exe : version;
}

inline std::string iso_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  ::gmtime_r(&t, &tm);
  std::ostringstream ss;
  ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return ss.str();
}

inline json catalog_json(const FlagCatalog& catalog) {
  json flags = json::array();
  for (const auto& f : catalog.flags()) flags.push_back({{"name", f.name}, {"on", f.on_token}, {"off", f.off_token}});
  return {{"family", to_string(catalog.family())}, {"flags", flags}};
}

inline json journal_json(const Evaluator& ev, const RunOutcome* outcome) {
  json meas = json::array();
  for (const auto& h : ev.history()) {
    const auto* m = ev.lookup(h.sequence);
    meas.push_back({{"phase", h.phase},
                    {"sequence", h.sequence.to_string()},
                    {"time_s", h.time_s},
                    {"status", m ? to_string(m->status) : "ok"},
                    {"penalized", m && m->penalized},
                    {"at_s", h.at_s}});
  }
  json j{{"measurements", meas}};
  if (outcome && outcome->build) {
    const auto& st = *outcome->build;
    json phases = json::array();
    for (const auto& e : st.phase_log)
      phases.push_back({{"phase", e.phase},
                        {"picked_by", e.picked_by},
                        {"seq", e.sequence.to_string()},
                        {"predicted", optional_number(e.predicted)},
                        {"actual", e.actual},
                        {"acc", optional_number(e.accuracy)}});
    json passes = json::array();
    for (const auto& p : st.passes)
      passes.push_back({{"size_before", p.size_before},
                        {"size_after", p.size_after},
                        {"acc", p.accuracy},
                        {"roulette", p.roulette},
                        {"mean_acc", p.mean_accuracy}});
    j["phases"] = phases;
    j["passes"] = passes;
    j["stop_reason"] = st.stop_reason;
    j["training_size"] = st.dataset.size();
  }
  if (outcome && outcome->search) {
    json iters = json::array();
    for (const auto& it : outcome->search->history)
      iters.push_back({{"iter", it.iter},
                       {"g_best_val", it.g_best_val},
                       {"improved", it.improved},
                       {"part1_size", it.part1_size}});
    j["search"] = iters;
  }
  return j;
}

// Self-contained run report. `outcome` is null when the run stopped after the
// baseline (empty budget).
inline json make_report(const RunConfig& rc, const Evaluator& ev, const Measurement& baseline,
                        const RunOutcome* outcome, const std::string& started_at) {
  json cfg = rc.source;
  cfg["seed"] = rc.seed;
  cfg["strategy"] = to_string(rc.strategy);
  return {{"format", kReportFormat},
          {"strategy", to_string(rc.strategy)},
          {"seed", rc.seed},
          {"config", cfg},
          {"catalog", catalog_json(rc.catalog)},
          {"environment", {{"compiler", compiler_fingerprint(rc.target)}, {"host", host_name()}}},
          {"started_at", started_at},
          {"baseline", to_json(baseline)},
          {"result", outcome ? to_json(outcome->result, rc.catalog) : json(nullptr)},
          {"journal", journal_json(ev, outcome)}};
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw EnvironmentError("cannot write " + path.string());
  out << text;
}

inline std::string measurements_csv(const json& report) {
  std::string out = "phase,sequence,time_s,status,at_s\n";
  for (const auto& m : report.at("journal").at("measurements"))
    out += m.at("phase").get<std::string>() + "," + m.at("sequence").get<std::string>() + "," +
           detail::format_double(m.at("time_s").get<double>()) + "," + m.at("status").get<std::string>() + "," +
           detail::format_double(m.at("at_s").get<double>()) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Overlap between a tuned sequence and the exhaustive optimum
// ---------------------------------------------------------------------------

struct Overlap {
  double accuracy = 0.0;                // fraction of agreeing bits
  std::vector<std::string> unnecessary;  // enabled by the tuner, disabled in the optimum
  std::vector<std::string> missing;      // enabled in the optimum, disabled by the tuner
};

inline Overlap overlap(const Sequence& tuned, const Sequence& optimum, const FlagCatalog& catalog) {
  if (tuned.size() != optimum.size() || tuned.size() != catalog.size()) throw Error("overlap: width mismatch");
  Overlap o;
  std::size_t agree = 0;
  for (std::size_t i = 0; i < tuned.size(); ++i) {
    if (tuned[i] == optimum[i]) ++agree;
    else if (tuned[i]) o.unnecessary.push_back(catalog[i].name);
    else o.missing.push_back(catalog[i].name);
  }
  o.accuracy = static_cast<double>(agree) / static_cast<double>(tuned.size());
  return o;
}

inline json to_json(const Overlap& o) {
  return {{"accuracy", o.accuracy}, {"unnecessary", o.unnecessary}, {"missing", o.missing}};
}

// ---------------------------------------------------------------------------
// Cross-run comparison table
// ---------------------------------------------------------------------------

struct ComparisonRow {
  std::string strategy;
  std::size_t runs = 0;
  double median_speedup = 0.0;
  double median_time_c = 0.0;
  double best_speedup = 0.0;
  bool reached_reference = true;
};

struct Comparison {
  std::optional<double> reference_speedup;
  std::vector<ComparisonRow> rows;  // sorted by strategy name
};

inline json load_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open report " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("corrupt report " + path.string() + ": " + e.what());
  }
  if (!j.is_object() || j.value("format", "") != kReportFormat) throw ConfigError("not a flagtune report: " + path.string());
  const auto& r = j.at("result");
  if (!r.is_null()) {
    for (const char* key : {"measured_time_s", "baseline_time_s", "speedup", "time_c", "strategy"})
      if (!r.contains(key)) throw ConfigError("corrupt report " + path.string() + ": result lacks " + key);
  }
  return j;
}

// Report files named report.json under each directory (recursively), or the
// paths themselves when they are files.
inline std::vector<std::filesystem::path> find_reports(const std::vector<std::filesystem::path>& roots) {
  namespace fs = std::filesystem;
  std::vector<fs::path> out;
  for (const auto& root : roots) {
    if (fs::is_regular_file(root)) {
      out.push_back(root);
    } else if (fs::is_directory(root)) {
      for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file() && e.path().filename() == "report.json") out.push_back(e.path());
    } else {
      throw ConfigError("no such report or directory: " + root.string());
    }
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw ConfigError("no reports found");
  return out;
}

// Per strategy: median speedup and median time_c over runs. Speedups are
// recomputed from the raw times. A strategy none of whose runs reached the
// reference speedup is flagged (the reference defaults to the comptuner median).
inline Comparison compare_reports(const std::vector<json>& reports, std::optional<double> reference = {}) {
  std::map<std::string, std::vector<std::pair<double, double>>> by_strategy;
  for (const auto& rep : reports) {
    const auto& r = rep.at("result");
    if (r.is_null()) continue;
    const double speedup = compute_speedup(r.at("baseline_time_s").get<double>(), r.at("measured_time_s").get<double>());
    by_strategy[r.at("strategy").get<std::string>()].emplace_back(speedup, r.at("time_c").get<double>());
  }
  if (by_strategy.empty()) throw ConfigError("no completed runs among the reports");

  Comparison c;
  for (const auto& [name, runs] : by_strategy) {
    ComparisonRow row;
    row.strategy = name;
    row.runs = runs.size();
    std::vector<double> s, t;
    for (const auto& [sp, tc] : runs) {
      s.push_back(sp);
      t.push_back(tc);
    }
    row.median_speedup = median(s);
    row.median_time_c = median(t);
    row.best_speedup = *std::max_element(s.begin(), s.end());
    c.rows.push_back(row);
  }
  if (!reference) {
    for (const auto& row : c.rows)
      if (row.strategy == "comptuner") reference = row.median_speedup;
  }
  c.reference_speedup = reference;
  if (reference)
    for (auto& row : c.rows) row.reached_reference = row.best_speedup >= *reference;
  return c;
}

inline std::string comparison_text(const Comparison& c) {
  std::ostringstream ss;
  ss << std::left << std::setw(12) << "strategy" << std::right << std::setw(6) << "runs" << std::setw(16)
     << "median_speedup" << std::setw(16) << "median_time_c" << "\n";
  for (const auto& r : c.rows) {
    ss << std::left << std::setw(12) << r.strategy << std::right << std::setw(6) << r.runs << std::setw(16)
       << std::fixed << std::setprecision(4) << r.median_speedup << std::setw(16) << std::setprecision(2)
       << r.median_time_c << (r.reached_reference ? "" : "  x") << "\n";
  }
  if (c.reference_speedup)
    ss << "reference speedup " << std::fixed << std::setprecision(4) << *c.reference_speedup
       << " (x: no run reached it)\n";
  return ss.str();
}

inline std::string comparison_csv(const Comparison& c) {
  std::string out = "strategy,runs,median_speedup,median_time_c,reached_reference\n";
  for (const auto& r : c.rows)
    out += r.strategy + "," + std::to_string(r.runs) + "," + detail::format_double(r.median_speedup) + "," +
           detail::format_double(r.median_time_c) + "," + (r.reached_reference ? "true" : "false") + "\n";
  return out;
}

}  // namespace flagtune
