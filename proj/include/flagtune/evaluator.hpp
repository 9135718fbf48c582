#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "flagtune/catalog.hpp"
#include "flagtune/core.hpp"
#include "flagtune/landscape.hpp"
#include "flagtune/process.hpp"

namespace flagtune {

// A real program built and timed through shell command templates.
//   compile_cmd: must contain {FLAGS}, {SRC} and {OUT}
//   run_cmd:     must contain {BIN}
struct CompilerTarget {
  std::string compile_cmd;
  std::string run_cmd = "{BIN}";
  std::vector<std::string> sources;
  std::filesystem::path workdir;
  std::string baseline_flags = "-O3";
  double run_timeout_s = 60.0;
  double compile_timeout_s = 600.0;
  std::optional<std::filesystem::path> expected_output;

  void validate() const {
    for (const char* ph : {"{FLAGS}", "{SRC}", "{OUT}"})
      if (compile_cmd.find(ph) == std::string::npos)
        throw ConfigError(std::string("compile command lacks placeholder ") + ph);
    if (run_cmd.find("{BIN}") == std::string::npos) throw ConfigError("run command lacks placeholder {BIN}");
    if (sources.empty()) throw ConfigError("compiler target has no sources");
    if (workdir.empty()) throw ConfigError("compiler target has no workdir");
    if (!(run_timeout_s > 0.0) || !(compile_timeout_s > 0.0)) throw ConfigError("timeouts must be positive");
  }
};

using Target = std::variant<SyntheticLandscape, CompilerTarget>;

namespace detail {

inline std::string replace_all(std::string s, std::string_view from, std::string_view to) {
  for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size())
    s.replace(pos, from.size(), to);
  return s;
}

inline std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out += c;
  }
  return out + "'";
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw EnvironmentError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

// Sequence -> Measurement map with an optional append-only journal.
// Journal line: "<bits_hex>, <status>, <time_s>, <r1;r2;...>"
class MeasurementCache {
 public:
  MeasurementCache() = default;
  explicit MeasurementCache(std::filesystem::path journal) : journal_(std::move(journal)) {}

  const Measurement* find(const Sequence& s) const {
    auto it = map_.find(s);
    return it == map_.end() ? nullptr : &it->second;
  }

  const Measurement& insert(Measurement m) {
    if (!journal_.empty()) {
      std::ofstream out(journal_, std::ios::app);
      out << journal_line(m) << '\n';
    }
    auto key = m.sequence;
    return map_.insert_or_assign(std::move(key), std::move(m)).first->second;
  }

  std::size_t size() const { return map_.size(); }
  const std::filesystem::path& journal() const { return journal_; }

  static std::string journal_line(const Measurement& m) {
    std::string reps;
    for (std::size_t i = 0; i < m.repeats.size(); ++i) {
      if (i) reps += ';';
      reps += detail::format_double(m.repeats[i]);
    }
    return m.sequence.to_hex() + ", " + std::string(to_string(m.status)) + ", " +
           detail::format_double(m.exec_time_s) + ", " + reps;
  }

  static Measurement parse_journal_line(const std::string& line, std::size_t n) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(detail::trim(f));
    if (fields.size() == 3 && !line.empty() && line.back() == ',') fields.emplace_back();
    if (fields.size() != 4) throw Error("malformed journal line: " + line);
    Measurement m;
    m.sequence = Sequence::from_hex(fields[0], n);
    m.status = status_from_string(fields[1]);
    m.exec_time_s = std::stod(fields[2]);
    m.penalized = !m.ok();
    std::stringstream rs(fields[3]);
    while (std::getline(rs, f, ';'))
      if (!detail::trim(f).empty()) m.repeats.push_back(std::stod(f));
    return m;
  }

  static std::vector<Measurement> load_journal(const std::filesystem::path& path, std::size_t n) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open journal " + path.string());
    std::vector<Measurement> out;
    std::string line;
    while (std::getline(in, line))
      if (!detail::trim(line).empty()) out.push_back(parse_journal_line(line, n));
    return out;
  }

 private:
  std::unordered_map<Sequence, Measurement, SequenceHash> map_;
  std::filesystem::path journal_;
};

// Budget clock. Compiler targets use wall clock since construction; synthetic
// targets advance a simulated clock by the time each measurement would have
// taken (sum of its timed runs), which keeps budgets and time_c reproducible.
class BudgetClock {
 public:
  explicit BudgetClock(bool simulated) : simulated_(simulated), start_(std::chrono::steady_clock::now()) {}
  double now() const {
    if (simulated_) return simulated_s_;
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }
  void charge(double seconds) {
    if (simulated_) simulated_s_ += seconds;
  }
  bool simulated() const { return simulated_; }

 private:
  bool simulated_;
  double simulated_s_ = 0.0;
  std::chrono::steady_clock::time_point start_;
};

// Obtains actual execution times. Each sequence is measured at most once;
// repeated requests are served from the cache.
class Evaluator {
 public:
  Evaluator(Target target, FlagCatalog catalog, TunerConfig cfg,
            std::filesystem::path journal = {})
      : target_(std::move(target)),
        catalog_(std::move(catalog)),
        cfg_(std::move(cfg)),
        cache_(std::move(journal)),
        clock_(std::holds_alternative<SyntheticLandscape>(target_)) {
    if (const auto* land = std::get_if<SyntheticLandscape>(&target_)) {
      if (land->size() != catalog_.size()) throw ConfigError("landscape width does not match catalog");
    } else {
      std::get<CompilerTarget>(target_).validate();
    }
  }

  const FlagCatalog& catalog() const { return catalog_; }
  const TunerConfig& config() const { return cfg_; }
  const Target& target() const { return target_; }
  std::size_t width() const { return catalog_.size(); }
  bool synthetic() const { return std::holds_alternative<SyntheticLandscape>(target_); }

  double elapsed() const { return clock_.now(); }
  std::size_t evaluations() const { return evaluations_; }
  std::size_t compiler_invocations() const { return compiler_invocations_; }
  const std::vector<HistoryEntry>& history() const { return history_; }
  std::optional<double> baseline_time() const { return baseline_time_; }
  std::optional<double> worst_ok_time() const { return worst_ok_; }

  bool cached(const Sequence& s) const { return cache_.find(s) != nullptr; }
  std::size_t cache_size() const { return cache_.size(); }
  const Measurement* lookup(const Sequence& s) const { return cache_.find(s); }

  bool exhausted() const {
    if (cfg_.max_evaluations > 0 && evaluations_ >= cfg_.max_evaluations) return true;
    return clock_.now() >= cfg_.time_budget_s;
  }

  // Preloads measurements from a previous journal; they are not charged.
  void restore(const std::vector<Measurement>& previous) {
    for (const auto& m : previous) {
      if (m.sequence.size() != width()) throw ConfigError("journal width does not match catalog");
      if (cached(m.sequence)) continue;
      note_ok(m);
      const auto& stored = cache_.insert(m);
      history_.push_back({"journal", stored.sequence, stored.exec_time_s, clock_.now()});
    }
  }

  const Measurement& measure(const Sequence& seq, std::string_view phase = "") {
    if (seq.size() != width()) throw Error("sequence width does not match catalog");
    if (const auto* hit = cache_.find(seq)) return *hit;

    Measurement m = std::visit([&](const auto& t) { return run(t, seq); }, target_);
    if (!m.ok()) {
      m.penalized = true;
      m.exec_time_s = penalty_time();
    }
    note_ok(m);
    ++evaluations_;
    const auto& stored = cache_.insert(std::move(m));
    history_.push_back({std::string(phase), stored.sequence, stored.exec_time_s, clock_.now()});
    return stored;
  }

  // Baseline under the preset flags (compiler) or the reference sequence
  // (synthetic). Any failure is fatal.
  Measurement measure_baseline() {
    Measurement m;
    if (const auto* land = std::get_if<SyntheticLandscape>(&target_)) {
      m = run(*land, land->reference());
    } else {
      const auto& t = std::get<CompilerTarget>(target_);
      m = run_compiled(t, t.baseline_flags, Sequence(width()), /*fatal=*/true);
    }
    baseline_time_ = m.exec_time_s;
    return m;
  }

  // Lowest-time measurement of this run (earliest on ties), if any.
  std::optional<HistoryEntry> best() const {
    std::optional<HistoryEntry> out;
    for (const auto& h : history_)
      if (!out || h.time_s < out->time_s) out = h;
    return out;
  }

 private:
  void note_ok(const Measurement& m) {
    if (m.ok() && (!worst_ok_ || m.exec_time_s > *worst_ok_)) worst_ok_ = m.exec_time_s;
  }

  double penalty_time() const {
    if (worst_ok_) return cfg_.penalty_factor * *worst_ok_;
    if (baseline_time_) return cfg_.penalty_factor * *baseline_time_;
    throw Error("cannot penalize a failed measurement before the baseline is known");
  }

  Measurement run(const SyntheticLandscape& land, const Sequence& seq) {
    Measurement m;
    m.sequence = seq;
    double spent = 0.0;
    for (std::size_t r = 0; r < cfg_.repeats_per_measurement; ++r) {
      m.repeats.push_back(land.sample(seq, r));
      spent += m.repeats.back();
    }
    m.exec_time_s = median(m.repeats);
    clock_.charge(spent);
    return m;
  }

  Measurement run(const CompilerTarget& t, const Sequence& seq) {
    return run_compiled(t, join(flag_tokens(catalog_, seq)), seq, /*fatal=*/false);
  }

  Measurement run_compiled(const CompilerTarget& t, const std::string& flags, const Sequence& seq, bool fatal) {
    namespace fs = std::filesystem;
    Measurement m;
    m.sequence = seq;
    std::error_code ec;
    fs::create_directories(t.workdir, ec);
    const fs::path bin = fs::absolute(t.workdir) / ((fatal ? std::string("baseline") : "seq_" + seq.to_hex()) + ".bin");
    fs::remove(bin, ec);

    std::string sources;
    for (const auto& s : t.sources) {
      if (!sources.empty()) sources += ' ';
      sources += detail::shell_quote(s);
    }
    std::string cmd = detail::replace_all(t.compile_cmd, "{FLAGS}", flags);
    cmd = detail::replace_all(cmd, "{SRC}", sources);
    cmd = detail::replace_all(cmd, "{OUT}", detail::shell_quote(bin.string()));

    ++compiler_invocations_;
    const auto built = run_shell(cmd, t.compile_timeout_s, {}, t.workdir);
    if (built.timed_out || built.exit_code != 0 || !fs::exists(bin)) {
      if (fatal) {
        if (built.exit_code == 127)
          throw EnvironmentError("compiler not found while building the baseline: " + cmd);
        throw EnvironmentError("baseline build failed (exit " + std::to_string(built.exit_code) + "): " + cmd);
      }
      m.status = MeasureStatus::compile_error;
      return m;
    }

    const fs::path out_file = fs::absolute(t.workdir) / "run.out";
    const std::string run_cmd = detail::replace_all(t.run_cmd, "{BIN}", detail::shell_quote(bin.string()));
    std::optional<std::string> expected;
    if (t.expected_output) expected = detail::read_file(*t.expected_output);

    for (std::size_t r = 0; r < cfg_.repeats_per_measurement; ++r) {
      const auto ran = run_shell(run_cmd, t.run_timeout_s, out_file, t.workdir);
      MeasureStatus bad = MeasureStatus::ok;
      if (ran.timed_out) bad = MeasureStatus::timeout;
      else if (ran.exit_code != 0) bad = MeasureStatus::runtime_error;
      else if (expected && detail::read_file(out_file) != *expected) bad = MeasureStatus::runtime_error;
      if (bad != MeasureStatus::ok) {
        fs::remove(bin, ec);
        if (fatal) throw EnvironmentError("baseline run failed (" + std::string(to_string(bad)) + "): " + run_cmd);
        m.status = bad;
        m.repeats.clear();
        return m;
      }
      m.repeats.push_back(ran.seconds);
    }
    fs::remove(bin, ec);
    m.exec_time_s = median(m.repeats);
    return m;
  }

  Target target_;
  FlagCatalog catalog_;
  TunerConfig cfg_;
  MeasurementCache cache_;
  BudgetClock clock_;
  std::vector<HistoryEntry> history_;
  std::optional<double> baseline_time_;
  std::optional<double> worst_ok_;
  std::size_t evaluations_ = 0;
  std::size_t compiler_invocations_ = 0;
};

}  // namespace flagtune
