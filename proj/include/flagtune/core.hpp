#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "flagtune/rng.hpp"

namespace flagtune {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad input supplied by the user (config, catalog, arguments).
struct ConfigError : Error {
  using Error::Error;
};

// Toolchain or host problem (missing compiler, baseline failure).
struct EnvironmentError : Error {
  using Error::Error;
};

struct ParseError : ConfigError {
  ParseError(std::size_t line, const std::string& what)
      : ConfigError("line " + std::to_string(line) + ": " + what), line_(line), detail_(what) {}
  std::size_t line() const { return line_; }
  const std::string& detail() const { return detail_; }

 private:
  std::size_t line_;
  std::string detail_;
};

// ---------------------------------------------------------------------------
// Flags
// ---------------------------------------------------------------------------

enum class CompilerFamily { gcc_like, llvm_like, synthetic };

inline std::string_view to_string(CompilerFamily f) {
  switch (f) {
    case CompilerFamily::gcc_like: return "gcc-like";
    case CompilerFamily::llvm_like: return "llvm-like";
    case CompilerFamily::synthetic: return "synthetic";
  }
  return "?";
}

inline CompilerFamily family_from_string(std::string_view s) {
  if (s == "gcc-like") return CompilerFamily::gcc_like;
  if (s == "llvm-like") return CompilerFamily::llvm_like;
  if (s == "synthetic") return CompilerFamily::synthetic;
  throw ConfigError("unknown compiler family '" + std::string(s) + "'");
}

struct FlagDef {
  std::string name;
  std::string on_token;
  std::string off_token;  // empty: omit the flag when disabled

  bool operator==(const FlagDef&) const = default;
};

class FlagCatalog {
 public:
  FlagCatalog() = default;
  FlagCatalog(std::vector<FlagDef> flags, CompilerFamily family)
      : flags_(std::move(flags)), family_(family) {
    if (flags_.empty()) throw ConfigError("empty catalog");
    std::unordered_set<std::string> seen;
    for (const auto& f : flags_) {
      if (f.name.empty()) throw ConfigError("flag with empty name");
      if (f.on_token == f.off_token)
        throw ConfigError("flag '" + f.name + "': on and off tokens are identical");
      if (!seen.insert(f.name).second) throw ConfigError("duplicate flag '" + f.name + "'");
    }
  }

  // Catalog of n placeholder flags x0..x{n-1}, used with synthetic landscapes.
  static FlagCatalog synthetic(std::size_t n) {
    std::vector<FlagDef> flags;
    flags.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::string name = "x" + std::to_string(i);
      flags.push_back({name, name, ""});
    }
    return FlagCatalog(std::move(flags), CompilerFamily::synthetic);
  }

  std::size_t size() const { return flags_.size(); }
  const FlagDef& operator[](std::size_t i) const { return flags_[i]; }
  const std::vector<FlagDef>& flags() const { return flags_; }
  CompilerFamily family() const { return family_; }

 private:
  std::vector<FlagDef> flags_;
  CompilerFamily family_ = CompilerFamily::synthetic;
};

// ---------------------------------------------------------------------------
// Sequence: one enable/disable bit per catalog flag, in catalog order.
// ---------------------------------------------------------------------------

class Sequence {
 public:
  Sequence() = default;
  explicit Sequence(std::size_t n) : bits_(n, 0) {}
  explicit Sequence(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
    for (auto b : bits_)
      if (b > 1) throw Error("sequence bit outside {0,1}");
  }
  Sequence(std::initializer_list<int> bits) {
    bits_.reserve(bits.size());
    for (int b : bits) {
      if (b != 0 && b != 1) throw Error("sequence bit outside {0,1}");
      bits_.push_back(static_cast<std::uint8_t>(b));
    }
  }

  std::size_t size() const { return bits_.size(); }
  std::uint8_t operator[](std::size_t i) const { return bits_[i]; }
  void set(std::size_t i, bool on) { bits_[i] = on ? 1 : 0; }
  void flip(std::size_t i) { bits_[i] ^= 1; }
  const std::vector<std::uint8_t>& bits() const { return bits_; }

  std::size_t count_ones() const {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
  }

  // Sequence whose bits are the binary digits of `index`, bit 0 most significant.
  static Sequence from_index(std::uint64_t index, std::size_t n) {
    Sequence s(n);
    for (std::size_t i = 0; i < n; ++i) s.bits_[i] = (index >> (n - 1 - i)) & 1U;
    return s;
  }

  // "0110..." in catalog order.
  std::string to_string() const {
    std::string out(bits_.size(), '0');
    for (std::size_t i = 0; i < bits_.size(); ++i)
      if (bits_[i]) out[i] = '1';
    return out;
  }

  static Sequence from_string(std::string_view s) {
    std::vector<std::uint8_t> bits;
    bits.reserve(s.size());
    for (char c : s) {
      if (c != '0' && c != '1') throw Error("invalid bit character in '" + std::string(s) + "'");
      bits.push_back(c == '1' ? 1 : 0);
    }
    return Sequence(std::move(bits));
  }

  // Packed form: nibble k holds bits 4k..4k+3, bit 4k in the high position.
  std::string to_hex() const {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out((bits_.size() + 3) / 4, '0');
    for (std::size_t i = 0; i < bits_.size(); ++i)
      if (bits_[i]) {
        const auto k = i / 4;
        const int value = (out[k] <= '9' ? out[k] - '0' : out[k] - 'a' + 10) | (8 >> (i % 4));
        out[k] = digits[value];
      }
    return out;
  }

  static Sequence from_hex(std::string_view hex, std::size_t n) {
    if (hex.size() != (n + 3) / 4) throw Error("hex sequence has wrong length for n=" + std::to_string(n));
    Sequence s(n);
    for (std::size_t k = 0; k < hex.size(); ++k) {
      const char c = hex[k];
      int value;
      if (c >= '0' && c <= '9') value = c - '0';
      else if (c >= 'a' && c <= 'f') value = c - 'a' + 10;
      else if (c >= 'A' && c <= 'F') value = c - 'A' + 10;
      else throw Error("invalid hex digit in '" + std::string(hex) + "'");
      for (std::size_t b = 0; b < 4; ++b) {
        const std::size_t i = 4 * k + b;
        const bool on = (value >> (3 - b)) & 1;
        if (i < n) s.bits_[i] = on ? 1 : 0;
        else if (on) throw Error("hex sequence has bits set past n");
      }
    }
    return s;
  }

  bool operator==(const Sequence&) const = default;
  std::strong_ordering operator<=>(const Sequence& o) const { return bits_ <=> o.bits_; }

 private:
  std::vector<std::uint8_t> bits_;
};

struct SequenceHash {
  std::size_t operator()(const Sequence& s) const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL ^ s.size();
    std::uint64_t word = 0;
    std::size_t filled = 0;
    for (auto b : s.bits()) {
      word = (word << 1) | b;
      if (++filled == 64) {
        h = Rng::mix(h ^ word);
        word = 0;
        filled = 0;
      }
    }
    return static_cast<std::size_t>(Rng::mix(h ^ word ^ (filled << 56)));
  }
};

// Each bit an independent fair coin.
inline Sequence random_sequence(Rng& rng, std::size_t n) {
  if (n == 0) throw Error("random_sequence: n must be positive");
  std::vector<std::uint8_t> bits(n);
  for (auto& b : bits) b = rng.coin() ? 1 : 0;
  return Sequence(std::move(bits));
}

// Number of sequences of width n, saturating for n >= 63.
inline std::uint64_t space_size(std::size_t n) {
  return n >= 63 ? std::uint64_t{1} << 63 : std::uint64_t{1} << n;
}

// ---------------------------------------------------------------------------
// Measurements and datasets
// ---------------------------------------------------------------------------

enum class MeasureStatus { ok, compile_error, runtime_error, timeout };

inline std::string_view to_string(MeasureStatus s) {
  switch (s) {
    case MeasureStatus::ok: return "ok";
    case MeasureStatus::compile_error: return "compile_error";
    case MeasureStatus::runtime_error: return "runtime_error";
    case MeasureStatus::timeout: return "timeout";
  }
  return "?";
}

inline MeasureStatus status_from_string(std::string_view s) {
  if (s == "ok") return MeasureStatus::ok;
  if (s == "compile_error") return MeasureStatus::compile_error;
  if (s == "runtime_error") return MeasureStatus::runtime_error;
  if (s == "timeout") return MeasureStatus::timeout;
  throw Error("unknown measurement status '" + std::string(s) + "'");
}

struct Measurement {
  Sequence sequence;
  double exec_time_s = 0.0;
  MeasureStatus status = MeasureStatus::ok;
  bool penalized = false;
  std::vector<double> repeats;

  bool ok() const { return status == MeasureStatus::ok; }
  bool operator==(const Measurement&) const = default;
};

inline double median(std::vector<double> v) {
  if (v.empty()) throw Error("median of empty list");
  std::sort(v.begin(), v.end());
  const auto mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

// Labeled training rows in insertion order; sequences are unique.
class Dataset {
 public:
  struct Entry {
    Sequence sequence;
    double time_s;
  };

  // Returns false (and leaves the dataset unchanged) when `seq` is present.
  bool insert(const Sequence& seq, double time_s) {
    if (!entries_.empty() && seq.size() != width())
      throw Error("dataset width mismatch");
    auto [it, fresh] = index_.try_emplace(seq, entries_.size());
    if (!fresh) return false;
    entries_.push_back({seq, time_s});
    return true;
  }

  bool contains(const Sequence& seq) const { return index_.count(seq) != 0; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::size_t width() const { return entries_.empty() ? 0 : entries_.front().sequence.size(); }
  const Entry& operator[](std::size_t i) const { return entries_[i]; }
  const std::vector<Entry>& entries() const { return entries_; }

  std::size_t best_index() const {
    if (entries_.empty()) throw Error("best() of empty dataset");
    std::size_t best = 0;
    for (std::size_t i = 1; i < entries_.size(); ++i)
      if (entries_[i].time_s < entries_[best].time_s) best = i;
    return best;
  }
  const Entry& best() const { return entries_[best_index()]; }

 private:
  std::vector<Entry> entries_;
  std::unordered_map<Sequence, std::size_t, SequenceHash> index_;
};

// ---------------------------------------------------------------------------
// Configuration and results
// ---------------------------------------------------------------------------

struct TunerConfig {
  std::size_t ini_size = 2;
  double acc_threshold_select = 0.95;
  double acc_threshold_stop = 0.96;
  std::size_t max_training = 50;
  std::size_t candidate_pool = 1000;
  double omega = 0.6;
  double c1 = 2.0;
  double c2 = 2.0;
  double c_boost = 1.5;
  double v_max = 4.0;
  std::size_t swarm_iterations = 500;
  double time_budget_s = 6000.0;
  std::uint64_t rng_seed = 0;
  std::size_t repeats_per_measurement = 3;
  double penalty_factor = 2.0;
  std::size_t trees = 100;
  std::size_t finalize_top_k = 5;
  std::size_t max_evaluations = 0;  // 0: limited by time_budget_s only
  // Similarity cut between the two particle groups; unset means the swarm mean.
  std::optional<double> partition_threshold;

  void validate() const {
    if (!(0.0 < acc_threshold_select && acc_threshold_select <= acc_threshold_stop &&
          acc_threshold_stop < 1.0))
      throw ConfigError("need 0 < acc_threshold_select <= acc_threshold_stop < 1");
    if (ini_size < 2) throw ConfigError("ini_size must be at least 2");
    if (max_training <= ini_size) throw ConfigError("max_training must exceed ini_size");
    if (!(v_max > 0.0)) throw ConfigError("v_max must be positive");
    if (candidate_pool == 0) throw ConfigError("candidate_pool must be positive");
    if (repeats_per_measurement == 0) throw ConfigError("repeats_per_measurement must be positive");
    if (!(penalty_factor > 1.0)) throw ConfigError("penalty_factor must exceed 1");
    if (trees == 0) throw ConfigError("trees must be positive");
    if (c_boost < 1.0) throw ConfigError("c_boost must be >= 1");
    if (time_budget_s < 0.0) throw ConfigError("time_budget_s must be non-negative");
  }
};

struct HistoryEntry {
  std::string phase;
  Sequence sequence;
  double time_s;
  double at_s;  // budget clock when the measurement finished
};

struct TuningResult {
  std::string strategy;
  Sequence best_sequence;
  std::optional<double> predicted_time_s;
  double measured_time_s = 0.0;
  double baseline_time_s = 0.0;
  double speedup = 0.0;
  std::size_t evaluations_used = 0;
  double time_c_s = 0.0;
  double wall_clock_s = 0.0;
  std::vector<HistoryEntry> history;
};

// baseline / tuned; > 1 means the tuned flags are faster.
inline double compute_speedup(double baseline_time_s, double measured_time_s) {
  if (!(baseline_time_s > 0.0) || !(measured_time_s > 0.0))
    throw Error("speedup needs positive times");
  return baseline_time_s / measured_time_s;
}

}  // namespace flagtune
