#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "flagtune/core.hpp"
#include "flagtune/rng.hpp"

namespace flagtune {

struct PairTerm {
  std::size_t i = 0;
  std::size_t j = 0;
  double weight = 0.0;
};

// Deceptive block: with u of its k bits set, contributes penalty*u/k while
// u < k and -penalty when the whole block is set.
struct TrapBlock {
  std::vector<std::size_t> bits;
  double penalty = 0.0;

  double value(const Sequence& x) const {
    std::size_t ones = 0;
    for (auto b : bits) ones += x[b];
    if (ones == bits.size()) return -penalty;
    return penalty * static_cast<double>(ones) / static_cast<double>(bits.size());
  }
};

// Pseudo-boolean run-time model standing in for a compiled program:
//   time(x) = base + sum_i w_i x_i + sum_(i,j) w_ij x_i x_j + sum_blocks trap(x)
// plus optional Gaussian noise that is a pure function of (noise_seed, x, repeat).
class SyntheticLandscape {
 public:
  SyntheticLandscape() = default;
  SyntheticLandscape(std::size_t n, double base_time_s, std::vector<double> linear_weights,
                     std::vector<PairTerm> pair_terms = {}, std::vector<TrapBlock> trap_blocks = {},
                     double noise_sd = 0.0, std::uint64_t noise_seed = 0)
      : n_(n),
        base_time_s_(base_time_s),
        linear_(std::move(linear_weights)),
        pairs_(std::move(pair_terms)),
        traps_(std::move(trap_blocks)),
        noise_sd_(noise_sd),
        noise_seed_(noise_seed),
        reference_(n) {
    validate();
  }

  std::size_t size() const { return n_; }
  double base_time_s() const { return base_time_s_; }
  const std::vector<double>& linear_weights() const { return linear_; }
  const std::vector<PairTerm>& pair_terms() const { return pairs_; }
  const std::vector<TrapBlock>& trap_blocks() const { return traps_; }
  double noise_sd() const { return noise_sd_; }
  std::uint64_t noise_seed() const { return noise_seed_; }

  // Sequence whose time serves as the baseline (all zeros unless set).
  const Sequence& reference() const { return reference_; }
  void set_reference(Sequence s) {
    if (s.size() != n_) throw ConfigError("landscape reference has wrong width");
    reference_ = std::move(s);
  }

  // Smallest value the noise-free formula can take: every negative term at once.
  double lower_bound() const {
    double lb = base_time_s_;
    for (double w : linear_) lb += std::min(w, 0.0);
    for (const auto& p : pairs_) lb += std::min(p.weight, 0.0);
    for (const auto& t : traps_) lb -= std::abs(t.penalty);
    return lb;
  }

  // Noise-free time; terms are summed in declaration order.
  double time(const Sequence& x) const {
    if (x.size() != n_) throw Error("sequence width does not match landscape");
    double t = base_time_s_;
    for (std::size_t i = 0; i < n_; ++i)
      if (x[i]) t += linear_[i];
    for (const auto& p : pairs_)
      if (x[p.i] && x[p.j]) t += p.weight;
    for (const auto& b : traps_) t += b.value(x);
    return t;
  }

  // One timed "run". Equal to time(x) when noise_sd == 0.
  double sample(const Sequence& x, std::size_t repeat) const {
    const double t = time(x);
    if (noise_sd_ <= 0.0) return t;
    Rng rng = Rng::substream(noise_seed_ ^ SequenceHash{}(x), repeat);
    return std::max(t + noise_sd_ * rng.normal(), 0.01 * t);
  }

 private:
  void validate() const {
    if (n_ == 0) throw ConfigError("landscape needs at least one bit");
    if (linear_.size() != n_) throw ConfigError("landscape: linear_weights length must equal n");
    if (!(base_time_s_ > 0.0)) throw ConfigError("landscape: base_time_s must be positive");
    for (const auto& p : pairs_)
      if (p.i >= n_ || p.j >= n_ || p.i == p.j) throw ConfigError("landscape: bad pair term index");
    for (const auto& t : traps_) {
      if (t.bits.empty()) throw ConfigError("landscape: empty trap block");
      for (auto b : t.bits)
        if (b >= n_) throw ConfigError("landscape: trap bit out of range");
    }
    if (noise_sd_ < 0.0) throw ConfigError("landscape: noise_sd must be non-negative");
    if (!(lower_bound() > 0.0))
      throw ConfigError("landscape: time can reach zero or below (lower bound " +
                        std::to_string(lower_bound()) + ")");
  }

  std::size_t n_ = 0;
  double base_time_s_ = 1.0;
  std::vector<double> linear_;
  std::vector<PairTerm> pairs_;
  std::vector<TrapBlock> traps_;
  double noise_sd_ = 0.0;
  std::uint64_t noise_seed_ = 0;
  Sequence reference_;
};

// Shape of randomly generated landscapes.
struct LandscapeShape {
  double base_time_s = 1.0;
  double linear_scale = 0.1;   // w_i ~ U(-s, s)
  double pair_density = 1.0;   // number of pair terms = round(density * n)
  double pair_scale = 0.04;    // w_ij ~ U(-s, s)
  std::size_t trap_block_size = 3;
  std::size_t trap_blocks = 1;
  double trap_penalty = 0.05;
  double noise_sd = 0.0;
  double min_time_s = 0.25;    // base is raised if the lower bound would fall below this
};

inline SyntheticLandscape generate_landscape(std::size_t n, std::uint64_t seed,
                                             const LandscapeShape& shape = {}) {
  Rng rng(seed);
  std::vector<double> linear(n);
  for (auto& w : linear) w = rng.uniform(-shape.linear_scale, shape.linear_scale);

  std::vector<PairTerm> pairs;
  if (n >= 2) {
    const auto count = static_cast<std::size_t>(shape.pair_density * static_cast<double>(n) + 0.5);
    for (std::size_t k = 0; k < count; ++k) {
      const auto i = static_cast<std::size_t>(rng.below(n));
      auto j = static_cast<std::size_t>(rng.below(n - 1));
      if (j >= i) ++j;
      pairs.push_back({std::min(i, j), std::max(i, j), rng.uniform(-shape.pair_scale, shape.pair_scale)});
    }
  }

  std::vector<TrapBlock> traps;
  if (shape.trap_block_size > 0 && n >= 2 * shape.trap_block_size) {
    // Blocks take disjoint bits from a shuffled index list.
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    const std::size_t blocks = std::min(shape.trap_blocks, n / shape.trap_block_size);
    for (std::size_t b = 0; b < blocks; ++b) {
      TrapBlock t;
      t.penalty = shape.trap_penalty;
      for (std::size_t k = 0; k < shape.trap_block_size; ++k) t.bits.push_back(order[b * shape.trap_block_size + k]);
      std::sort(t.bits.begin(), t.bits.end());
      traps.push_back(std::move(t));
    }
  }

  double negative = 0.0;
  for (double w : linear) negative += std::min(w, 0.0);
  for (const auto& p : pairs) negative += std::min(p.weight, 0.0);
  for (const auto& t : traps) negative -= t.penalty;
  const double base = std::max(shape.base_time_s, shape.min_time_s - negative);

  return SyntheticLandscape(n, base, std::move(linear), std::move(pairs), std::move(traps),
                            shape.noise_sd, Rng::mix(seed + 1));
}

inline constexpr std::size_t kBruteForceMaxBits = 20;

struct BruteForceResult {
  Sequence best;
  double time_s = 0.0;
};

// Exhaustive minimum of the noise-free landscape; ties go to the
// lexicographically smallest bit vector (enumeration order).
inline BruteForceResult brute_force_best(const SyntheticLandscape& land) {
  const auto n = land.size();
  if (n > kBruteForceMaxBits)
    throw ConfigError("brute force refuses n=" + std::to_string(n) + " (limit " +
                      std::to_string(kBruteForceMaxBits) + ")");
  BruteForceResult out{Sequence(n), std::numeric_limits<double>::infinity()};
  for (std::uint64_t idx = 0; idx < (std::uint64_t{1} << n); ++idx) {
    Sequence s = Sequence::from_index(idx, n);
    const double t = land.time(s);
    if (t < out.time_s) out = {std::move(s), t};
  }
  return out;
}

}  // namespace flagtune
