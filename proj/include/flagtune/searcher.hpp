#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "flagtune/core.hpp"
#include "flagtune/rng.hpp"

namespace flagtune {

struct Particle {
  Sequence position;
  std::vector<double> velocity;
  Sequence p_best_pos;
  double p_best_val = std::numeric_limits<double>::infinity();
};

struct Swarm {
  std::vector<Particle> particles;
  Sequence g_best_pos;
  double g_best_val = std::numeric_limits<double>::infinity();
  std::size_t iteration = 0;
};

struct SearchIteration {
  std::size_t iter = 0;
  double g_best_val = 0.0;
  bool improved = false;
  std::size_t part1_size = 0;  // 0 when the swarm improved (no partition)
};

struct SearchResult {
  Sequence best;
  double predicted = 0.0;
  std::vector<SearchIteration> history;
  // Every distinct position evaluated, in first-visit order, with its prediction.
  std::vector<std::pair<Sequence, double>> visited;
  Swarm swarm;

  // Visited positions ordered by prediction (ties: lexicographic).
  std::vector<std::pair<Sequence, double>> ranked() const {
    auto out = visited;
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second < b.second;
      return a.first < b.first;
    });
    return out;
  }
};

struct SearchHooks {
  std::function<bool()> stop;                          // polled once per iteration
  std::function<void(const Swarm&)> after_evolution;  // positions/velocities of the new step
};

// One particle per dataset row, starting at that row with its measured time as
// personal best. Velocities are uniform on [-1, 1].
inline Swarm init_swarm(const Dataset& data, Rng& rng) {
  if (data.empty()) throw Error("init_swarm: empty dataset");
  Swarm swarm;
  swarm.particles.reserve(data.size());
  for (const auto& e : data.entries()) {
    Particle p;
    p.position = e.sequence;
    p.p_best_pos = e.sequence;
    p.p_best_val = e.time_s;
    p.velocity.resize(e.sequence.size());
    for (auto& v : p.velocity) v = rng.uniform(-1.0, 1.0);
    swarm.particles.push_back(std::move(p));
  }
  const auto& best = data.best();
  swarm.g_best_pos = best.sequence;
  swarm.g_best_val = best.time_s;
  return swarm;
}

// v' = omega v + c1 r1 (pBest - x) + c2 r2 (gBest - x), clamped to [-v_max, v_max].
inline std::vector<double> velocity_update(const Particle& p, const Sequence& g_best, double omega, double c1,
                                           double c2, double v_max, double r1, double r2) {
  const auto n = p.velocity.size();
  if (p.position.size() != n || p.p_best_pos.size() != n || g_best.size() != n)
    throw Error("velocity_update: dimension mismatch");
  std::vector<double> v(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double x = p.position[j];
    const double next = omega * p.velocity[j] + c1 * r1 * (p.p_best_pos[j] - x) + c2 * r2 * (g_best[j] - x);
    v[j] = std::clamp(next, -v_max, v_max);
  }
  return v;
}

// Draws r1 then r2 from `rng`; one pair per particle per step.
inline std::vector<double> velocity_update(const Particle& p, const Sequence& g_best, double omega, double c1,
                                           double c2, double v_max, Rng& rng) {
  const double r1 = rng.uniform01();
  const double r2 = rng.uniform01();
  return velocity_update(p, g_best, omega, c1, c2, v_max, r1, r2);
}

inline double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

// x_j = 1 iff a fresh uniform draw falls below sigmoid(v_j).
inline Sequence binarize(std::span<const double> velocity, Rng& rng) {
  std::vector<std::uint8_t> bits(velocity.size());
  for (std::size_t j = 0; j < velocity.size(); ++j) bits[j] = rng.uniform01() < sigmoid(velocity[j]) ? 1 : 0;
  return Sequence(std::move(bits));
}

// Cosine of the angle between two bit vectors; 0 when either is all zeros.
inline double cosine_similarity(const Sequence& a, const Sequence& b) {
  if (a.size() != b.size()) throw Error("cosine_similarity: length mismatch");
  std::size_t dot = 0, na = 0, nb = 0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    dot += a[j] & b[j];
    na += a[j];
    nb += b[j];
  }
  if (na == 0 || nb == 0) return 0.0;
  return static_cast<double>(dot) / std::sqrt(static_cast<double>(na * nb));
}

// true = part1 (similar to the iteration best). Threshold defaults to the
// mean similarity over the swarm.
inline std::vector<bool> partition_by_similarity(const std::vector<Particle>& particles, const Sequence& anchor,
                                                 std::optional<double> threshold = {}) {
  std::vector<double> sim;
  sim.reserve(particles.size());
  double total = 0.0;
  for (const auto& p : particles) {
    sim.push_back(cosine_similarity(p.position, anchor));
    total += sim.back();
  }
  const double cut = threshold ? *threshold : total / static_cast<double>(particles.size());
  std::vector<bool> part1(particles.size());
  for (std::size_t i = 0; i < sim.size(); ++i) part1[i] = sim[i] >= cut;
  return part1;
}

// Binary PSO over a predicted objective (lower is better). After an iteration
// that fails to improve the global best, particles similar to the iteration's
// best position get c1 * c_boost and the rest c2 * c_boost for the next step.
template <class Objective>
SearchResult search(const Dataset& data, Objective&& predict, const TunerConfig& cfg, Rng& rng,
                    const SearchHooks& hooks = {}) {
  SearchResult out;
  Swarm swarm = init_swarm(data, rng);
  const std::size_t count = swarm.particles.size();

  const std::uint64_t stream_seed = rng.next_u64();
  std::vector<Rng> streams;
  streams.reserve(count);
  for (std::size_t i = 0; i < count; ++i) streams.push_back(Rng::substream(stream_seed, i));

  struct Coeff {
    double c1, c2;
  };
  std::vector<Coeff> coeff(count, Coeff{cfg.c1, cfg.c2});

  std::unordered_map<Sequence, double, SequenceHash> memo;
  auto evaluate = [&](const Sequence& s) {
    auto it = memo.find(s);
    if (it != memo.end()) return it->second;
    const double v = predict(s);
    memo.emplace(s, v);
    out.visited.emplace_back(s, v);
    return v;
  };

  std::vector<double> values(count);
  for (std::size_t iter = 1; iter <= cfg.swarm_iterations; ++iter) {
    if (hooks.stop && hooks.stop()) break;

    for (std::size_t i = 0; i < count; ++i) {
      auto& p = swarm.particles[i];
      if (iter > 1)
        p.velocity = velocity_update(p, swarm.g_best_pos, cfg.omega, coeff[i].c1, coeff[i].c2, cfg.v_max, streams[i]);
      p.position = binarize(p.velocity, streams[i]);
    }
    swarm.iteration = iter;
    if (hooks.after_evolution) hooks.after_evolution(swarm);

    std::size_t iter_best = 0;
    for (std::size_t i = 0; i < count; ++i) {
      auto& p = swarm.particles[i];
      values[i] = evaluate(p.position);
      if (values[i] < p.p_best_val) {
        p.p_best_val = values[i];
        p.p_best_pos = p.position;
      }
      if (values[i] < values[iter_best]) iter_best = i;
    }

    SearchIteration rec{iter, 0.0, false, 0};
    if (values[iter_best] < swarm.g_best_val) {
      swarm.g_best_val = values[iter_best];
      swarm.g_best_pos = swarm.particles[iter_best].position;
      std::fill(coeff.begin(), coeff.end(), Coeff{cfg.c1, cfg.c2});
      rec.improved = true;
    } else {
      const auto part1 =
          partition_by_similarity(swarm.particles, swarm.particles[iter_best].position, cfg.partition_threshold);
      for (std::size_t i = 0; i < count; ++i) {
        coeff[i] = part1[i] ? Coeff{cfg.c1 * cfg.c_boost, cfg.c2} : Coeff{cfg.c1, cfg.c2 * cfg.c_boost};
        rec.part1_size += part1[i] ? 1 : 0;
      }
    }
    rec.g_best_val = swarm.g_best_val;
    out.history.push_back(rec);
  }

  out.best = swarm.g_best_pos;
  out.predicted = swarm.g_best_val;
  out.swarm = std::move(swarm);
  return out;
}

}  // namespace flagtune
