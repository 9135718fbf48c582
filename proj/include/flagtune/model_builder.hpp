#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "flagtune/acquisition.hpp"
#include "flagtune/core.hpp"
#include "flagtune/evaluator.hpp"
#include "flagtune/forest.hpp"

namespace flagtune {

enum class BuildMode {
  multi_phase,  // EI pick plus low-EI roulette pick when the model is inaccurate
  high_only,    // EI pick only
  one_time,     // random fill up to max_training, single fit
};

struct BuildEvent {
  std::string phase;      // "initial" | "enhance"
  std::string picked_by;  // "random" | "ei" | "roulette"
  Sequence sequence;
  std::optional<double> predicted;
  double actual = 0.0;
  std::optional<double> accuracy;
};

// One pass of the enhancement loop.
struct BuildPass {
  std::size_t size_before = 0;
  std::size_t size_after = 0;
  double accuracy = 0.0;
  bool roulette = false;
  double mean_accuracy = 0.0;
};

struct BuildState {
  Dataset dataset;
  Forest forest;
  std::vector<double> enh_accuracies;
  std::vector<BuildEvent> phase_log;
  std::vector<BuildPass> passes;
  std::string stop_reason;

  double mean_accuracy() const {
    if (enh_accuracies.empty()) return 0.0;
    return std::accumulate(enh_accuracies.begin(), enh_accuracies.end(), 0.0) /
           static_cast<double>(enh_accuracies.size());
  }
};

struct PoolExhausted : Error {
  PoolExhausted() : Error("pool exhausted: every candidate is already in the dataset") {}
};

// 1 - |predicted - actual| / actual
inline double prediction_accuracy(double predicted, double actual) {
  return 1.0 - std::abs(predicted - actual) / actual;
}

// Up to `pool` distinct random sequences that are not in `data`. When fewer
// than `pool` unseen sequences remain, all of them are returned in index order.
inline std::vector<Sequence> draw_candidates(Rng& rng, std::size_t n, std::size_t pool, const Dataset& data) {
  std::vector<Sequence> out;
  if (n < 63) {
    const std::uint64_t remaining = space_size(n) - data.size();
    if (remaining == 0) return out;
    if (remaining <= pool) {
      for (std::uint64_t idx = 0; idx < space_size(n); ++idx) {
        auto s = Sequence::from_index(idx, n);
        if (!data.contains(s)) out.push_back(std::move(s));
      }
      return out;
    }
  }
  std::unordered_set<Sequence, SequenceHash> seen;
  out.reserve(pool);
  while (out.size() < pool) {
    auto s = random_sequence(rng, n);
    if (data.contains(s) || !seen.insert(s).second) continue;
    out.push_back(std::move(s));
  }
  return out;
}

// Index of the largest EI; the earliest index wins ties.
inline std::size_t select_by_ei(std::span<const double> ei) {
  if (ei.empty()) throw Error("select_by_ei: no candidates");
  std::size_t best = 0;
  for (std::size_t i = 1; i < ei.size(); ++i)
    if (ei[i] > ei[best]) best = i;
  return best;
}

inline std::vector<double> ei_values(std::span<const Prediction> preds, double f_best) {
  std::vector<double> out;
  out.reserve(preds.size());
  for (const auto& p : preds) out.push_back(expected_improvement(p, f_best));
  return out;
}

inline Sequence select_by_ei(std::span<const Sequence> candidates, const Forest& forest, double f_best) {
  std::vector<double> ei;
  ei.reserve(candidates.size());
  for (const auto& c : candidates) ei.push_back(expected_improvement(forest.predict(c), f_best));
  return candidates[select_by_ei(ei)];
}

// Roulette wheel biased toward low EI: after sorting by EI descending, the
// candidate at 1-based rank i has weight i / (m(m+1)/2). Winners already in
// `data` are re-drawn.
inline std::size_t select_by_distribution(std::span<const Sequence> candidates, std::span<const double> ei,
                                          const Dataset& data, Rng& rng) {
  if (candidates.empty() || candidates.size() != ei.size()) throw Error("select_by_distribution: bad candidate list");
  if (std::all_of(candidates.begin(), candidates.end(), [&](const Sequence& s) { return data.contains(s); }))
    throw PoolExhausted();

  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ei[a] > ei[b]; });

  const double m = static_cast<double>(order.size());
  const double total = m * (m + 1.0) / 2.0;
  for (;;) {
    const double u = rng.uniform01() * total;
    double acc = 0.0;
    std::size_t pick = order.back();
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
      acc += static_cast<double>(rank + 1);
      if (u < acc) {
        pick = order[rank];
        break;
      }
    }
    if (!data.contains(candidates[pick])) return pick;
  }
}

inline Sequence select_by_distribution(std::span<const Sequence> candidates, const Forest& forest, double f_best,
                                       const Dataset& data, Rng& rng) {
  std::vector<double> ei;
  ei.reserve(candidates.size());
  for (const auto& c : candidates) ei.push_back(expected_improvement(forest.predict(c), f_best));
  return candidates[select_by_distribution(candidates, ei, data, rng)];
}

namespace detail {

inline void measure_into(Evaluator& ev, BuildState& st, const Sequence& s, std::string phase, std::string picked_by,
                         std::optional<double> predicted = {}) {
  const auto& m = ev.measure(s, picked_by);
  st.dataset.insert(s, m.exec_time_s);
  BuildEvent e{std::move(phase), std::move(picked_by), s, predicted, m.exec_time_s, {}};
  if (predicted) e.accuracy = prediction_accuracy(*predicted, m.exec_time_s);
  st.phase_log.push_back(std::move(e));
}

// Adds distinct random sequences until the dataset holds `target` rows or the
// budget or search space runs out.
inline void random_fill(Evaluator& ev, BuildState& st, std::size_t target, Rng& rng) {
  const auto n = ev.width();
  while (st.dataset.size() < target && !ev.exhausted() && st.dataset.size() < space_size(n)) {
    auto s = random_sequence(rng, n);
    if (st.dataset.contains(s)) continue;
    measure_into(ev, st, s, "initial", "random");
  }
}

}  // namespace detail

// Builds the run-time surrogate. The evaluator must already hold a baseline.
inline BuildState build_model(Evaluator& ev, const TunerConfig& cfg, BuildMode mode, Rng& rng) {
  cfg.validate();
  const ForestParams fp{.trees = cfg.trees};
  const auto n = ev.width();
  BuildState st;

  const std::size_t initial = mode == BuildMode::one_time ? cfg.max_training : cfg.ini_size;
  detail::random_fill(ev, st, initial, rng);
  if (st.dataset.size() < 2) throw Error("budget exhausted before the initial model could be fitted");
  if (std::all_of(st.phase_log.begin(), st.phase_log.end(),
                  [&](const BuildEvent& e) { return ev.lookup(e.sequence)->penalized; }))
    throw EnvironmentError("every initial measurement failed to compile or run; check the target and catalog");
  st.forest = Forest::fit(st.dataset, fp, rng);

  if (mode == BuildMode::one_time) {
    st.stop_reason = ev.exhausted() ? "budget" : "one_time";
    return st;
  }

  st.stop_reason = "max_training";
  while (st.dataset.size() < cfg.max_training) {
    if (ev.exhausted()) {
      st.stop_reason = "budget";
      break;
    }
    auto candidates = draw_candidates(rng, n, cfg.candidate_pool, st.dataset);
    if (candidates.empty()) {
      st.stop_reason = "space_exhausted";
      break;
    }
    std::vector<Prediction> preds;
    preds.reserve(candidates.size());
    for (const auto& c : candidates) preds.push_back(st.forest.predict(c));

    BuildPass pass;
    pass.size_before = st.dataset.size();

    const auto ei = ei_values(preds, st.dataset.best().time_s);
    const auto pick = select_by_ei(ei);
    detail::measure_into(ev, st, candidates[pick], "enhance", "ei", preds[pick].mean);
    pass.accuracy = *st.phase_log.back().accuracy;
    st.enh_accuracies.push_back(pass.accuracy);

    if (mode == BuildMode::multi_phase && pass.accuracy < cfg.acc_threshold_select &&
        st.dataset.size() < cfg.max_training && !ev.exhausted()) {
      // EI is recomputed against the incumbent after the EI pick was added.
      const auto ei_now = ei_values(preds, st.dataset.best().time_s);
      try {
        const auto r = select_by_distribution(candidates, ei_now, st.dataset, rng);
        detail::measure_into(ev, st, candidates[r], "enhance", "roulette", preds[r].mean);
        pass.roulette = true;
      } catch (const PoolExhausted&) {
      }
    }

    st.forest = Forest::fit(st.dataset, fp, rng);
    pass.size_after = st.dataset.size();
    pass.mean_accuracy = st.mean_accuracy();
    st.passes.push_back(pass);

    if (pass.mean_accuracy > cfg.acc_threshold_stop) {
      st.stop_reason = "accuracy";
      break;
    }
  }
  return st;
}

}  // namespace flagtune
