#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

#include "flagtune/baselines.hpp"
#include "flagtune/evaluator.hpp"
#include "flagtune/model_builder.hpp"
#include "flagtune/searcher.hpp"

namespace flagtune {

enum class Strategy { comptuner, high_only, one_time, rio, ga };

inline std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::comptuner: return "comptuner";
    case Strategy::high_only: return "high_only";
    case Strategy::one_time: return "one_time";
    case Strategy::rio: return "rio";
    case Strategy::ga: return "ga";
  }
  return "?";
}

inline Strategy strategy_from_string(std::string_view s) {
  if (s == "comptuner") return Strategy::comptuner;
  if (s == "high_only") return Strategy::high_only;
  if (s == "one_time") return Strategy::one_time;
  if (s == "rio") return Strategy::rio;
  if (s == "ga") return Strategy::ga;
  throw ConfigError("unknown strategy '" + std::string(s) + "' (expected comptuner, high_only, one_time, rio or ga)");
}

// Measures the k best-predicted visited positions that are not yet measured,
// then reports the best of everything measured in the run.
inline TuningResult finalize(const SearchResult& found, const Forest& forest, Evaluator& ev, const TunerConfig& cfg,
                             std::string strategy = "comptuner") {
  std::size_t measured = 0;
  for (const auto& [seq, predicted] : found.ranked()) {
    if (measured >= cfg.finalize_top_k) break;
    if (ev.cached(seq)) continue;
    if (ev.exhausted()) break;
    ev.measure(seq, "finalize");
    ++measured;
  }
  TuningResult r = make_result(ev, std::move(strategy));
  r.predicted_time_s = forest.predict_mean(r.best_sequence);
  return r;
}

struct RunOutcome {
  Measurement baseline;
  TuningResult result;
  std::optional<BuildState> build;
  std::optional<SearchResult> search;
};

// Baseline first, then the chosen strategy, all driven by one seeded stream.
inline RunOutcome run_strategy(Evaluator& ev, Strategy strategy, const TunerConfig& cfg, const GaParams& ga = {}) {
  const auto started = std::chrono::steady_clock::now();
  Rng rng(cfg.rng_seed);
  RunOutcome out;
  out.baseline = ev.measure_baseline();

  switch (strategy) {
    case Strategy::rio:
      out.result = rio_tune(ev, rng);
      break;
    case Strategy::ga:
      out.result = ga_tune(ev, ga, rng);
      break;
    case Strategy::comptuner:
    case Strategy::high_only:
    case Strategy::one_time: {
      const BuildMode mode = strategy == Strategy::comptuner   ? BuildMode::multi_phase
                             : strategy == Strategy::high_only ? BuildMode::high_only
                                                               : BuildMode::one_time;
      auto& st = out.build.emplace(build_model(ev, cfg, mode, rng));
      const Forest& forest = st.forest;
      SearchHooks hooks;
      hooks.stop = [&] { return ev.elapsed() >= cfg.time_budget_s; };
      auto& found = out.search.emplace(
          search(st.dataset, [&](const Sequence& s) { return forest.predict_mean(s); }, cfg, rng, hooks));
      out.result = finalize(found, forest, ev, cfg, std::string(to_string(strategy)));
      break;
    }
  }
  out.result.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return out;
}

}  // namespace flagtune
