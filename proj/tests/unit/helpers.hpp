#pragma once

#include <atomic>
#include <filesystem>
#include <string>
#include <unistd.h>

#include "flagtune/flagtune.hpp"

namespace testutil {

// Fresh, empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& tag) {
  static std::atomic<int> counter{0};
  auto p = std::filesystem::temp_directory_path() /
           ("flagtune_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline flagtune::SyntheticLandscape linear_landscape(std::vector<double> w, double base = 1.0) {
  const auto n = w.size();
  return flagtune::SyntheticLandscape(n, base, std::move(w), {}, {}, 0.0, 0);
}

inline flagtune::SyntheticLandscape constant_landscape(std::size_t n, double value) {
  return flagtune::SyntheticLandscape(n, value, std::vector<double>(n, 0.0), {}, {}, 0.0, 0);
}

inline flagtune::Evaluator synthetic_evaluator(const flagtune::SyntheticLandscape& land, flagtune::TunerConfig cfg = {}) {
  return flagtune::Evaluator(land, flagtune::FlagCatalog::synthetic(land.size()), cfg);
}

}  // namespace testutil
