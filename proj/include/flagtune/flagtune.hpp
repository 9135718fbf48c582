#pragma once

#include "flagtune/acquisition.hpp"
#include "flagtune/baselines.hpp"
#include "flagtune/catalog.hpp"
#include "flagtune/commands.hpp"
#include "flagtune/config.hpp"
#include "flagtune/core.hpp"
#include "flagtune/evaluator.hpp"
#include "flagtune/forest.hpp"
#include "flagtune/landscape.hpp"
#include "flagtune/model_builder.hpp"
#include "flagtune/report.hpp"
#include "flagtune/rng.hpp"
#include "flagtune/searcher.hpp"
#include "flagtune/tuner.hpp"
