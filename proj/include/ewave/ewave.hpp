#pragma once

#include "ewave/market_data.hpp"
#include "ewave/pivots.hpp"
#include "ewave/wave_model.hpp"
#include "ewave/pattern_search.hpp"
#include "ewave/levels_signals.hpp"
#include "ewave/signal_engine.hpp"
#include "ewave/backtester.hpp"
#include "ewave/replay.hpp"
#include "ewave/json_io.hpp"
#include "ewave/chart.hpp"
#include "ewave/pipeline_report.hpp"
#include "ewave/cli.hpp"
