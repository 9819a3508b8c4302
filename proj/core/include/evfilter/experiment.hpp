#pragma once

#include <atomic>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "evfilter/metrics.hpp"
#include "evfilter/pipeline.hpp"
#include "evfilter/replay.hpp"
#include "evfilter/synth.hpp"

namespace evfilter {

enum class ExperimentMode { kReal, kRandomBaseline, kSynthetic };

std::string_view to_string(ExperimentMode mode);
std::optional<ExperimentMode> parse_experiment_mode(std::string_view text);

struct ExperimentConfig {
  PipelineConfig pipeline;
  ExperimentMode mode = ExperimentMode::kReal;
  std::int64_t first_window = 20;
  std::int64_t last_window = 200;
  bool record_timing = false;  // train_ms in the CSV; off keeps runs byte-identical
  TimestampMs max_skew_ms = 5000;
  SynthConfig synth;  // synthetic mode only

  void validate() const;
};

struct ExperimentResult {
  std::vector<MetricsRow> rows;
  std::vector<WindowReport> reports;  // rankings omitted
  MetricsSummary summary;
  ReplayStats replay;
  std::int64_t windows_seen = 0;
};

// Replays the stream on its own timestamps (no pacing), retrains at every
// slide boundary inside [first_window, last_window] and stops after the
// last one. Window k closes at t0 + k * slide, t0 being the first record.
// Synthetic mode ignores `in` and generates the stream from config.synth.
// Each finished row is written to `csv` as it is produced, when given.
// Labeled samples of every processed window go to `samples_out` when given.
// Setting `stop` ends the run early; rows written so far stay valid.
ExperimentResult run_experiment(std::istream& in, const ExperimentConfig& config, std::ostream* csv = nullptr,
                                std::ostream* samples_out = nullptr, const std::atomic<bool>* stop = nullptr);

}  // namespace evfilter
