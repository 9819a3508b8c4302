#include "evfilter/experiment.hpp"

#include <spdlog/spdlog.h>

#include <sstream>
#include <utility>

#include "evfilter/errors.hpp"
#include "evfilter/events.hpp"

namespace evfilter {

std::string_view to_string(ExperimentMode mode) {
  switch (mode) {
    case ExperimentMode::kReal:
      return "real";
    case ExperimentMode::kRandomBaseline:
      return "random-baseline";
    case ExperimentMode::kSynthetic:
      return "synthetic";
  }
  return "?";
}

std::optional<ExperimentMode> parse_experiment_mode(std::string_view text) {
  for (auto mode : {ExperimentMode::kReal, ExperimentMode::kRandomBaseline, ExperimentMode::kSynthetic}) {
    if (text == to_string(mode)) return mode;
  }
  return std::nullopt;
}

void ExperimentConfig::validate() const {
  pipeline.validate();
  if (first_window < 1 || last_window < first_window) throw Error("window range must satisfy 1 <= first <= last");
  if (mode == ExperimentMode::kSynthetic) synth.validate();
}

namespace {

class Runner {
 public:
  Runner(const ExperimentConfig& config, std::ostream* csv, std::ostream* samples_out)
      : config_(config), csv_(csv), samples_out_(samples_out), window_(config.pipeline.window_ms) {
    pipeline_ = config.pipeline;
    if (config.mode == ExperimentMode::kRandomBaseline) pipeline_.feature_source = FeatureSource::kRandom;
  }

  // False once the last window has been processed.
  bool consume(RawRecord&& record) {
    if (!next_boundary_) next_boundary_ = record.ts + pipeline_.slide_ms;
    while (record.ts > *next_boundary_) {
      close_window();
      if (next_index_ > config_.last_window) return false;
    }
    auto events = map_record(record);
    try {
      window_.insert(std::make_shared<const WindowRecord>(WindowRecord{std::move(record), std::move(events), false}));
    } catch (const StaleEvent&) {
    }
    return true;
  }

  // Closes the window at end of stream if it is already due; a trailing
  // partial slide is not a window.
  ExperimentResult finish(ReplayStats replay) {
    result_.replay = replay;
    result_.windows_seen = next_index_ - 1;
    result_.summary = summarize(result_.rows, config_.first_window, config_.last_window);
    return std::move(result_);
  }

 private:
  void close_window() {
    const auto index = next_index_++;
    const auto boundary = *next_boundary_;
    *next_boundary_ += pipeline_.slide_ms;
    window_.evict_expired(boundary);
    if (index < config_.first_window || index > config_.last_window) return;

    auto cycle = run_microbatch_cycle(window_.snapshot(index), pipeline_);
    cycle.report.ranking.clear();
    if (samples_out_) {
      write_samples_csv(*samples_out_, cycle.samples, std::exchange(samples_header_, false));
    }
    auto row = cycle.report.metrics_row(config_.record_timing);
    spdlog::debug("window {}: n={} pos={} {}", index, row.n_samples, row.n_pos, row.stop_reason);
    if (csv_) {
      write_metrics_row(*csv_, row);
      csv_->flush();
    }
    result_.rows.push_back(std::move(row));
    result_.reports.push_back(std::move(cycle.report));
  }

  const ExperimentConfig& config_;
  std::ostream* csv_;
  std::ostream* samples_out_;
  bool samples_header_ = true;
  PipelineConfig pipeline_;
  SlidingWindow window_;
  std::optional<TimestampMs> next_boundary_;
  std::int64_t next_index_ = 1;
  ExperimentResult result_;
};

}  // namespace

ExperimentResult run_experiment(std::istream& in, const ExperimentConfig& config, std::ostream* csv,
                                std::ostream* samples_out, const std::atomic<bool>* stop) {
  config.validate();
  if (csv) write_metrics_header(*csv);

  std::istringstream generated;
  std::istream* source = &in;
  if (config.mode == ExperimentMode::kSynthetic) {
    std::ostringstream out;
    generate_synthetic_stream(config.synth, out);
    generated.str(out.str());
    source = &generated;
  }

  ReplayConfig replay_config;
  replay_config.clock = ClockMode::kData;
  replay_config.max_skew_ms = config.max_skew_ms;
  Replayer replayer(replay_config);
  Runner runner(config, csv, samples_out);
  const auto stats = replayer.run(*source, [&](RawRecord&& r) { return runner.consume(std::move(r)); }, stop);
  auto result = runner.finish(stats);
  if (result.summary.incomplete) {
    spdlog::warn("stream ended after window {}, before window {}", result.windows_seen, config.last_window);
  }
  return result;
}

}  // namespace evfilter
