#pragma once

#include <atomic>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evfilter/features.hpp"
#include "evfilter/metrics.hpp"
#include "evfilter/mlp.hpp"
#include "evfilter/replay.hpp"
#include "evfilter/trainer.hpp"
#include "evfilter/window.hpp"

namespace evfilter {

enum class FeatureSource {
  kStream,  // features assembled from the window
  kRandom,  // i.i.d. uniform features, labels unchanged (baseline)
};

struct PipelineConfig {
  TimestampMs window_ms = kDefaultWindowMs;
  TimestampMs slide_ms = kDefaultSlideMs;
  double top_percentile = 0.9;  // keep scores >= this quantile
  FeatureOptions features;
  FeatureSource feature_source = FeatureSource::kStream;
  TrainConfig train;
  std::uint64_t seed = 0;

  void validate() const;
};

struct ScoredEvent {
  std::string record_id;
  double score = 0.0;
  bool operator==(const ScoredEvent&) const = default;
};

// Outcome of one micro-batch cycle.
struct WindowReport {
  std::int64_t window_index = 0;
  TimestampMs boundary_ts = 0;
  TimestampMs start_ts = 0;
  std::size_t n_samples = 0;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  // Class counts of the oversampled training input; equal whenever trained.
  std::size_t balanced_pos = 0;
  std::size_t balanced_neg = 0;
  bool skipped = false;
  std::string skip_reason;  // "skipped_degenerate" or "skipped_numeric"
  std::optional<TrainReport> training;
  std::vector<ScoredEvent> ranking;  // score descending, ties by record id
  std::optional<double> threshold;

  // Metrics computed on the held-out test fold. train_ms is reported only
  // when `with_timing` is set, since it is not reproducible.
  MetricsRow metrics_row(bool with_timing) const;
};

struct CycleResult {
  std::optional<MlpModel> model;  // absent when the window was skipped
  WindowReport report;
  std::vector<LabeledSample> samples;  // one per record, before oversampling
};

// One retraining cycle on a frozen window: assemble features and retweet
// labels for every record, oversample, train a fresh network with held-out
// test and validation folds, score and rank every record, and derive the
// keep threshold. Untrainable windows are reported as skipped.
CycleResult run_microbatch_cycle(const WindowSnapshot& snapshot, const PipelineConfig& config);

// p-quantile with linear interpolation between order statistics
// (h = (n - 1) p). nullopt for an empty list.
std::optional<double> percentile_threshold(std::span<const double> scores, double p);

// Indices of scores >= the p-quantile, in input order.
std::vector<std::size_t> select_top_percentile(std::span<const double> scores, double p);

// A trained model together with the threshold derived from its window.
struct PublishedModel {
  MlpModel model;
  double threshold = 0.0;
  std::int64_t window_index = 0;
  std::uint64_t generation = 0;
};

// Holds the model used for scoring; publication swaps one shared pointer, so
// a reader sees either the old or the new model in full.
class ModelSlot {
 public:
  void publish(std::shared_ptr<const PublishedModel> model);
  std::shared_ptr<const PublishedModel> current() const;

 private:
  mutable std::mutex mutex_;
  std::shared_ptr<const PublishedModel> model_;
};

struct ScoredRecord {
  std::string record_id;
  std::optional<std::int64_t> window_index;  // window of the scoring model
  std::optional<double> score;               // absent before the first model
  bool kept = true;
  std::uint64_t generation = 0;
};

// Scores a newly arrived record with the published model; without a model
// the record passes through (kept, no score).
ScoredRecord score_incoming(const RawRecord& record, std::span<const AtomicEvent> events, const WindowStats& stats,
                            const PublishedModel* model, const FeatureOptions& options = {});

// {"record_id":..,"window_index":..,"score":..,"kept":..}
std::string to_json_line(const ScoredRecord& scored);

// Live filter: replay -> map -> window -> score, with a trainer thread that
// retrains at every slide boundary and publishes the result.
struct FilterConfig {
  PipelineConfig pipeline;
  ReplayConfig replay;
  std::size_t queue_capacity = 4096;
  bool mapping_only = false;  // skip training and scoring
};

struct FilterStats {
  ReplayStats replay;
  std::size_t processed = 0;
  std::size_t stale = 0;
  std::size_t scored = 0;
  std::size_t cold_start = 0;
  std::size_t kept = 0;
  std::size_t windows_trained = 0;
  std::size_t windows_skipped = 0;
  std::size_t snapshots_superseded = 0;  // replaced before the trainer got to them
  double max_train_seconds = 0.0;
  double max_publish_delay_seconds = 0.0;  // boundary handed over -> model published
  double max_record_latency_ms = 0.0;      // dequeue -> scored
  double mean_record_latency_ms = 0.0;
  std::size_t queue_high_water = 0;
  std::vector<WindowReport> reports;  // rankings omitted
};

class FilterPipeline {
 public:
  // Any output stream may be null.
  FilterPipeline(FilterConfig config, std::ostream* scored_out, std::ostream* metrics_out,
                 std::ostream* event_log = nullptr);

  FilterStats run(std::istream& in, const std::atomic<bool>* stop = nullptr);

  const ModelSlot& models() const { return models_; }

 private:
  FilterConfig config_;
  std::ostream* scored_out_;
  std::ostream* metrics_out_;
  std::ostream* event_log_;
  ModelSlot models_;
};

}  // namespace evfilter
