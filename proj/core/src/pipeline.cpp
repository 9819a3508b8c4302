#include "evfilter/pipeline.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <json.hpp>
#include <ostream>
#include <thread>

#include "evfilter/bounded_queue.hpp"
#include "evfilter/errors.hpp"
#include "evfilter/random.hpp"
#include "evfilter/synth.hpp"

namespace evfilter {

void PipelineConfig::validate() const {
  if (window_ms <= 0 || slide_ms <= 0) throw Error("window and slide must be positive");
  if (!(top_percentile > 0.0 && top_percentile < 1.0)) throw Error("top percentile must lie in (0, 1)");
  train.validate();
}

MetricsRow WindowReport::metrics_row(bool with_timing) const {
  MetricsRow row;
  row.window_index = window_index;
  row.start_ts_ms = start_ts;
  row.n_samples = n_samples;
  row.n_pos = n_pos;
  if (skipped || !training) {
    row.stop_reason = skip_reason.empty() ? "skipped_degenerate" : skip_reason;
    return row;
  }
  const auto& c = training->test_counts;
  row.precision = precision(c);
  row.recall = recall(c);
  row.f1 = f_measure(c);
  if (c.total() > 0) row.kappa = cohen_kappa(c);
  if (with_timing) row.train_ms = training->train_ms;
  row.stop_reason = std::string(to_string(training->stop_reason));
  return row;
}

std::optional<double> percentile_threshold(std::span<const double> scores, double p) {
  if (scores.empty()) return std::nullopt;
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<std::size_t> select_top_percentile(std::span<const double> scores, double p) {
  std::vector<std::size_t> kept;
  const auto threshold = percentile_threshold(scores, p);
  if (!threshold) return kept;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] >= *threshold) kept.push_back(i);
  }
  return kept;
}

namespace {

// Seed streams of one window.
enum SeedStream : std::uint64_t { kOversampleSeed = 10, kRandomFeatureSeed = 11, kTrainSeed = 12, kScoreFeatureSeed = 13 };

std::uint64_t window_seed(const PipelineConfig& config, std::int64_t index, SeedStream stream) {
  return derive_seed(derive_seed(config.seed, static_cast<std::uint64_t>(index)), stream);
}

}  // namespace

CycleResult run_microbatch_cycle(const WindowSnapshot& snapshot, const PipelineConfig& config) {
  CycleResult result;
  WindowReport& report = result.report;
  report.window_index = snapshot.index();
  report.boundary_ts = snapshot.boundary_ts();
  report.start_ts = snapshot.start_ts();

  // Features, normalization and retweet labels for every captured record.
  const auto records = snapshot.records();
  auto& samples = result.samples;
  samples.reserve(records.size());
  for (const auto& bundle : records) {
    samples.push_back({assemble_features(*bundle, snapshot.stats(), config.features),
                       label_by_retweet(*bundle, snapshot.stats()), bundle->record.id, snapshot.index()});
    (samples.back().label == 1 ? report.n_pos : report.n_neg) += 1;
  }
  report.n_samples = samples.size();

  if (config.feature_source == FeatureSource::kRandom) {
    const auto random = random_baseline_features(samples.size(), config.features.dimension(),
                                                 window_seed(config, snapshot.index(), kScoreFeatureSeed));
    for (std::size_t i = 0; i < samples.size(); ++i) samples[i].features = random[i];
  }

  try {
    // Balance classes, then train a network from scratch.
    auto balanced = oversample(samples, window_seed(config, snapshot.index(), kOversampleSeed));
    if (config.feature_source == FeatureSource::kRandom) {
      // Fresh features per oversampled row: duplicates carry no shared signal.
      const auto random = random_baseline_features(balanced.size(), config.features.dimension(),
                                                   window_seed(config, snapshot.index(), kRandomFeatureSeed));
      for (std::size_t i = 0; i < balanced.size(); ++i) balanced[i].features = random[i];
    }
    for (const auto& s : balanced) (s.label == 1 ? report.balanced_pos : report.balanced_neg) += 1;

    TrainConfig train_config = config.train;
    train_config.seed = window_seed(config, snapshot.index(), kTrainSeed);
    auto trained = train(balanced, train_config);
    report.training = std::move(trained.report);
    result.model = std::move(trained.model);
  } catch (const DegenerateWindow& e) {
    report.skipped = true;
    report.skip_reason = "skipped_degenerate";
    return result;
  } catch (const NumericError& e) {
    spdlog::warn("window {}: {}", snapshot.index(), e.what());
    report.skipped = true;
    report.skip_reason = "skipped_numeric";
    return result;
  }

  // Score and rank every captured record.
  Dataset all(config.features.dimension());
  all.reserve(samples.size());
  for (const auto& s : samples) all.add(s.features.values(), static_cast<double>(s.label));
  const auto scores = predict(*result.model, all);
  report.ranking.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) report.ranking.push_back({samples[i].record_id, scores[i]});
  std::sort(report.ranking.begin(), report.ranking.end(), [](const ScoredEvent& a, const ScoredEvent& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.record_id < b.record_id;
  });
  report.threshold = percentile_threshold(scores, config.top_percentile);
  return result;
}

void ModelSlot::publish(std::shared_ptr<const PublishedModel> model) {
  std::lock_guard lock(mutex_);
  model_ = std::move(model);
}

std::shared_ptr<const PublishedModel> ModelSlot::current() const {
  std::lock_guard lock(mutex_);
  return model_;
}

ScoredRecord score_incoming(const RawRecord& record, std::span<const AtomicEvent> events, const WindowStats& stats,
                            const PublishedModel* model, const FeatureOptions& options) {
  ScoredRecord out;
  out.record_id = record.id;
  if (!model) return out;
  const auto features = assemble_features(record, events, stats, options);
  out.score = forward(model->model, features.values());
  out.window_index = model->window_index;
  out.generation = model->generation;
  out.kept = *out.score >= model->threshold;
  return out;
}

std::string to_json_line(const ScoredRecord& scored) {
  nlohmann::ordered_json obj;
  obj["record_id"] = scored.record_id;
  obj["window_index"] = scored.window_index ? nlohmann::ordered_json(*scored.window_index) : nullptr;
  obj["score"] = scored.score ? nlohmann::ordered_json(*scored.score) : nullptr;
  obj["kept"] = scored.kept;
  return obj.dump();
}

FilterPipeline::FilterPipeline(FilterConfig config, std::ostream* scored_out, std::ostream* metrics_out,
                               std::ostream* event_log)
    : config_(std::move(config)), scored_out_(scored_out), metrics_out_(metrics_out), event_log_(event_log) {
  config_.pipeline.validate();
}

namespace {

using SteadyClock = std::chrono::steady_clock;

// Latest-wins handoff between the window writer and the trainer.
class SnapshotHandoff {
 public:
  // Returns true when an unprocessed snapshot was replaced.
  bool offer(WindowSnapshot snapshot) {
    std::lock_guard lock(mutex_);
    const bool replaced = pending_.has_value();
    pending_ = Pending{std::move(snapshot), SteadyClock::now()};
    ready_.notify_one();
    return replaced;
  }

  void close() {
    std::lock_guard lock(mutex_);
    closed_ = true;
    ready_.notify_all();
  }

  struct Pending {
    WindowSnapshot snapshot;
    SteadyClock::time_point offered;
  };

  std::optional<Pending> take() {
    std::unique_lock lock(mutex_);
    ready_.wait(lock, [&] { return closed_ || pending_.has_value(); });
    if (!pending_) return std::nullopt;
    auto out = std::move(pending_);
    pending_.reset();
    return out;
  }

 private:
  std::mutex mutex_;
  std::condition_variable ready_;
  std::optional<Pending> pending_;
  bool closed_ = false;
};

}  // namespace

FilterStats FilterPipeline::run(std::istream& in, const std::atomic<bool>* stop) {
  FilterStats stats;
  BoundedQueue<RawRecord> queue(config_.queue_capacity);
  SnapshotHandoff handoff;
  std::mutex stats_mutex;
  const auto& pc = config_.pipeline;

  if (metrics_out_) {
    write_metrics_header(*metrics_out_);
    metrics_out_->flush();
  }

  std::thread ingest([&] {
    Replayer replayer(config_.replay);
    try {
      stats.replay = replayer.run(in, [&](RawRecord&& r) { return queue.push(std::move(r)); }, stop);
    } catch (const Error& e) {
      spdlog::error("ingest: {}", e.what());
    }
    queue.close();
  });

  std::thread trainer;
  if (!config_.mapping_only) {
    trainer = std::thread([&] {
      std::uint64_t generation = 0;
      while (auto pending = handoff.take()) {
        auto cycle = run_microbatch_cycle(pending->snapshot, pc);
        const double delay = std::chrono::duration<double>(SteadyClock::now() - pending->offered).count();
        if (cycle.model) {
          models_.publish(std::make_shared<const PublishedModel>(PublishedModel{
              std::move(*cycle.model), cycle.report.threshold.value_or(0.0), cycle.report.window_index, ++generation}));
        }
        if (metrics_out_) {
          write_metrics_row(*metrics_out_, cycle.report.metrics_row(true));
          metrics_out_->flush();
        }
        cycle.report.ranking.clear();
        std::lock_guard lock(stats_mutex);
        if (cycle.report.skipped) {
          ++stats.windows_skipped;
        } else {
          ++stats.windows_trained;
          stats.max_train_seconds = std::max(stats.max_train_seconds, cycle.report.training->train_ms / 1000.0);
        }
        stats.max_publish_delay_seconds = std::max(stats.max_publish_delay_seconds, delay);
        stats.reports.push_back(std::move(cycle.report));
      }
    });
  }

  SlidingWindow window(pc.window_ms);
  std::optional<TimestampMs> next_boundary;
  std::int64_t next_index = 1;
  double latency_sum_ms = 0.0;

  while (auto record = queue.pop()) {
    const auto dequeued = SteadyClock::now();
    if (!next_boundary) next_boundary = record->ts + pc.slide_ms;
    while (record->ts > *next_boundary) {
      window.evict_expired(*next_boundary);
      if (!config_.mapping_only) {
        if (handoff.offer(window.snapshot(next_index))) {
          std::lock_guard lock(stats_mutex);
          ++stats.snapshots_superseded;
        }
      }
      ++next_index;
      *next_boundary += pc.slide_ms;
    }

    auto events = map_record(*record);
    if (event_log_) {
      for (const auto& e : events) *event_log_ << to_json_line(e) << '\n';
    }
    auto bundle = std::make_shared<const WindowRecord>(WindowRecord{std::move(*record), std::move(events), false});
    try {
      window.insert(bundle);
    } catch (const StaleEvent&) {
      ++stats.stale;
      continue;
    }
    ++stats.processed;

    if (config_.mapping_only) {
      // Feature assembly still runs so the stretch mode measures the full
      // mapping path.
      (void)assemble_features(*bundle, window.stats(), pc.features);
    } else {
      const auto model = models_.current();
      const auto scored = score_incoming(bundle->record, bundle->events, window.stats(), model.get(), pc.features);
      if (!scored.score) ++stats.cold_start;
      if (scored.score) ++stats.scored;
      if (scored.kept) ++stats.kept;
      if (scored_out_) *scored_out_ << to_json_line(scored) << '\n';
    }
    const double latency = std::chrono::duration<double, std::milli>(SteadyClock::now() - dequeued).count();
    latency_sum_ms += latency;
    stats.max_record_latency_ms = std::max(stats.max_record_latency_ms, latency);
  }

  ingest.join();
  handoff.close();
  if (trainer.joinable()) trainer.join();
  if (scored_out_) scored_out_->flush();
  if (event_log_) event_log_->flush();
  stats.queue_high_water = queue.high_water_mark();
  if (stats.processed > 0) stats.mean_record_latency_ms = latency_sum_ms / static_cast<double>(stats.processed);
  return stats;
}

}  // namespace evfilter
