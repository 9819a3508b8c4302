#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "evfilter/pipeline.hpp"
#include "evfilter/random.hpp"
#include "evfilter/synth.hpp"
#include "test_support.hpp"

using namespace evfilter;
using evfilter::test::make_bundle;
using evfilter::test::make_record;

namespace {

// Brute-force type-7 quantile.
double quantile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1) * p;
  const auto k = static_cast<std::size_t>(h);
  if (k + 1 >= v.size()) return v.back();
  return v[k] + (h - static_cast<double>(k)) * (v[k + 1] - v[k]);
}

SynthConfig small_synth() {
  SynthConfig cfg;
  cfg.rate = 40;
  cfg.duration_secs = 200;
  cfg.seed = 5;
  cfg.hashtag_prob = 0.6;
  cfg.link_prob = 0.6;
  return cfg;
}

WindowSnapshot synthetic_snapshot(std::int64_t index, TimestampMs at_offset_ms) {
  const auto cfg = small_synth();
  SlidingWindow w;
  for (auto& r : generate_synthetic_records(cfg)) {
    if (r.ts > cfg.start_ts + at_offset_ms) break;
    if (filter_language(r)) w.insert(make_bundle(std::move(r)));
  }
  w.evict_expired(cfg.start_ts + at_offset_ms);
  return w.snapshot(index);
}

PipelineConfig fast_config() {
  PipelineConfig cfg;
  cfg.train.max_seconds = 0;
  cfg.train.max_epochs = 60;
  cfg.seed = 3;
  return cfg;
}

}  // namespace

TEST_CASE("percentile selection") {
  std::vector<double> tenths;
  for (int i = 1; i <= 10; ++i) tenths.push_back(i / 10.0);
  CHECK(select_top_percentile(tenths, 0.9) == std::vector<std::size_t>{9});
  CHECK(select_top_percentile(std::vector<double>(7, 0.3), 0.9).size() == 7);
  CHECK(select_top_percentile(std::vector<double>{}, 0.9).empty());
  CHECK_FALSE(percentile_threshold(std::vector<double>{}, 0.5));

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> scores(100);
    for (auto& s : scores) s = u(rng);
    const auto kept = select_top_percentile(scores, 0.5);
    CHECK(kept.size() >= 49);
    CHECK(kept.size() <= 51);
    CHECK(*percentile_threshold(scores, 0.5) == doctest::Approx(quantile(scores, 0.5)).epsilon(1e-15));
    const double t = quantile(scores, 0.5);
    for (auto i : kept) CHECK(scores[i] >= t);
  }
}

TEST_CASE("degenerate snapshot is skipped") {
  SlidingWindow w;
  for (int i = 0; i < 30; ++i) w.insert(make_bundle(make_record(std::to_string(i), 1000 + i, "plain words here")));
  const auto cycle = run_microbatch_cycle(w.snapshot(4), fast_config());
  CHECK_FALSE(cycle.model);
  CHECK(cycle.report.skipped);
  CHECK(cycle.report.skip_reason == "skipped_degenerate");
  CHECK(cycle.report.n_pos == 0);
  CHECK(cycle.report.metrics_row(false).stop_reason == "skipped_degenerate");
  CHECK_FALSE(cycle.report.metrics_row(false).f1);
}

TEST_CASE("micro-batch cycle trains, ranks and is reproducible") {
  const auto snap = synthetic_snapshot(12, 180'000);
  const auto a = run_microbatch_cycle(snap, fast_config());
  REQUIRE(a.model);
  const auto& r = a.report;
  CHECK(r.n_samples == snap.records().size());
  CHECK(r.ranking.size() == r.n_samples);
  CHECK(r.n_pos > 0);
  CHECK(r.balanced_pos == r.balanced_neg);
  CHECK(r.balanced_pos == r.n_neg);
  CHECK(std::is_sorted(r.ranking.begin(), r.ranking.end(), [](const ScoredEvent& x, const ScoredEvent& y) {
    return x.score != y.score ? x.score > y.score : x.record_id < y.record_id;
  }));
  REQUIRE(r.threshold);
  CHECK(a.samples.size() == r.n_samples);

  const auto b = run_microbatch_cycle(synthetic_snapshot(12, 180'000), fast_config());
  CHECK(b.report.ranking == r.ranking);
  CHECK(*b.model == *a.model);
  CHECK(b.report.metrics_row(false) == r.metrics_row(false));
  CHECK_FALSE(r.metrics_row(false).train_ms);
  CHECK(r.metrics_row(true).train_ms);
}

TEST_CASE("score_incoming") {
  SlidingWindow w;
  const auto b = make_bundle(make_record("n1", 10, "quokka #x http://y.z"));
  w.insert(b);
  const auto cold = score_incoming(b->record, b->events, w.stats(), nullptr);
  CHECK(cold.kept);
  CHECK_FALSE(cold.score);
  CHECK(to_json_line(cold) == R"({"record_id":"n1","window_index":null,"score":null,"kept":true})");

  PublishedModel published{init_network(1), 0.0, 7, 1};
  const auto hot = score_incoming(b->record, b->events, w.stats(), &published);
  REQUIRE(hot.score);
  CHECK(*hot.score == forward(published.model, assemble_features(*b, w.stats()).values()));
  CHECK(hot.kept);
  CHECK(hot.window_index == 7);
  published.threshold = 1.0;
  CHECK_FALSE(score_incoming(b->record, b->events, w.stats(), &published).kept);
}

TEST_CASE("model publication is all-or-nothing") {
  ModelSlot slot;
  CHECK_FALSE(slot.current());
  std::atomic<bool> done{false};
  std::thread writer([&] {
    for (int g = 1; g <= 2000; ++g) {
      MlpModel m(15, 10);
      for (auto& p : m.parameters()) p = g;
      slot.publish(std::make_shared<const PublishedModel>(PublishedModel{m, static_cast<double>(g), g, static_cast<std::uint64_t>(g)}));
    }
    done = true;
  });
  std::uint64_t last = 0;
  bool consistent = true;
  while (!done) {
    const auto m = slot.current();
    if (!m) continue;
    for (double p : m->model.parameters()) consistent &= p == m->threshold;
    consistent &= m->generation >= last;
    last = m->generation;
  }
  writer.join();
  CHECK(consistent);
  CHECK(slot.current()->generation == 2000);
}

TEST_CASE("filter pipeline scores every record exactly once") {
  auto synth = small_synth();
  synth.duration_secs = 120;
  std::stringstream in;
  generate_synthetic_stream(synth, in);

  FilterConfig cfg;
  cfg.pipeline = fast_config();
  cfg.pipeline.window_ms = 30'000;
  cfg.pipeline.slide_ms = 10'000;
  cfg.replay.clock = ClockMode::kData;
  std::ostringstream scored, metrics;
  FilterPipeline pipeline(cfg, &scored, &metrics);
  const auto stats = pipeline.run(in);

  std::istringstream lines(scored.str());
  std::string line;
  std::set<std::string> ids;
  std::size_t n = 0;
  while (std::getline(lines, line)) {
    ++n;
    ids.insert(line.substr(0, line.find(',')));
  }
  CHECK(n == stats.processed);
  CHECK(ids.size() == n);
  CHECK(stats.processed == stats.replay.emitted);
  CHECK(stats.scored + stats.cold_start == stats.processed);
  CHECK(stats.windows_trained + stats.windows_skipped + stats.snapshots_superseded >= 10);
  CHECK(stats.windows_trained > 0);
  CHECK(metrics.str().rfind(kMetricsCsvHeader, 0) == 0);
  CHECK(pipeline.models().current());
}

TEST_CASE("mapping-only filter does no training") {
  auto synth = small_synth();
  synth.duration_secs = 30;
  std::stringstream in;
  generate_synthetic_stream(synth, in);
  FilterConfig cfg;
  cfg.replay.clock = ClockMode::kData;
  cfg.mapping_only = true;
  FilterPipeline pipeline(cfg, nullptr, nullptr);
  const auto stats = pipeline.run(in);
  CHECK(stats.processed > 1000);
  CHECK(stats.windows_trained == 0);
  CHECK_FALSE(pipeline.models().current());
}
