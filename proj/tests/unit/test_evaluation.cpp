#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>
#include <unordered_set>

#include "evfilter/events.hpp"
#include "evfilter/experiment.hpp"
#include "evfilter/synth.hpp"

using namespace evfilter;

namespace {

SynthConfig short_stream() {
  SynthConfig cfg;
  cfg.rate = 30;
  cfg.duration_secs = 150;
  cfg.seed = 11;
  cfg.hashtag_prob = 0.6;
  cfg.link_prob = 0.6;
  return cfg;
}

ExperimentConfig short_experiment(ExperimentMode mode) {
  ExperimentConfig cfg;
  cfg.mode = mode;
  cfg.first_window = 3;
  cfg.last_window = 8;
  cfg.pipeline.window_ms = 30'000;
  cfg.pipeline.train.max_seconds = 0;
  cfg.pipeline.train.max_epochs = 50;
  cfg.pipeline.seed = 2;
  cfg.synth = short_stream();
  return cfg;
}

// Fraction of eligible originals (retweet fully inside the stream) that got retweeted.
double retweet_rate(const SynthConfig& cfg, std::size_t* eligible_out) {
  const auto records = generate_synthetic_records(cfg);
  std::unordered_set<std::string> retweeted;
  for (const auto& r : records) {
    if (r.retweet_of) retweeted.insert(*r.retweet_of);
  }
  const TimestampMs cutoff =
      cfg.start_ts + static_cast<TimestampMs>((cfg.duration_secs - cfg.max_delay_secs) * 1000);
  std::size_t eligible = 0, hits = 0;
  for (const auto& r : records) {
    if (r.retweet_of || r.ts >= cutoff) continue;
    ++eligible;
    hits += retweeted.count(r.id);
  }
  *eligible_out = eligible;
  return static_cast<double>(hits) / static_cast<double>(eligible);
}

}  // namespace

TEST_CASE("random baseline features") {
  const auto a = random_baseline_features(1000, 15, 4);
  CHECK(a == random_baseline_features(1000, 15, 4));
  CHECK_FALSE(a == random_baseline_features(1000, 15, 5));
  const auto many = random_baseline_features(100'000 / 15 + 1, 15, 9);
  double sum = 0;
  std::size_t n = 0;
  for (const auto& f : many) {
    CHECK(f.size() == 15);
    for (double v : f.values()) {
      REQUIRE(v >= 0.0);
      REQUIRE(v <= 1.0);
      sum += v;
      ++n;
    }
  }
  CHECK(n >= 100'000);
  CHECK(std::abs(sum / static_cast<double>(n) - 0.5) <= 0.01);
}

TEST_CASE("synthetic stream is deterministic and well formed") {
  const auto cfg = short_stream();
  std::ostringstream a, b;
  generate_synthetic_stream(cfg, a);
  generate_synthetic_stream(cfg, b);
  CHECK(a.str() == b.str());
  auto other = cfg;
  other.seed = 12;
  std::ostringstream c;
  generate_synthetic_stream(other, c);
  CHECK(a.str() != c.str());

  const auto records = generate_synthetic_records(cfg);
  std::set<std::string> ids;
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(parse_record(to_json_line(records[i])) == records[i]);
    if (i > 0) CHECK(records[i - 1].ts <= records[i].ts);
    ids.insert(records[i].id);
  }
  CHECK(ids.size() == records.size());
}

TEST_CASE("no retweet probability means no retweet events") {
  auto cfg = short_stream();
  cfg.p_hi = 0;
  cfg.p_lo = 0;
  for (const auto& r : generate_synthetic_records(cfg)) {
    for (const auto& e : map_record(r)) REQUIRE_FALSE(e.is<RetweetPayload>());
  }
}

TEST_CASE("planted records are retweeted with p_hi, others with p_lo") {
  SynthConfig cfg;
  cfg.rate = 20;
  cfg.duration_secs = 800;
  cfg.hashtag_prob = 1;
  cfg.link_prob = 1;
  cfg.bursty_prob = 1;
  std::size_t eligible = 0;
  CHECK(std::abs(retweet_rate(cfg, &eligible) - cfg.p_hi) <= 0.03);
  CHECK(eligible >= 10'000);
  for (const auto& r : generate_synthetic_records(SynthConfig{.rate = 5, .duration_secs = 30})) {
    if (!r.retweet_of) CHECK(satisfies_plant(r, cfg) == (r.text.find('#') != std::string::npos &&
                                                          r.text.find("http") != std::string::npos &&
                                                          r.text.find(cfg.bursty_token) != std::string::npos));
  }

  cfg.bursty_prob = 0;
  cfg.duration_secs = 1200;
  CHECK(std::abs(retweet_rate(cfg, &eligible) - cfg.p_lo) <= 0.005);
}

TEST_CASE("experiment rows cover the window range and are reproducible") {
  std::istringstream none;
  std::ostringstream csv_a, csv_b;
  const auto a = run_experiment(none, short_experiment(ExperimentMode::kSynthetic), &csv_a);
  const auto b = run_experiment(none, short_experiment(ExperimentMode::kSynthetic), &csv_b);
  CHECK(csv_a.str() == csv_b.str());
  REQUIRE(a.rows.size() == 6);
  CHECK(a.rows.front().window_index == 3);
  CHECK(a.rows.back().window_index == 8);
  CHECK(a.summary.windows == 6);
  CHECK_FALSE(a.summary.incomplete);
  CHECK(csv_a.str().rfind(std::string(kMetricsCsvHeader) + "\n", 0) == 0);
  for (const auto& r : a.reports) {
    if (!r.skipped) CHECK(r.balanced_pos == r.balanced_neg);
  }
}

TEST_CASE("random-baseline mode uses the same stream and labels") {
  std::ostringstream stream;
  generate_synthetic_stream(short_stream(), stream);
  std::istringstream in_real(stream.str()), in_random(stream.str());
  const auto real = run_experiment(in_real, short_experiment(ExperimentMode::kReal));
  const auto random = run_experiment(in_random, short_experiment(ExperimentMode::kRandomBaseline));
  REQUIRE(real.rows.size() == random.rows.size());
  for (std::size_t i = 0; i < real.rows.size(); ++i) {
    CHECK(real.rows[i].n_samples == random.rows[i].n_samples);
    CHECK(real.rows[i].n_pos == random.rows[i].n_pos);
  }
}

TEST_CASE("short stream is flagged incomplete") {
  auto cfg = short_experiment(ExperimentMode::kSynthetic);
  cfg.last_window = 500;
  std::istringstream none;
  const auto result = run_experiment(none, cfg);
  CHECK(result.summary.incomplete);
  CHECK(result.windows_seen < 500);
  CHECK(result.rows.back().window_index == result.windows_seen);
}
