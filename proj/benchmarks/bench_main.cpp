#include <benchmark/benchmark.h>

#include <memory>
#include <vector>

#include "evfilter/events.hpp"
#include "evfilter/features.hpp"
#include "evfilter/mlp.hpp"
#include "evfilter/synth.hpp"
#include "evfilter/text.hpp"
#include "evfilter/trainer.hpp"
#include "evfilter/window.hpp"

using namespace evfilter;

namespace {

const std::vector<RawRecord>& records() {
  static const auto r = [] {
    SynthConfig cfg;
    cfg.duration_secs = 300;
    return generate_synthetic_records(cfg);
  }();
  return r;
}

std::vector<WindowRecordPtr> bundles() {
  std::vector<WindowRecordPtr> out;
  for (const auto& r : records()) out.push_back(std::make_shared<const WindowRecord>(WindowRecord{r, map_record(r), false}));
  return out;
}

}  // namespace

static void BM_TokenizeNormalize(benchmark::State& state) {
  const auto& rs = records();
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(tokenize_normalize(rs[i++ % rs.size()].text));
  }
}
BENCHMARK(BM_TokenizeNormalize);

static void BM_MapRecord(benchmark::State& state) {
  const auto& rs = records();
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(map_record(rs[i++ % rs.size()]));
  }
}
BENCHMARK(BM_MapRecord);

// Steady-state window insert: each insert also evicts what expired.
static void BM_WindowInsert(benchmark::State& state) {
  const auto bs = bundles();
  SlidingWindow window;
  std::size_t i = 0;
  TimestampMs offset = 0;
  const TimestampMs span = bs.back()->record.ts - bs.front()->record.ts + 1;
  for (auto _ : state) {
    const auto& b = bs[i];
    auto shifted = std::make_shared<WindowRecord>(*b);
    shifted->record.ts += offset;
    for (auto& e : shifted->events) e.header.ts += offset;
    window.insert(std::move(shifted));
    if (++i == bs.size()) {
      i = 0;
      offset += span;
    }
  }
  state.counters["window_records"] = static_cast<double>(window.record_count());
}
BENCHMARK(BM_WindowInsert);

static void BM_AssembleFeatures(benchmark::State& state) {
  const auto bs = bundles();
  SlidingWindow window;
  for (const auto& b : bs) window.insert(b);
  const auto& live = window.bundles();
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(assemble_features(*live[i++ % live.size()], window.stats()));
  }
}
BENCHMARK(BM_AssembleFeatures);

// One full-batch gradient over a window-sized dataset (rows given by the argument).
static void BM_TrainingEpochGradient(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const auto features = random_baseline_features(rows, kFeatureCount, 1);
  Dataset data(kFeatureCount);
  for (std::size_t i = 0; i < rows; ++i) data.add(features[i].values(), static_cast<double>(i % 2));
  const auto model = init_network(2);
  std::vector<double> gradient(model.parameter_count());
  for (auto _ : state) {
    benchmark::DoNotOptimize(cross_entropy_gradient(model, data, gradient));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * rows));
}
BENCHMARK(BM_TrainingEpochGradient)->Arg(1000)->Arg(15000);

static void BM_ForwardSingle(benchmark::State& state) {
  const auto model = init_network(3);
  const auto x = random_baseline_features(1, kFeatureCount, 4).front();
  for (auto _ : state) benchmark::DoNotOptimize(forward(model, x.values()));
}
BENCHMARK(BM_ForwardSingle);
BENCHMARK_MAIN();
