#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "evfilter/errors.hpp"
#include "evfilter/mlp.hpp"
#include "evfilter/random.hpp"
#include "evfilter/rprop.hpp"
#include "evfilter/trainer.hpp"

using namespace evfilter;

namespace {

Dataset random_batch(std::uint64_t seed, std::size_t n, std::size_t dim) {
  Rng rng(seed);
  Dataset d(dim);
  std::vector<double> x(dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : x) v = rng.uniform01();
    d.add(x, rng.bernoulli(0.5) ? 1.0 : 0.0, 1.0 + static_cast<double>(rng.uniform_index(3)));
  }
  return d;
}

// XOR on the first two inputs, remaining inputs zero.
std::vector<LabeledSample> xor_samples(std::size_t copies) {
  std::vector<LabeledSample> out;
  for (std::size_t c = 0; c < copies; ++c) {
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        LabeledSample s;
        s.features[0] = a;
        s.features[1] = b;
        s.label = a ^ b;
        s.record_id = std::to_string(out.size());
        out.push_back(s);
      }
    }
  }
  return out;
}

}  // namespace

TEST_CASE("init_network") {
  const auto a = init_network(5);
  CHECK(a == init_network(5));
  CHECK_FALSE(a == init_network(6));
  CHECK(a.parameter_count() == 10 * 15 + 10 + 10 + 1);
  for (double w : a.parameters()) {
    CHECK(w >= -0.5);
    CHECK(w <= 0.5);
  }
}

TEST_CASE("forward closed forms") {
  MlpModel zero(15, 10);
  std::vector<double> x(15, 0.7);
  CHECK(forward(zero, x) == 0.5);

  MlpModel tiny(1, 1);
  tiny.hidden_weight(0, 0) = 1.0;
  tiny.output_weight(0) = 1.0;
  CHECK(forward(tiny, std::vector<double>{0.0}) == 0.5);
  tiny.output_bias() = 0.3;
  CHECK(forward(tiny, std::vector<double>{0.4}) ==
        doctest::Approx(1.0 / (1.0 + std::exp(-(std::tanh(0.4) + 0.3)))).epsilon(1e-15));

  const auto m = init_network(11);
  CHECK(forward(m, x) == forward(m, x));
  Dataset d(15);
  d.add(x, 1.0);
  CHECK(predict(m, d)[0] == doctest::Approx(forward(m, x)).epsilon(1e-14));
}

TEST_CASE("analytic gradient matches central differences") {
  for (std::uint64_t pair = 0; pair < 5; ++pair) {
    auto model = init_network(derive_seed(99, pair));
    const auto data = random_batch(derive_seed(98, pair), 12, 15);
    std::vector<double> g(model.parameter_count());
    cross_entropy_gradient(model, data, g);
    double worst = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
      const double saved = model.parameters()[k];
      const double h = 1e-5;
      model.parameters()[k] = saved + h;
      const double up = cross_entropy(model, data);
      model.parameters()[k] = saved - h;
      const double down = cross_entropy(model, data);
      model.parameters()[k] = saved;
      const double numeric = (up - down) / (2 * h);
      worst = std::max(worst, std::abs(numeric - g[k]) / std::max(1.0, std::abs(numeric)));
    }
    CHECK(worst <= 1e-4);
  }
}

TEST_CASE("weighted rows equal duplicated rows") {
  const auto model = init_network(3);
  Dataset once(15), twice(15);
  std::vector<double> x(15, 0.25);
  once.add(x, 1.0, 2.0);
  twice.add(x, 1.0);
  twice.add(x, 1.0);
  CHECK(cross_entropy(model, once) == doctest::Approx(cross_entropy(model, twice)).epsilon(1e-14));
}

TEST_CASE("model JSON round trip") {
  const auto m = init_network(21, 16, 7);
  const auto back = model_from_json(model_to_json(m));
  CHECK(back == m);
  CHECK_THROWS(model_from_json(R"({"format":"other"})"));
}

TEST_CASE("rprop rules") {
  RpropConfig cfg;
  SUBCASE("same sign grows the step") {
    RpropState state(1, cfg);
    state.previous_gradient[0] = 2.0;
    std::vector<double> w = {1.0};
    rprop_step(w, std::vector<double>{3.0}, state, cfg);
    CHECK(state.steps[0] == doctest::Approx(0.12));
    CHECK(w[0] == doctest::Approx(0.88));
  }
  SUBCASE("sign flip shrinks the step and reverts") {
    RpropState state(1, cfg);
    state.previous_gradient[0] = 2.0;
    state.previous_update[0] = -0.1;
    std::vector<double> w = {0.9};
    rprop_step(w, std::vector<double>{-1.0}, state, cfg);
    CHECK(state.steps[0] == doctest::Approx(0.05));
    CHECK(w[0] == doctest::Approx(1.0));
    CHECK(state.previous_gradient[0] == 0.0);
    // Next call takes the neutral branch with the reduced step.
    rprop_step(w, std::vector<double>{-1.0}, state, cfg);
    CHECK(w[0] == doctest::Approx(1.05));
    CHECK(state.steps[0] == doctest::Approx(0.05));
  }
  SUBCASE("step is capped") {
    RpropState state(1, cfg);
    state.steps[0] = cfg.max_step;
    state.previous_gradient[0] = 1.0;
    std::vector<double> w = {0.0};
    rprop_step(w, std::vector<double>{1.0}, state, cfg);
    CHECK(state.steps[0] == cfg.max_step);
    CHECK(w[0] == -cfg.max_step);
  }
  SUBCASE("invalid constants") {
    RpropConfig bad;
    bad.decrease = 1.5;
    CHECK_THROWS(bad.validate());
  }
}

TEST_CASE("early stopping after two consecutive increases") {
  EarlyStopper stopper(2);
  CHECK_FALSE(stopper.update(0.5));
  CHECK_FALSE(stopper.update(0.6));
  CHECK(stopper.update(0.7));
  CHECK(stopper.epochs() == 3);
  CHECK(stopper.best_epoch() == 1);
  CHECK(stopper.best_error() == 0.5);

  EarlyStopper bumpy(2);
  for (double e : {0.5, 0.6, 0.4, 0.45, 0.3}) CHECK_FALSE(bumpy.update(e));
  CHECK(bumpy.best_epoch() == 5);
}

TEST_CASE("trainer learns XOR") {
  const auto samples = xor_samples(30);
  Dataset data(15);
  for (const auto& s : samples) data.add(s.features.values(), s.label);
  TrainConfig cfg;
  cfg.max_epochs = 2000;
  cfg.early_stop_on = EarlyStopSignal::kTraining;
  cfg.early_stop_patience = 1000;
  cfg.max_seconds = 30;
  const auto result = train_network(data, data, cfg, 4);
  const auto scores = predict(result.model, data);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) correct += (scores[i] >= 0.5) == (data.labels()[i] == 1.0);
  CHECK(correct == data.size());
  CHECK(result.report.best_epoch <= result.report.epochs);
}

TEST_CASE("train uses stratified folds and reports test counts") {
  const auto samples = xor_samples(50);
  TrainConfig cfg;
  cfg.seed = 8;
  cfg.max_epochs = 400;
  const auto folds = stratified_folds(samples, 5, 8);
  std::vector<std::array<int, 2>> per_fold(5, {0, 0});
  for (std::size_t i = 0; i < samples.size(); ++i) ++per_fold[folds[i]][samples[i].label];
  for (const auto& f : per_fold) {
    CHECK(f[0] == 20);
    CHECK(f[1] == 20);
  }
  const auto result = train(samples, cfg);
  CHECK(result.report.test_samples == 40);
  CHECK(result.report.validation_samples == 40);
  CHECK(result.report.train_samples == 120);
  CHECK(result.report.test_counts.total() == 40);

  cfg.cv_full = true;
  CHECK(train(samples, cfg).report.fold_counts.size() == 5);

  cfg.max_seconds = 1e-9;
  CHECK(train(samples, cfg).report.stop_reason == StopReason::kTimeBudget);

  std::vector<LabeledSample> few(samples.begin(), samples.begin() + 12);
  CHECK_THROWS_AS(train(few, TrainConfig{}), DegenerateWindow);
}

TEST_CASE("training is deterministic per seed") {
  const auto samples = xor_samples(20);
  TrainConfig cfg;
  cfg.seed = 77;
  cfg.max_seconds = 0;
  const auto a = train(samples, cfg);
  const auto b = train(samples, cfg);
  CHECK(a.model == b.model);
  CHECK(a.report.training_errors == b.report.training_errors);
}
