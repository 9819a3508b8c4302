#include "evfilter/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <string>
#include <unordered_map>

#include "evfilter/errors.hpp"
#include "evfilter/random.hpp"

namespace evfilter {

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::kEarlyStop:
      return "early_stop";
    case StopReason::kTimeBudget:
      return "time_budget";
    case StopReason::kMaxEpochs:
      return "max_epochs";
  }
  return "unknown";
}

void TrainConfig::validate() const {
  rprop.validate();
  if (folds < 3) throw Error("training needs at least 3 folds");
  if (early_stop_patience == 0) throw Error("early-stop patience must be positive");
  if (max_epochs == 0) throw Error("max_epochs must be positive");
  if (hidden_units == 0) throw Error("hidden layer must be non-empty");
}

bool EarlyStopper::update(double error) {
  ++epoch_;
  improved_ = false;
  if (epoch_ == 1 || error < best_error_) {
    best_error_ = error;
    best_epoch_ = epoch_;
    improved_ = true;
  }
  if (epoch_ > 1 && error > last_error_) {
    ++increases_;
  } else {
    increases_ = 0;
  }
  last_error_ = error;
  return increases_ >= patience_;
}

namespace {

using Clock = std::chrono::steady_clock;

double mean_loss(const MlpModel& model, const Dataset& data) {
  const double weight = data.total_weight();
  return weight > 0 ? cross_entropy(model, data) / weight : 0.0;
}

// Builds a dataset from the selected samples, merging exact duplicates into
// one weighted row (oversampled copies would otherwise be evaluated over and
// over with identical results).
Dataset collapse(std::span<const LabeledSample> samples, std::span<const std::size_t> indices) {
  const std::size_t dim = samples.front().features.size();
  Dataset data(dim);
  std::unordered_map<std::string, std::size_t> rows;
  std::vector<const LabeledSample*> unique;
  std::vector<double> weights;
  for (std::size_t idx : indices) {
    const auto& s = samples[idx];
    std::string key(reinterpret_cast<const char*>(s.features.values().data()), dim * sizeof(double));
    key += static_cast<char>(s.label);
    key += s.record_id;
    auto [it, inserted] = rows.emplace(std::move(key), unique.size());
    if (inserted) {
      unique.push_back(&s);
      weights.push_back(1.0);
    } else {
      weights[it->second] += 1.0;
    }
  }
  data.reserve(unique.size());
  for (std::size_t i = 0; i < unique.size(); ++i) {
    data.add(unique[i]->features.values(), static_cast<double>(unique[i]->label), weights[i]);
  }
  return data;
}

ConfusionCounts test_model(const MlpModel& model, const Dataset& test) {
  if (test.empty()) return {};
  const auto scores = predict(model, test);
  ConfusionCounts c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const auto w = static_cast<std::uint64_t>(test.weights()[i]);
    const bool predicted = scores[i] >= 0.5;
    const bool actual = test.labels()[i] >= 0.5;
    if (predicted && actual) c.tp += w;
    if (predicted && !actual) c.fp += w;
    if (!predicted && !actual) c.tn += w;
    if (!predicted && actual) c.fn += w;
  }
  return c;
}

struct Split {
  Dataset training;
  Dataset validation;
  Dataset test;
};

Split make_split(std::span<const LabeledSample> samples, std::span<const std::size_t> folds, std::size_t n_folds,
                 std::size_t test_fold) {
  const std::size_t validation_fold = (test_fold + 1) % n_folds;
  std::vector<std::size_t> train_idx, val_idx, test_idx;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (folds[i] == test_fold) {
      test_idx.push_back(i);
    } else if (folds[i] == validation_fold) {
      val_idx.push_back(i);
    } else {
      train_idx.push_back(i);
    }
  }
  return {collapse(samples, train_idx), collapse(samples, val_idx), collapse(samples, test_idx)};
}

}  // namespace

TrainResult train_network(const Dataset& training, const Dataset& validation, const TrainConfig& config,
                          std::uint64_t init_seed) {
  config.validate();
  const auto started = Clock::now();
  MlpModel model = init_network(init_seed, training.dim(), config.hidden_units);
  MlpModel best = model;
  RpropState state(model.parameter_count(), config.rprop);
  std::vector<double> gradient(model.parameter_count());
  EarlyStopper stopper(config.early_stop_patience);

  TrainReport report;
  report.train_samples = static_cast<std::size_t>(training.total_weight());
  report.validation_samples = static_cast<std::size_t>(validation.total_weight());
  const bool monitor_training = config.early_stop_on == EarlyStopSignal::kTraining || validation.empty();

  for (std::size_t epoch = 1;; ++epoch) {
    const double loss = cross_entropy_gradient(model, training, gradient);
    if (!std::isfinite(loss)) throw NumericError("non-finite training loss", epoch);
    rprop_step(model.parameters(), gradient, state, config.rprop);

    const double training_error = mean_loss(model, training);
    const double validation_error = validation.empty() ? training_error : mean_loss(model, validation);
    if (!std::isfinite(training_error) || !std::isfinite(validation_error)) {
      throw NumericError("non-finite loss after update", epoch);
    }
    report.training_errors.push_back(training_error);
    report.validation_errors.push_back(validation_error);

    const bool stop = stopper.update(monitor_training ? training_error : validation_error);
    if (stopper.improved()) best = model;
    report.epochs = epoch;
    if (stop) {
      report.stop_reason = StopReason::kEarlyStop;
      break;
    }
    const double elapsed = std::chrono::duration<double>(Clock::now() - started).count();
    if (config.max_seconds > 0 && elapsed >= config.max_seconds) {
      report.stop_reason = StopReason::kTimeBudget;
      break;
    }
    if (epoch >= config.max_epochs) {
      report.stop_reason = StopReason::kMaxEpochs;
      break;
    }
  }
  report.best_epoch = stopper.best_epoch();
  report.final_training_error = mean_loss(best, training);
  report.train_ms = std::chrono::duration<double, std::milli>(Clock::now() - started).count();
  return {std::move(best), std::move(report)};
}

std::vector<std::size_t> stratified_folds(std::span<const LabeledSample> samples, std::size_t folds,
                                          std::uint64_t seed) {
  std::vector<std::size_t> positives, negatives;
  for (std::size_t i = 0; i < samples.size(); ++i) (samples[i].label == 1 ? positives : negatives).push_back(i);
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(positives));
  rng.shuffle(std::span<std::size_t>(negatives));
  std::vector<std::size_t> assignment(samples.size());
  for (std::size_t k = 0; k < positives.size(); ++k) assignment[positives[k]] = k % folds;
  for (std::size_t k = 0; k < negatives.size(); ++k) assignment[negatives[k]] = k % folds;
  return assignment;
}

TrainResult train(std::span<const LabeledSample> samples, const TrainConfig& config) {
  config.validate();
  std::size_t positives = 0;
  for (const auto& s : samples) positives += s.label == 1 ? 1 : 0;
  const std::size_t negatives = samples.size() - positives;
  if (positives < config.min_samples_per_class || negatives < config.min_samples_per_class) {
    throw DegenerateWindow("training needs at least " + std::to_string(config.min_samples_per_class) +
                           " samples per class (" + std::to_string(positives) + " positive, " +
                           std::to_string(negatives) + " negative)");
  }

  const auto started = Clock::now();
  const auto folds = stratified_folds(samples, config.folds, derive_seed(config.seed, 1));
  const std::size_t rotations = config.cv_full ? config.folds : 1;
  std::optional<TrainResult> primary;
  std::vector<ConfusionCounts> fold_counts;
  for (std::size_t r = 0; r < rotations; ++r) {
    const Split split = make_split(samples, folds, config.folds, r);
    auto result = train_network(split.training, split.validation, config, derive_seed(config.seed, 2));
    result.report.test_samples = static_cast<std::size_t>(split.test.total_weight());
    result.report.test_counts = test_model(result.model, split.test);
    fold_counts.push_back(result.report.test_counts);
    if (r == 0) primary = std::move(result);
  }
  if (config.cv_full) primary->report.fold_counts = std::move(fold_counts);
  primary->report.train_ms = std::chrono::duration<double, std::milli>(Clock::now() - started).count();
  return std::move(*primary);
}

}  // namespace evfilter
