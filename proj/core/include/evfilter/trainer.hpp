#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "evfilter/features.hpp"
#include "evfilter/metrics.hpp"
#include "evfilter/mlp.hpp"
#include "evfilter/rprop.hpp"

namespace evfilter {

enum class StopReason { kEarlyStop, kTimeBudget, kMaxEpochs };
std::string_view to_string(StopReason reason);

enum class EarlyStopSignal { kValidation, kTraining };

struct TrainConfig {
  double max_seconds = 10.0;  // <= 0 disables the wall-clock budget
  std::size_t early_stop_patience = 2;
  std::size_t folds = 5;
  std::size_t max_epochs = 200;
  std::size_t hidden_units = kDefaultHiddenUnits;
  std::size_t min_samples_per_class = 10;
  RpropConfig rprop;
  EarlyStopSignal early_stop_on = EarlyStopSignal::kValidation;
  bool cv_full = false;  // also train and test every fold rotation
  std::uint64_t seed = 0;

  void validate() const;
};

// Tracks the monitored error after every epoch and signals a stop after
// `patience` consecutive increases. Epochs are 1-based.
class EarlyStopper {
 public:
  explicit EarlyStopper(std::size_t patience) : patience_(patience) {}

  // Records the error of the next epoch; true when training should stop.
  bool update(double error);

  std::size_t epochs() const { return epoch_; }
  std::size_t best_epoch() const { return best_epoch_; }
  double best_error() const { return best_error_; }
  // True when the last update() produced a new best.
  bool improved() const { return improved_; }

 private:
  std::size_t patience_;
  std::size_t epoch_ = 0;
  std::size_t best_epoch_ = 0;
  double best_error_ = 0.0;
  double last_error_ = 0.0;
  std::size_t increases_ = 0;
  bool improved_ = false;
};

struct TrainReport {
  std::size_t epochs = 0;
  std::size_t best_epoch = 0;
  double final_training_error = 0.0;  // mean cross-entropy at the returned weights
  std::vector<double> training_errors;
  std::vector<double> validation_errors;  // mean cross-entropy per epoch
  StopReason stop_reason = StopReason::kMaxEpochs;
  ConfusionCounts test_counts;               // fold 0 held out
  std::vector<ConfusionCounts> fold_counts;  // one per rotation with cv_full
  std::size_t train_samples = 0;
  std::size_t validation_samples = 0;
  std::size_t test_samples = 0;
  double train_ms = 0.0;
};

struct TrainResult {
  MlpModel model;
  TrainReport report;
};

// Full-batch RPROP on summed cross-entropy. Stops on early stopping, the
// time budget or max_epochs, and returns the weights with the lowest
// monitored error. Throws NumericError on a non-finite loss.
TrainResult train_network(const Dataset& training, const Dataset& validation, const TrainConfig& config,
                          std::uint64_t init_seed);

// Splits balanced samples into stratified folds (fold 0 test, fold 1
// validation, the rest training), trains and tests. Throws DegenerateWindow
// with fewer than min_samples_per_class samples in either class.
TrainResult train(std::span<const LabeledSample> samples, const TrainConfig& config);

// Stratified fold assignment: fold index per sample.
std::vector<std::size_t> stratified_folds(std::span<const LabeledSample> samples, std::size_t folds,
                                          std::uint64_t seed);

}  // namespace evfilter
