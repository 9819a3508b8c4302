#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace evfilter {

inline constexpr std::size_t kDefaultHiddenUnits = 10;

// Training/evaluation rows. Features are stored sample-major: sample i
// occupies features[i * dim, (i + 1) * dim). Each sample carries a weight so
// duplicated rows can be collapsed without changing the summed loss.
class Dataset {
 public:
  explicit Dataset(std::size_t dim) : dim_(dim) {}

  void add(std::span<const double> x, double label, double weight = 1.0);
  void reserve(std::size_t n);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }

  std::span<const double> row(std::size_t i) const { return {features_.data() + i * dim_, dim_}; }
  std::span<const double> features() const { return features_; }
  std::span<const double> labels() const { return labels_; }
  std::span<const double> weights() const { return weights_; }
  double total_weight() const;

 private:
  std::size_t dim_;
  std::vector<double> features_;
  std::vector<double> labels_;
  std::vector<double> weights_;
};

// inputs-hidden-1 perceptron: tanh hidden layer, logistic output.
//
// Parameters live in one flat vector:
//   [0, H*I)          hidden weights, row h holds the I weights of unit h
//   [H*I, H*I+H)      hidden biases
//   [H*I+H, H*I+2H)   output weights
//   [H*I+2H]          output bias
class MlpModel {
 public:
  MlpModel(std::size_t inputs, std::size_t hidden);

  std::size_t inputs() const { return inputs_; }
  std::size_t hidden() const { return hidden_; }
  std::size_t parameter_count() const { return params_.size(); }

  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }

  double& hidden_weight(std::size_t unit, std::size_t input) { return params_[unit * inputs_ + input]; }
  double& hidden_bias(std::size_t unit) { return params_[hidden_ * inputs_ + unit]; }
  double& output_weight(std::size_t unit) { return params_[hidden_ * inputs_ + hidden_ + unit]; }
  double& output_bias() { return params_.back(); }

  bool operator==(const MlpModel&) const = default;

 private:
  std::size_t inputs_;
  std::size_t hidden_;
  std::vector<double> params_;
};

// Weights and biases uniform in [-0.5, 0.5], deterministic per seed.
MlpModel init_network(std::uint64_t seed, std::size_t inputs = 15, std::size_t hidden = kDefaultHiddenUnits);

// sigmoid(w2 . tanh(W1 x + b1) + b2), in (0, 1).
double forward(const MlpModel& model, std::span<const double> x);

// forward() for every row of `data`.
std::vector<double> predict(const MlpModel& model, const Dataset& data);

// Predictions are clamped to [1e-12, 1 - 1e-12] inside the logarithms.
inline constexpr double kProbabilityClamp = 1e-12;

// Weighted binary cross-entropy, summed: -sum w [y ln p + (1-y) ln(1-p)].
double cross_entropy(const MlpModel& model, const Dataset& data);

// Same loss; writes dE/dparameter into `gradient` (size parameter_count()).
double cross_entropy_gradient(const MlpModel& model, const Dataset& data, std::span<double> gradient);

// JSON model dump: {"format":"evfilter-mlp","version":1,"inputs":I,
// "hidden":H,"hidden_weights":[[...] x H],"hidden_biases":[...],
// "output_weights":[...],"output_bias":b}. Doubles round-trip exactly.
std::string model_to_json(const MlpModel& model);
MlpModel model_from_json(std::string_view text);

}  // namespace evfilter
