#include "evfilter/mlp.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <numeric>

#include "evfilter/errors.hpp"
#include "evfilter/random.hpp"

namespace evfilter {
namespace {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstSamples = Eigen::Map<const Eigen::MatrixXd>;  // dim x n, column per sample

struct ParameterViews {
  Eigen::Map<const RowMajorMatrix> w1;
  Eigen::Map<const Eigen::VectorXd> b1;
  Eigen::Map<const Eigen::VectorXd> w2;
  double b2;

  explicit ParameterViews(const MlpModel& m)
      : w1(m.parameters().data(), static_cast<Eigen::Index>(m.hidden()), static_cast<Eigen::Index>(m.inputs())),
        b1(m.parameters().data() + m.hidden() * m.inputs(), static_cast<Eigen::Index>(m.hidden())),
        w2(m.parameters().data() + m.hidden() * m.inputs() + m.hidden(), static_cast<Eigen::Index>(m.hidden())),
        b2(m.parameters().back()) {}
};

ConstSamples samples_of(const Dataset& data) {
  return ConstSamples(data.features().data(), static_cast<Eigen::Index>(data.dim()),
                      static_cast<Eigen::Index>(data.size()));
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void check_dims(const MlpModel& model, const Dataset& data) {
  if (data.dim() != model.inputs()) throw Error("dataset dimension does not match model inputs");
}

// Hidden activations (hidden x n) and output probabilities (n).
void forward_pass(const MlpModel& model, const Dataset& data, Eigen::MatrixXd& hidden, Eigen::VectorXd& out) {
  const ParameterViews p(model);
  const auto x = samples_of(data);
  hidden.noalias() = p.w1 * x;
  hidden.colwise() += p.b1;
  hidden = hidden.array().tanh();
  out.noalias() = hidden.transpose() * p.w2;
  out.array() += p.b2;
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = sigmoid(out[i]);
}

double loss_term(double p, double y) {
  const double q = std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp);
  return -(y * std::log(q) + (1.0 - y) * std::log(1.0 - q));
}

}  // namespace

void Dataset::add(std::span<const double> x, double label, double weight) {
  if (x.size() != dim_) throw Error("sample dimension mismatch");
  features_.insert(features_.end(), x.begin(), x.end());
  labels_.push_back(label);
  weights_.push_back(weight);
}

void Dataset::reserve(std::size_t n) {
  features_.reserve(n * dim_);
  labels_.reserve(n);
  weights_.reserve(n);
}

double Dataset::total_weight() const { return std::accumulate(weights_.begin(), weights_.end(), 0.0); }

MlpModel::MlpModel(std::size_t inputs, std::size_t hidden)
    : inputs_(inputs), hidden_(hidden), params_(hidden * inputs + 2 * hidden + 1, 0.0) {
  if (inputs == 0 || hidden == 0) throw Error("network layers must be non-empty");
}

MlpModel init_network(std::uint64_t seed, std::size_t inputs, std::size_t hidden) {
  MlpModel model(inputs, hidden);
  Rng rng(seed);
  for (double& w : model.parameters()) w = rng.uniform(-0.5, 0.5);
  return model;
}

double forward(const MlpModel& model, std::span<const double> x) {
  if (x.size() != model.inputs()) throw Error("input dimension does not match model");
  const auto params = model.parameters();
  const std::size_t n_in = model.inputs();
  const std::size_t n_hidden = model.hidden();
  double z = params.back();
  for (std::size_t h = 0; h < n_hidden; ++h) {
    double a = params[n_hidden * n_in + h];
    for (std::size_t i = 0; i < n_in; ++i) a += params[h * n_in + i] * x[i];
    z += params[n_hidden * n_in + n_hidden + h] * std::tanh(a);
  }
  return sigmoid(z);
}

std::vector<double> predict(const MlpModel& model, const Dataset& data) {
  check_dims(model, data);
  if (data.empty()) return {};
  Eigen::MatrixXd hidden;
  Eigen::VectorXd out;
  forward_pass(model, data, hidden, out);
  return {out.data(), out.data() + out.size()};
}

double cross_entropy(const MlpModel& model, const Dataset& data) {
  const auto p = predict(model, data);
  double loss = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) loss += data.weights()[i] * loss_term(p[i], data.labels()[i]);
  return loss;
}

double cross_entropy_gradient(const MlpModel& model, const Dataset& data, std::span<double> gradient) {
  check_dims(model, data);
  if (gradient.size() != model.parameter_count()) throw Error("gradient buffer has wrong size");
  std::fill(gradient.begin(), gradient.end(), 0.0);
  if (data.empty()) return 0.0;

  Eigen::MatrixXd hidden;
  Eigen::VectorXd out;
  forward_pass(model, data, hidden, out);

  const auto n = static_cast<Eigen::Index>(data.size());
  Eigen::VectorXd delta_out(n);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double y = data.labels()[static_cast<std::size_t>(i)];
    const double w = data.weights()[static_cast<std::size_t>(i)];
    loss += w * loss_term(out[i], y);
    // d(loss)/d(output pre-activation) for sigmoid + cross-entropy.
    delta_out[i] = w * (out[i] - y);
  }

  const ParameterViews p(model);
  const auto hidden_units = static_cast<Eigen::Index>(model.hidden());
  const auto inputs = static_cast<Eigen::Index>(model.inputs());
  Eigen::Map<RowMajorMatrix> g_w1(gradient.data(), hidden_units, inputs);
  Eigen::Map<Eigen::VectorXd> g_b1(gradient.data() + hidden_units * inputs, hidden_units);
  Eigen::Map<Eigen::VectorXd> g_w2(gradient.data() + hidden_units * inputs + hidden_units, hidden_units);

  g_w2.noalias() = hidden * delta_out;
  gradient.back() = delta_out.sum();

  Eigen::MatrixXd delta_hidden = p.w2 * delta_out.transpose();
  delta_hidden.array() *= 1.0 - hidden.array().square();
  g_w1.noalias() = delta_hidden * samples_of(data).transpose();
  g_b1 = delta_hidden.rowwise().sum();
  return loss;
}

std::string model_to_json(const MlpModel& model) {
  nlohmann::ordered_json obj;
  obj["format"] = "evfilter-mlp";
  obj["version"] = 1;
  obj["inputs"] = model.inputs();
  obj["hidden"] = model.hidden();
  const auto params = model.parameters();
  const std::size_t n_in = model.inputs();
  const std::size_t n_hidden = model.hidden();
  auto rows = nlohmann::ordered_json::array();
  for (std::size_t h = 0; h < n_hidden; ++h) {
    rows.push_back(std::vector<double>(params.begin() + static_cast<std::ptrdiff_t>(h * n_in),
                                       params.begin() + static_cast<std::ptrdiff_t>((h + 1) * n_in)));
  }
  obj["hidden_weights"] = std::move(rows);
  const auto biases = params.subspan(n_hidden * n_in, n_hidden);
  const auto out_w = params.subspan(n_hidden * n_in + n_hidden, n_hidden);
  obj["hidden_biases"] = std::vector<double>(biases.begin(), biases.end());
  obj["output_weights"] = std::vector<double>(out_w.begin(), out_w.end());
  obj["output_bias"] = params.back();
  return obj.dump();
}

MlpModel model_from_json(std::string_view text) {
  using nlohmann::json;
  json obj = json::parse(text, nullptr, false);
  if (obj.is_discarded()) throw ParseError("malformed model JSON");
  try {
    if (obj.at("format") != "evfilter-mlp" || obj.at("version") != 1) throw SchemaError("unsupported model format");
    MlpModel model(obj.at("inputs").get<std::size_t>(), obj.at("hidden").get<std::size_t>());
    const auto rows = obj.at("hidden_weights").get<std::vector<std::vector<double>>>();
    const auto biases = obj.at("hidden_biases").get<std::vector<double>>();
    const auto out_w = obj.at("output_weights").get<std::vector<double>>();
    if (rows.size() != model.hidden() || biases.size() != model.hidden() || out_w.size() != model.hidden()) {
      throw SchemaError("model arrays do not match declared sizes");
    }
    for (std::size_t h = 0; h < model.hidden(); ++h) {
      if (rows[h].size() != model.inputs()) throw SchemaError("hidden weight row has wrong length");
      for (std::size_t i = 0; i < model.inputs(); ++i) model.hidden_weight(h, i) = rows[h][i];
      model.hidden_bias(h) = biases[h];
      model.output_weight(h) = out_w[h];
    }
    model.output_bias() = obj.at("output_bias").get<double>();
    return model;
  } catch (const json::exception& ex) {
    throw SchemaError(ex.what());
  }
}

}  // namespace evfilter
