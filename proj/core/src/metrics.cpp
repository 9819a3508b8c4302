#include "evfilter/metrics.hpp"

#include <charconv>
#include <json.hpp>
#include <ostream>

#include "evfilter/errors.hpp"

namespace evfilter {

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& o) {
  tp += o.tp;
  fp += o.fp;
  tn += o.tn;
  fn += o.fn;
  return *this;
}

ConfusionCounts confusion_counts(std::span<const double> scores, std::span<const double> labels, double threshold) {
  if (scores.size() != labels.size()) throw Error("scores and labels differ in length");
  ConfusionCounts c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    const bool actual = labels[i] >= 0.5;
    if (predicted && actual) ++c.tp;
    if (predicted && !actual) ++c.fp;
    if (!predicted && !actual) ++c.tn;
    if (!predicted && actual) ++c.fn;
  }
  return c;
}

std::optional<double> precision(const ConfusionCounts& c) {
  if (c.tp + c.fp == 0) return std::nullopt;
  return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
}

std::optional<double> recall(const ConfusionCounts& c) {
  if (c.tp + c.fn == 0) return std::nullopt;
  return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
}

std::optional<double> f_measure(const ConfusionCounts& c) {
  if (c.tp + c.fp == 0 || c.tp + c.fn == 0 || c.tp == 0) return std::nullopt;
  // 2PR/(P+R) reduced to one division of exact integers.
  return static_cast<double>(2 * c.tp) / static_cast<double>(2 * c.tp + c.fp + c.fn);
}

double cohen_kappa(const ConfusionCounts& c) {
  const auto n = static_cast<__int128>(c.total());
  if (n == 0) throw Error("kappa of empty confusion counts");
  const auto tp = static_cast<__int128>(c.tp);
  const auto fp = static_cast<__int128>(c.fp);
  const auto tn = static_cast<__int128>(c.tn);
  const auto fn = static_cast<__int128>(c.fn);
  // With S = (tp+fp)(tp+fn) + (tn+fn)(tn+fp): p_o = (tp+tn)/n, p_e = S/n^2,
  // so kappa = (n(tp+tn) - S) / (n^2 - S).
  const __int128 chance = (tp + fp) * (tp + fn) + (tn + fn) * (tn + fp);
  const __int128 denominator = n * n - chance;
  if (denominator == 0) return 0.0;
  return static_cast<double>(n * (tp + tn) - chance) / static_cast<double>(denominator);
}

MetricsSummary summarize(std::span<const MetricsRow> rows, std::int64_t first, std::int64_t last) {
  MetricsSummary s;
  s.first_window = first;
  s.last_window = last;
  double sums[4] = {0, 0, 0, 0};
  MetricMean* means[4] = {&s.precision, &s.recall, &s.f1, &s.kappa};
  std::int64_t highest = first - 1;
  for (const auto& row : rows) {
    if (row.window_index < first || row.window_index > last) continue;
    ++s.windows;
    highest = std::max(highest, row.window_index);
    if (row.stop_reason.rfind("skipped", 0) != 0) ++s.trained_windows;
    const std::optional<double>* values[4] = {&row.precision, &row.recall, &row.f1, &row.kappa};
    for (int k = 0; k < 4; ++k) {
      if (*values[k]) {
        sums[k] += **values[k];
        ++means[k]->defined;
      } else {
        ++means[k]->undefined;
      }
    }
  }
  for (int k = 0; k < 4; ++k) {
    if (means[k]->defined > 0) means[k]->mean = sums[k] / static_cast<double>(means[k]->defined);
  }
  s.incomplete = highest < last;
  return s;
}

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

namespace {

std::string cell(const std::optional<double>& v) { return v ? format_double(*v) : "NA"; }

}  // namespace

void write_metrics_header(std::ostream& out) { out << kMetricsCsvHeader << '\n'; }

void write_metrics_row(std::ostream& out, const MetricsRow& row) {
  out << row.window_index << ',' << row.start_ts_ms << ',' << row.n_samples << ',' << row.n_pos << ','
      << cell(row.precision) << ',' << cell(row.recall) << ',' << cell(row.f1) << ',' << cell(row.kappa) << ','
      << cell(row.train_ms) << ',' << row.stop_reason << '\n';
}

void write_metrics_csv(std::ostream& out, std::span<const MetricsRow> rows) {
  write_metrics_header(out);
  for (const auto& row : rows) write_metrics_row(out, row);
}

std::string summary_to_json(const MetricsSummary& summary) {
  nlohmann::ordered_json obj;
  obj["windows"] = {summary.first_window, summary.last_window};
  obj["observed_windows"] = summary.windows;
  obj["trained_windows"] = summary.trained_windows;
  obj["incomplete"] = summary.incomplete;
  auto metric = [](const MetricMean& m) {
    nlohmann::ordered_json j;
    j["mean"] = m.mean ? nlohmann::ordered_json(*m.mean) : nlohmann::ordered_json(nullptr);
    j["defined"] = m.defined;
    j["undefined"] = m.undefined;
    return j;
  };
  obj["precision"] = metric(summary.precision);
  obj["recall"] = metric(summary.recall);
  obj["f1"] = metric(summary.f1);
  obj["kappa"] = metric(summary.kappa);
  return obj.dump();
}

}  // namespace evfilter
