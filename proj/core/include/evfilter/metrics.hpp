#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evfilter/record.hpp"

namespace evfilter {

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const { return tp + fp + tn + fn; }
  ConfusionCounts& operator+=(const ConfusionCounts& o);
  bool operator==(const ConfusionCounts&) const = default;
};

// Predicted positive iff score >= threshold; label 1 is positive.
ConfusionCounts confusion_counts(std::span<const double> scores, std::span<const double> labels,
                                 double threshold = 0.5);

// nullopt marks 0/0 (reported as NA and excluded from averages).
std::optional<double> precision(const ConfusionCounts& c);
std::optional<double> recall(const ConfusionCounts& c);
// 2PR / (P + R); NA when P or R is NA or P + R = 0.
std::optional<double> f_measure(const ConfusionCounts& c);

// (p_o - p_e) / (1 - p_e); 0 when p_e = 1. Throws Error on empty counts.
double cohen_kappa(const ConfusionCounts& c);

// One metrics CSV row.
struct MetricsRow {
  std::int64_t window_index = 0;
  TimestampMs start_ts_ms = 0;
  std::size_t n_samples = 0;
  std::size_t n_pos = 0;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
  std::optional<double> kappa;
  std::optional<double> train_ms;  // NA when timing is not recorded
  std::string stop_reason;

  bool operator==(const MetricsRow&) const = default;
};

struct MetricMean {
  std::optional<double> mean;
  std::size_t defined = 0;
  std::size_t undefined = 0;
};

// Per-metric means over rows with window_index in [first, last].
struct MetricsSummary {
  std::int64_t first_window = 0;
  std::int64_t last_window = 0;
  std::size_t windows = 0;          // rows inside the range
  std::size_t trained_windows = 0;  // rows that were not skipped
  bool incomplete = false;          // the stream ended before `last`
  MetricMean precision;
  MetricMean recall;
  MetricMean f1;
  MetricMean kappa;
};

MetricsSummary summarize(std::span<const MetricsRow> rows, std::int64_t first, std::int64_t last);

inline constexpr const char* kMetricsCsvHeader =
    "window_index,start_ts_ms,n_samples,n_pos,precision,recall,f1,kappa,train_ms,stop_reason";

void write_metrics_header(std::ostream& out);
void write_metrics_row(std::ostream& out, const MetricsRow& row);
void write_metrics_csv(std::ostream& out, std::span<const MetricsRow> rows);

// Summary as a single JSON object.
std::string summary_to_json(const MetricsSummary& summary);

// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace evfilter
