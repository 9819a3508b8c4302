#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

namespace evfilter::cli {

enum ExitCode : int { kOk = 0, kRuntimeFailure = 1, kUsageError = 2 };

// Everything settable by flag or config file.
struct Options {
  std::string command;  // filter | experiment | synth | validate

  std::string input = "-";
  std::string output = "-";
  std::string metrics_out;
  std::string event_log;
  std::string samples_out;
  std::string model_out;

  double rate = 100.0;
  std::string clock = "wall";
  std::int64_t max_skew_ms = 5000;
  double duration = 0.0;  // synth: seconds of stream (600 when unset); filter: run limit

  double window_secs = 120.0;
  double slide_secs = 10.0;
  bool feature_length = false;
  double top_percentile = 0.9;

  double train_budget_secs = 10.0;
  std::string early_stop_on = "validation";
  bool cv_full = false;
  std::size_t max_epochs = 200;
  std::size_t hidden = 10;

  std::string mode = "real";
  std::string windows = "20:200";
  bool timing = false;
  std::uint64_t seed = 1;

  double p_hi = 0.6;
  double p_lo = 0.01;
  std::size_t vocab_size = 5000;
  double zipf_s = 1.0;

  std::string log_level = "info";
};

// Parses argv only (no side effects). Throws CLI::ParseError subclasses.
Options parse_options(int argc, const char* const* argv);

// Flat key=value rendering of every option; reading it back with --config
// reproduces `options`.
std::string options_to_config(const Options& options);

// Full entry point: returns the process exit code. Data goes to `out`,
// usage text and diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace evfilter::cli
