#include "evfilter/cli.hpp"

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <csignal>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include "evfilter/errors.hpp"
#include "evfilter/experiment.hpp"
#include "evfilter/metrics.hpp"
#include "evfilter/pipeline.hpp"
#include "evfilter/record.hpp"
#include "evfilter/synth.hpp"

namespace evfilter::cli {
namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop.store(true); }

// Restores the previous handlers on scope exit.
class SignalGuard {
 public:
  SignalGuard() {
    g_stop.store(false);
    int_ = std::signal(SIGINT, on_signal);
    term_ = std::signal(SIGTERM, on_signal);
  }
  ~SignalGuard() {
    std::signal(SIGINT, int_);
    std::signal(SIGTERM, term_);
  }
  SignalGuard(const SignalGuard&) = delete;
  SignalGuard& operator=(const SignalGuard&) = delete;

 private:
  void (*int_)(int) = SIG_DFL;
  void (*term_)(int) = SIG_DFL;
};

const CLI::Validator kWindowRange(
    [](std::string& value) -> std::string {
      const auto colon = value.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == value.size() ||
          value.find_first_not_of("0123456789:") != std::string::npos || value.find(':', colon + 1) != std::string::npos) {
        return "expected FIRST:LAST, got '" + value + "'";
      }
      return {};
    },
    "FIRST:LAST");

void configure(CLI::App& app, Options& o) {
  app.description("Event-based stream filter with per-window retrained neural scoring");
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "Read flat key=value options from PATH (flags take precedence)");
  app.get_config_ptr()->type_name("PATH");
  app.option_defaults()->always_capture_default();

  app.add_option("--input", o.input, "Input JSON-lines stream, - for stdin")->type_name("PATH");
  app.add_option("--output", o.output, "Scored stream (filter) or generated stream (synth), - for stdout")
      ->type_name("PATH");
  app.add_option("--metrics-out", o.metrics_out, "Per-window metrics CSV (experiment: stdout when unset)")
      ->type_name("PATH");
  app.add_option("--event-log", o.event_log, "Write every atomic event as JSON lines")->type_name("PATH");
  app.add_option("--samples-out", o.samples_out, "Experiment: dump labeled feature rows as CSV")->type_name("PATH");
  app.add_option("--model-out", o.model_out, "Filter: write the last published model as JSON")->type_name("PATH");

  app.add_option("--rate", o.rate, "Records per second (replay pacing; synth generation rate)")
      ->check(CLI::PositiveNumber);
  app.add_option("--clock", o.clock, "Replay clock for filter")->check(CLI::IsMember({"wall", "data"}));
  app.add_option("--max-skew-ms", o.max_skew_ms, "Reorder tolerance for out-of-order records")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--duration", o.duration, "Synth: stream seconds (default 600); filter: stop after N seconds")
      ->check(CLI::NonNegativeNumber);

  app.add_option("--window-secs", o.window_secs, "Sliding window length")->check(CLI::PositiveNumber);
  app.add_option("--slide-secs", o.slide_secs, "Slide interval / retraining period")->check(CLI::PositiveNumber);
  app.add_flag("--feature-length,!--no-feature-length", o.feature_length, "Add scaled text length as 16th input");
  app.add_option("--top-percentile", o.top_percentile, "Keep scores at or above this quantile")
      ->check(CLI::Range(0.0, 1.0));

  app.add_option("--train-budget-secs", o.train_budget_secs, "Wall-clock training budget per window, <= 0 unlimited");
  app.add_option("--early-stop-on", o.early_stop_on, "Error monitored for early stopping")
      ->check(CLI::IsMember({"validation", "train"}));
  app.add_flag("--cv-full,!--no-cv-full", o.cv_full, "Also train and test every fold rotation");
  app.add_option("--max-epochs", o.max_epochs, "Epoch cap per window")->check(CLI::PositiveNumber);
  app.add_option("--hidden", o.hidden, "Hidden units")->check(CLI::PositiveNumber);

  app.add_option("--mode", o.mode, "Experiment mode")->check(CLI::IsMember({"real", "random-baseline", "synthetic"}));
  app.add_option("--windows", o.windows, "Window index range evaluated by experiment")->check(kWindowRange);
  app.add_flag("--timing,!--no-timing", o.timing, "Experiment: record train_ms (makes the CSV non-reproducible)");
  app.add_option("--seed", o.seed, "Seed for sampling, initialization and generation");

  app.add_option("--p-hi", o.p_hi, "Synth: retweet probability of planted records")->check(CLI::Range(0.0, 1.0));
  app.add_option("--p-lo", o.p_lo, "Synth: retweet probability of other records")->check(CLI::Range(0.0, 1.0));
  app.add_option("--vocab-size", o.vocab_size, "Synth: vocabulary size")->check(CLI::PositiveNumber);
  app.add_option("--zipf-s", o.zipf_s, "Synth: Zipf exponent")->check(CLI::NonNegativeNumber);

  app.add_option("--log-level", o.log_level, "Log level on stderr")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  app.add_subcommand("filter", "Replay a stream, retrain per slide and emit scored JSON lines");
  app.add_subcommand("experiment", "Run an evaluation mode and write the per-window metrics CSV");
  app.add_subcommand("synth", "Generate a synthetic stream with planted retweet patterns");
  app.add_subcommand("validate", "Check an input stream against the record schema");
}

std::pair<std::int64_t, std::int64_t> parse_windows(const std::string& text) {
  const auto colon = text.find(':');
  return {std::stoll(text.substr(0, colon)), std::stoll(text.substr(colon + 1))};
}

// Cross-option rules CLI11 validators cannot express.
void check_combinations(const Options& o) {
  if (o.slide_secs > o.window_secs) throw CLI::ValidationError("--slide-secs", "must not exceed --window-secs");
  if (!(o.top_percentile > 0.0 && o.top_percentile < 1.0)) {
    throw CLI::ValidationError("--top-percentile", "must lie strictly between 0 and 1");
  }
  const auto [first, last] = parse_windows(o.windows);
  if (first < 1 || last < first) throw CLI::ValidationError("--windows", "need 1 <= FIRST <= LAST");
  if (std::llround(o.window_secs * 1000) < 1 || std::llround(o.slide_secs * 1000) < 1) {
    throw CLI::ValidationError("--window-secs", "window and slide must be at least 1 ms");
  }
}

std::string command_of(const CLI::App& app) {
  for (const auto* sub : app.get_subcommands()) return sub->get_name();
  return {};
}

TimestampMs to_ms(double secs) { return static_cast<TimestampMs>(std::llround(secs * 1000.0)); }

PipelineConfig pipeline_config(const Options& o) {
  PipelineConfig c;
  c.window_ms = to_ms(o.window_secs);
  c.slide_ms = to_ms(o.slide_secs);
  c.top_percentile = o.top_percentile;
  c.features.include_text_length = o.feature_length;
  c.train.max_seconds = o.train_budget_secs;
  c.train.early_stop_on = o.early_stop_on == "train" ? EarlyStopSignal::kTraining : EarlyStopSignal::kValidation;
  c.train.cv_full = o.cv_full;
  c.train.max_epochs = o.max_epochs;
  c.train.hidden_units = o.hidden;
  c.seed = o.seed;
  return c;
}

SynthConfig synth_config(const Options& o) {
  SynthConfig c;
  c.rate = o.rate;
  c.duration_secs = o.duration > 0 ? o.duration : 600.0;
  c.vocab_size = o.vocab_size;
  c.zipf_s = o.zipf_s;
  c.p_hi = o.p_hi;
  c.p_lo = o.p_lo;
  c.seed = o.seed;
  return c;
}

// Input/output helpers: "-" maps to the given standard stream.
class Input {
 public:
  explicit Input(const std::string& path) {
    if (path == "-") return;
    file_.open(path);
    if (!file_) throw IoError("cannot open input " + path);
  }
  std::istream& get() { return file_.is_open() ? static_cast<std::istream&>(file_) : std::cin; }

 private:
  std::ifstream file_;
};

std::unique_ptr<std::ofstream> open_output(const std::string& path) {
  if (path.empty() || path == "-") return nullptr;
  auto file = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
  if (!*file) throw IoError("cannot open output " + path);
  return file;
}

int run_filter(const Options& o, std::ostream& out) {
  FilterConfig config;
  config.pipeline = pipeline_config(o);
  config.replay.rate = o.rate;
  config.replay.clock = o.clock == "data" ? ClockMode::kData : ClockMode::kWall;
  config.replay.max_skew_ms = o.max_skew_ms;

  Input input(o.input);
  auto scored_file = open_output(o.output);
  auto metrics_file = open_output(o.metrics_out);
  auto event_file = open_output(o.event_log);
  std::ostream& scored = scored_file ? *scored_file : out;

  SignalGuard guard;
  std::mutex mutex;
  std::condition_variable wake;
  bool finished = false;
  std::thread watchdog;
  if (o.duration > 0) {
    watchdog = std::thread([&] {
      std::unique_lock lock(mutex);
      if (!wake.wait_for(lock, std::chrono::duration<double>(o.duration), [&] { return finished; })) g_stop = true;
    });
  }

  FilterPipeline pipeline(config, &scored, metrics_file.get(), event_file.get());
  const auto stats = pipeline.run(input.get(), &g_stop);
  {
    std::lock_guard lock(mutex);
    finished = true;
  }
  wake.notify_all();
  if (watchdog.joinable()) watchdog.join();

  spdlog::info(
      "filter: {} lines, {} processed, {} dropped, {} parse errors, {} windows trained, {} skipped, "
      "max train {:.3f}s, max record latency {:.3f}ms",
      stats.replay.lines, stats.processed, stats.replay.dropped() + stats.stale, stats.replay.parse_errors,
      stats.windows_trained, stats.windows_skipped, stats.max_train_seconds, stats.max_record_latency_ms);
  if (!o.model_out.empty()) {
    const auto model = pipeline.models().current();
    if (!model) throw Error("no model was published; nothing to write to " + o.model_out);
    auto file = open_output(o.model_out);
    *file << model_to_json(model->model) << '\n';
  }
  return kOk;  // an interrupted live filter is a normal shutdown
}

int run_experiment_command(const Options& o, std::ostream& out) {
  ExperimentConfig config;
  config.pipeline = pipeline_config(o);
  config.mode = *parse_experiment_mode(o.mode);
  std::tie(config.first_window, config.last_window) = parse_windows(o.windows);
  config.record_timing = o.timing;
  config.max_skew_ms = o.max_skew_ms;
  config.synth = synth_config(o);

  std::istringstream none;
  std::unique_ptr<Input> input;
  if (config.mode != ExperimentMode::kSynthetic) input = std::make_unique<Input>(o.input);
  auto metrics_file = open_output(o.metrics_out);
  auto samples_file = open_output(o.samples_out);

  SignalGuard guard;
  const auto result = run_experiment(input ? input->get() : none, config, metrics_file ? metrics_file.get() : &out,
                                     samples_file.get(), &g_stop);
  spdlog::info("experiment {}: {}", o.mode, summary_to_json(result.summary));
  return g_stop ? kRuntimeFailure : kOk;
}

int run_synth(const Options& o, std::ostream& out) {
  const auto config = synth_config(o);
  config.validate();
  auto file = open_output(o.output);
  generate_synthetic_stream(config, file ? *file : out);
  return kOk;
}

int run_validate(const Options& o, std::ostream& out) {
  Input input(o.input);
  std::string line;
  std::size_t line_no = 0;
  std::size_t bad = 0;
  while (std::getline(input.get(), line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      (void)parse_record(line);
    } catch (const Error& e) {
      ++bad;
      out << "line " << line_no << ": " << e.what() << '\n';
    }
  }
  out << line_no << " lines, " << bad << " invalid\n";
  return bad == 0 ? kOk : kRuntimeFailure;
}

void setup_logging(const std::string& level) {
  static const auto logger = [] {
    auto l = std::make_shared<spdlog::logger>("evfilter", std::make_shared<spdlog::sinks::stderr_sink_mt>());
    spdlog::set_default_logger(l);
    return l;
  }();
  logger->set_level(spdlog::level::from_str(level));
}

}  // namespace

Options parse_options(int argc, const char* const* argv) {
  Options options;
  CLI::App app{"evfilter"};
  configure(app, options);
  app.parse(argc, argv);
  check_combinations(options);
  options.command = command_of(app);
  return options;
}

std::string options_to_config(const Options& o) {
  std::ostringstream s;
  auto str = [&](const char* key, const std::string& v) {
    if (!v.empty()) s << key << "=\"" << v << "\"\n";
  };
  auto num = [&](const char* key, double v) { s << key << '=' << format_double(v) << '\n'; };
  auto integer = [&](const char* key, auto v) { s << key << '=' << v << '\n'; };
  auto flag = [&](const char* key, bool v) { s << key << '=' << (v ? "true" : "false") << '\n'; };
  str("input", o.input);
  str("output", o.output);
  str("metrics-out", o.metrics_out);
  str("event-log", o.event_log);
  str("samples-out", o.samples_out);
  str("model-out", o.model_out);
  num("rate", o.rate);
  str("clock", o.clock);
  integer("max-skew-ms", o.max_skew_ms);
  num("duration", o.duration);
  num("window-secs", o.window_secs);
  num("slide-secs", o.slide_secs);
  flag("feature-length", o.feature_length);
  num("top-percentile", o.top_percentile);
  num("train-budget-secs", o.train_budget_secs);
  str("early-stop-on", o.early_stop_on);
  flag("cv-full", o.cv_full);
  integer("max-epochs", o.max_epochs);
  integer("hidden", o.hidden);
  str("mode", o.mode);
  str("windows", o.windows);
  flag("timing", o.timing);
  integer("seed", o.seed);
  num("p-hi", o.p_hi);
  num("p-lo", o.p_lo);
  integer("vocab-size", o.vocab_size);
  num("zipf-s", o.zipf_s);
  str("log-level", o.log_level);
  return s.str();
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options options;
  CLI::App app{"evfilter"};
  configure(app, options);
  try {
    app.parse(argc, argv);
    check_combinations(options);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }
  options.command = command_of(app);
  setup_logging(options.log_level);

  try {
    if (options.command == "filter") return run_filter(options, out);
    if (options.command == "experiment") return run_experiment_command(options, out);
    if (options.command == "synth") return run_synth(options, out);
    if (options.command == "validate") return run_validate(options, out);
    err << "unknown command\n";
    return kUsageError;
  } catch (const std::exception& e) {
    err << "evfilter " << options.command << ": " << e.what() << '\n';
    return kRuntimeFailure;
  }
}

}  // namespace evfilter::cli
