#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "evfilter/cli.hpp"
#include "evfilter/metrics.hpp"

namespace fs = std::filesystem;
using evfilter::cli::options_to_config;
using evfilter::cli::parse_options;
using evfilter::cli::run_cli;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "evfilter");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

evfilter::cli::Options parse(std::vector<std::string> args) {
  args.insert(args.begin(), "evfilter");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return parse_options(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "evfilter-cli-test";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("synth is deterministic through the CLI") {
  const auto a = scratch("a.jsonl"), b = scratch("b.jsonl");
  for (const auto& p : {a, b}) {
    CHECK(cli({"synth", "--seed", "7", "--rate", "100", "--duration", "60", "--output", p.string()}).code == 0);
  }
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a).size() > 100'000);
  CHECK(cli({"--seed", "7", "synth", "--duration", "5"}).out == cli({"synth", "--duration", "5", "--seed", "7"}).out);
}

TEST_CASE("experiment writes the metrics header") {
  const auto stream = scratch("exp.jsonl"), csv = scratch("exp.csv");
  REQUIRE(cli({"synth", "--seed", "3", "--rate", "20", "--duration", "90", "--output", stream.string()}).code == 0);
  const auto run = cli({"experiment", "--mode", "random-baseline", "--input", stream.string(), "--windows", "2:4",
                        "--window-secs", "30", "--max-epochs", "20", "--metrics-out", csv.string()});
  CHECK(run.code == 0);
  const auto text = slurp(csv);
  CHECK(text.substr(0, text.find('\n')) == evfilter::kMetricsCsvHeader);
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);
}

TEST_CASE("validate reports offending lines") {
  const auto file = scratch("bad.jsonl");
  {
    std::ofstream out(file);
    out << R"({"id":"1","ts":0,"text":"ok"})" << '\n'
        << "{broken\n"
        << R"({"id":"3","ts":0,"text":"ok"})" << '\n'
        << R"({"id":"4","text":"no ts"})" << '\n';
  }
  const auto run = cli({"validate", "--input", file.string()});
  CHECK(run.code == 1);
  CHECK(run.out.find("line 2:") != std::string::npos);
  CHECK(run.out.find("line 4:") != std::string::npos);
  CHECK(run.out.find("line 1:") == std::string::npos);
  CHECK(run.out.find("4 lines, 2 invalid") != std::string::npos);
}

TEST_CASE("exit codes") {
  CHECK(cli({"--help"}).code == 0);
  CHECK(cli({"synth", "--help"}).code == 0);
  CHECK(cli({"--help"}).out.find("--train-budget-secs") != std::string::npos);
  CHECK(cli({}).code == 2);
  CHECK(cli({"synth", "--no-such-flag"}).code == 2);
  CHECK(cli({"frobnicate"}).code == 2);
  CHECK(cli({"experiment", "--mode", "fancy"}).code == 2);
  CHECK(cli({"experiment", "--windows", "20-200"}).code == 2);
  CHECK(cli({"experiment", "--windows", "50:20"}).code == 2);
  CHECK(cli({"filter", "--window-secs", "5", "--slide-secs", "10"}).code == 2);
  CHECK(cli({"filter", "--top-percentile", "1"}).code == 2);
  CHECK(cli({"filter", "--clock", "sundial"}).code == 2);
  CHECK(cli({"synth", "--config", "/nonexistent/evfilter.conf"}).code == 2);
  const auto missing = cli({"validate", "--input", "/nonexistent/stream.jsonl"});
  CHECK(missing.code == 1);
  CHECK(missing.err.find("cannot open") != std::string::npos);
  CHECK(cli({"experiment", "--input", "/nonexistent/stream.jsonl"}).code == 1);
  CHECK(cli({"synth", "--output", "/nonexistent/dir/out.jsonl"}).code == 1);
}

TEST_CASE("every option round-trips through the config file") {
  const std::vector<std::string> args = {
      "experiment",       "--input",        "in.jsonl",   "--output",     "out.jsonl", "--metrics-out",
      "m.csv",            "--event-log",    "e.jsonl",    "--samples-out", "s.csv",    "--model-out",
      "model.json",       "--rate",         "250.5",      "--clock",      "data",      "--max-skew-ms",
      "1234",             "--duration",     "42",         "--window-secs", "60",       "--slide-secs",
      "5",                "--feature-length", "--top-percentile", "0.75",  "--train-budget-secs", "3.5",
      "--early-stop-on",  "train",          "--cv-full",  "--max-epochs", "77",        "--hidden",
      "12",               "--mode",         "synthetic",  "--windows",    "5:50",      "--timing",
      "--seed",           "99",             "--p-hi",     "0.7",          "--p-lo",    "0.02",
      "--vocab-size",     "321",            "--zipf-s",   "1.3",          "--log-level", "warn"};
  const auto original = parse(args);
  const auto text = options_to_config(original);
  const auto file = scratch("round.conf");
  {
    std::ofstream out(file);
    out << text;
  }
  const auto reread = parse({"--config", file.string(), "experiment"});
  CHECK(options_to_config(reread) == text);
  CHECK(reread.feature_length);
  CHECK(reread.cv_full);
  CHECK(reread.windows == "5:50");
  CHECK(reread.seed == 99);

  // Defaults round-trip too.
  {
    std::ofstream out(file);
    out << options_to_config(parse({"synth"}));
  }
  CHECK(options_to_config(parse({"--config", file.string(), "synth"})) == options_to_config(parse({"synth"})));
}

TEST_CASE("flags override the config file, which overrides defaults") {
  const auto file = scratch("prec.conf");
  {
    std::ofstream out(file);
    out << "seed=5\nrate=50\n# comment\nmode=random-baseline\n";
  }
  const auto o = parse({"--config", file.string(), "experiment", "--seed", "6"});
  CHECK(o.seed == 6);
  CHECK(o.rate == 50);
  CHECK(o.mode == "random-baseline");
  CHECK(o.window_secs == 120);
  CHECK(o.command == "experiment");
}
