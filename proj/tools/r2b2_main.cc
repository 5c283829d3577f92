// Copyright 2026 The R2B2 Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line driver: run experiments, re-aggregate trace directories and
// audit single traces.
//
//   r2b2 run <config> [--workers N] [--format csv|json] [--master-seed U64]
//                     [--metric mean-regret|external-regret] [--output PATH]
//                     [--trace-dir DIR]
//   r2b2 aggregate <trace-dir> [--format ..] [--metric ..] [--output PATH]
//   r2b2 verify <trace> <config>
//
// Exit codes: 0 success, 1 validation (including a failed verify), 2 too many
// numerically failed replications, 3 I/O.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "r2b2/errors.h"
#include "r2b2/experiment.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitIo = 3;

void Emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    if (!std::cout) throw r2b2::IoError("failed writing to stdout");
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw r2b2::IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw r2b2::IoError("failed writing '" + path + "'");
}

struct CommonFlags {
  std::string format;
  std::string metric;
  std::string output;
};

void AddCommonFlags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--format", flags.format, "Result format")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--metric", flags.metric, "Regret metric")
      ->check(CLI::IsMember({"mean-regret", "external-regret"}));
  cmd->add_option("-o,--output", flags.output,
                  "Result file ('-' for stdout; default from config)");
}

int Run(const std::string& config_path, int workers,
        std::optional<std::uint64_t> master_seed, const CommonFlags& flags,
        const std::string& trace_dir, bool quiet) {
  r2b2::ExperimentConfig config = r2b2::LoadConfig(config_path);
  if (master_seed) config.master_seed = *master_seed;
  if (!flags.format.empty()) config.format = r2b2::ParseOutputFormat(flags.format);
  if (!flags.metric.empty()) config.metric = r2b2::ParseMetric(flags.metric);
  if (!flags.output.empty()) config.results_path = flags.output;
  if (!trace_dir.empty()) config.trace_dir = trace_dir;

  r2b2::ProgressCallback progress;
  if (!quiet) {
    progress = [](std::size_t done, std::size_t total) {
      std::fprintf(stderr, "\rreplications: %zu/%zu", done, total);
      if (done == total) std::fprintf(stderr, "\n");
    };
  }
  const r2b2::ExperimentResult result =
      r2b2::RunExperiment(config, workers, progress);
  for (const auto& r : result.replications) {
    if (!r.ok) {
      std::fprintf(stderr, "replication %zu failed: %s\n", r.plan.index,
                   r.error.c_str());
    }
  }
  if (!config.trace_dir.empty()) {
    r2b2::WriteTraceDir(config, result, config.trace_dir);
  }
  if (result.TooManyFailures()) {
    std::fprintf(stderr, "%zu of %zu replications failed (limit 10%%)\n",
                 result.failed, result.replications.size());
    return kExitNumerical;
  }
  Emit(r2b2::FormatResults(result.aggregate, config.format), config.results_path);
  return kExitOk;
}

int Aggregate(const std::string& dir, const CommonFlags& flags) {
  std::optional<r2b2::Metric> metric;
  if (!flags.metric.empty()) metric = r2b2::ParseMetric(flags.metric);
  const r2b2::TraceDirAggregate agg = r2b2::AggregateTraceDir(dir, metric);
  const r2b2::OutputFormat format = flags.format.empty()
                                        ? agg.config.format
                                        : r2b2::ParseOutputFormat(flags.format);
  if (agg.failed * 10 > agg.total) {
    std::fprintf(stderr, "%zu of %zu replications failed (limit 10%%)\n",
                 agg.failed, agg.total);
    return kExitNumerical;
  }
  Emit(r2b2::FormatResults(agg.aggregate, format), flags.output);
  return kExitOk;
}

int Verify(const std::string& trace_path, const std::string& config_path) {
  const r2b2::ExperimentConfig config = r2b2::LoadConfig(config_path);
  const r2b2::VerifyReport report = r2b2::VerifyTrace(config, trace_path);
  for (const auto& m : report.mismatches) {
    std::fprintf(stderr, "mismatch: %s\n", m.c_str());
  }
  std::printf("%s: %d iterations checked, %s\n", trace_path.c_str(),
              report.iterations_checked, report.ok ? "OK" : "MISMATCH");
  return report.ok ? kExitOk : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Level-k GP-UCB agents for repeated games"};
  app.require_subcommand(1);

  std::string config_path;
  std::string trace_dir;
  int workers = 0;
  std::optional<std::uint64_t> master_seed;
  bool quiet = false;
  CommonFlags run_flags;
  CLI::App* run = app.add_subcommand("run", "Run an experiment config");
  run->add_option("config", config_path, "Experiment config (JSON)")
      ->required();
  run->add_option("--workers", workers,
                  "Worker threads (0 = hardware concurrency)");
  run->add_option("--master-seed", master_seed, "Override the master seed");
  run->add_option("--trace-dir", trace_dir, "Persist raw traces here");
  run->add_flag("-q,--quiet", quiet, "No progress output");
  AddCommonFlags(run, run_flags);

  std::string agg_dir;
  CommonFlags agg_flags;
  CLI::App* aggregate =
      app.add_subcommand("aggregate", "Recompute results from a trace directory");
  aggregate->add_option("trace-dir", agg_dir, "Trace directory")->required();
  AddCommonFlags(aggregate, agg_flags);

  std::string verify_trace;
  std::string verify_config;
  CLI::App* verify =
      app.add_subcommand("verify", "Replay one trace and check every step");
  verify->add_option("trace", verify_trace, "Trace file (.jsonl)")->required();
  verify->add_option("config", verify_config, "Experiment config")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*run) {
      return Run(config_path, workers, master_seed, run_flags, trace_dir, quiet);
    }
    if (*aggregate) return Aggregate(agg_dir, agg_flags);
    if (*verify) return Verify(verify_trace, verify_config);
  } catch (const r2b2::IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  } catch (const r2b2::NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  }
  return kExitOk;
}
