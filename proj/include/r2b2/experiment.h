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

#ifndef R2B2_EXPERIMENT_H_
#define R2B2_EXPERIMENT_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "r2b2/game.h"
#include "r2b2/kernel.h"

namespace r2b2 {

inline constexpr int kConfigSchemaVersion = 1;

enum class Metric { kMeanRegret, kExternalRegret };
std::string MetricName(Metric metric);
Metric ParseMetric(const std::string& name);

enum class OutputFormat { kCsv, kJson };
std::string OutputFormatName(OutputFormat format);
OutputFormat ParseOutputFormat(const std::string& name);

struct ExperimentConfig {
  GameType game_type = GameType::kGeneralSum;
  std::vector<std::vector<int>> grids{{20}, {20}};  // points per axis, per agent
  KernelSpec kernel;
  std::vector<AgentSpec> agents{AgentSpec{}, AgentSpec{}};
  int horizon = 150;
  int num_function_samples = 10;
  int num_inits = 5;
  int init_size = 1;
  double delta = 0.1;
  bool tight_beta = false;
  double beta_scale = 1.0;
  Metric metric = Metric::kMeanRegret;
  int metric_agent = 0;
  std::uint64_t master_seed = 0;
  // Output locations; not part of the digest.
  std::string results_path;
  OutputFormat format = OutputFormat::kCsv;
  std::string trace_dir;

  // Throws ConfigError naming the offending field.
  void Validate() const;
  JointSpace MakeJointSpace() const;
  GameOptions MakeGameOptions(std::uint64_t run_seed) const;

  nlohmann::ordered_json ToJson() const;
  static ExperimentConfig FromJson(const nlohmann::ordered_json& j);
  // FNV-1a (hex) of the canonical JSON without the output section.
  std::string Digest() const;
};

ExperimentConfig LoadConfig(const std::string& path);
void SaveConfig(const ExperimentConfig& config, const std::string& path);

// Replication r covers payoff draw r / num_inits and initialization
// r % num_inits.
struct ReplicationPlan {
  std::size_t index = 0;
  int draw = 0;
  int init = 0;
  std::uint64_t game_seed = 0;
  std::uint64_t run_seed = 0;
};

std::uint64_t GameSeed(std::uint64_t master_seed, int draw);
ReplicationPlan PlanReplication(const ExperimentConfig& config,
                                std::size_t index);

struct ReplicationOutcome {
  ReplicationPlan plan;
  bool ok = false;
  std::string error;
  GameTrace trace;
  std::vector<double> metric;  // per iteration
};

struct AggregateResult {
  std::vector<double> mean;
  std::vector<double> std_error;  // empty when only one replication
  std::size_t replications = 0;
};

struct ExperimentResult {
  AggregateResult aggregate;
  std::vector<std::shared_ptr<const PayoffTable>> games;  // per draw; null if failed
  std::vector<ReplicationOutcome> replications;
  std::size_t failed = 0;

  // More than 10% of replications failed numerically.
  bool TooManyFailures() const;
};

std::vector<double> MetricCurve(Metric metric, const GameTrace& trace,
                                const PayoffTable& game, std::size_t agent);

// Pointwise mean and standard error (sample std / sqrt(n)) of equal-length
// curves.
AggregateResult Aggregate(const std::vector<std::vector<double>>& curves);

using ProgressCallback = std::function<void(std::size_t done, std::size_t total)>;

// Runs every replication on `workers` threads (<= 0: hardware concurrency).
// Results are folded in replication order, so output does not depend on the
// worker count. Replications hitting a NumericalError are recorded as failed
// and excluded from the aggregate.
ExperimentResult RunExperiment(const ExperimentConfig& config, int workers,
                               const ProgressCallback& progress = {});

// iteration,metric_mean,metric_stderr,n_replications with %.17g values; the
// stderr column is omitted for a single replication.
std::string FormatResults(const AggregateResult& result, OutputFormat format);

// manifest.json, game_<draw>.json and trace_<replication>.jsonl.
void WriteTraceDir(const ExperimentConfig& config,
                   const ExperimentResult& result, const std::string& dir);

struct TraceDirAggregate {
  ExperimentConfig config;
  AggregateResult aggregate;
  std::size_t total = 0;
  std::size_t failed = 0;
};

// Recomputes the aggregate from a trace directory without re-running games.
TraceDirAggregate AggregateTraceDir(const std::string& dir,
                                    std::optional<Metric> metric = {});

struct VerifyReport {
  bool ok = true;
  int iterations_checked = 0;
  std::vector<std::string> mismatches;
};

// Replays a trace offline: rebuilds the payoff table and the agents from the
// config and the seeds recorded in the trace header, refits every posterior
// from the recorded history, and checks each recorded action, payoff and
// reasoning chain.
VerifyReport VerifyTrace(const ExperimentConfig& config,
                         const std::string& trace_path);

}  // namespace r2b2

#endif  // R2B2_EXPERIMENT_H_
