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

#include "r2b2/experiment.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "r2b2/errors.h"
#include "r2b2/prior.h"
#include "r2b2/rng.h"
#include "r2b2/trace_io.h"

namespace r2b2 {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string MetricName(Metric metric) {
  return metric == Metric::kMeanRegret ? "mean-regret" : "external-regret";
}

Metric ParseMetric(const std::string& name) {
  if (name == "mean-regret" || name == "mean_regret") return Metric::kMeanRegret;
  if (name == "external-regret" || name == "external_regret") {
    return Metric::kExternalRegret;
  }
  throw InputError("unknown metric '" + name +
                   "' (expected mean-regret or external-regret)");
}

std::string OutputFormatName(OutputFormat format) {
  return format == OutputFormat::kCsv ? "csv" : "json";
}

OutputFormat ParseOutputFormat(const std::string& name) {
  if (name == "csv") return OutputFormat::kCsv;
  if (name == "json") return OutputFormat::kJson;
  throw InputError("unknown output format '" + name + "' (expected csv or json)");
}

// --- Config parsing ----------------------------------------------------------

namespace {

[[noreturn]] void FieldError(const std::string& path, const std::string& what) {
  throw ConfigError("config field '" + path + "': " + what);
}

// Reads the members of one JSON object, naming the full field path in every
// error and rejecting keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) FieldError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string Path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const json* Find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return nullptr;
    return &*it;
  }

  template <typename T>
  T Get(const std::string& key, T fallback) {
    const json* v = Find(key);
    if (!v) return fallback;
    return Convert<T>(*v, Path(key));
  }

  template <typename T>
  static T Convert(const json& v, const std::string& path) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) FieldError(path, "expected true or false");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) FieldError(path, "expected an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (v.is_number_integer() && !v.is_number_unsigned() &&
            v.get<std::int64_t>() < 0) {
          FieldError(path, "expected a nonnegative integer");
        }
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) FieldError(path, "expected a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) FieldError(path, "expected a string");
    }
    return v.get<T>();
  }

  void Finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) FieldError(Path(key), "unknown field");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename Parse>
auto Wrap(const std::string& path, Parse&& parse) {
  try {
    return parse();
  } catch (const InputError& e) {
    FieldError(path, e.what());
  }
}

json KernelToJson(const KernelSpec& k) {
  json j;
  j["family"] = KernelFamilyName(k.family);
  j["length_scale"] = k.length_scale;
  j["signal_variance"] = k.signal_variance;
  return j;
}

KernelSpec KernelFromJson(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  KernelSpec k;
  const std::string family = r.Get<std::string>("family", "se");
  k.family = Wrap(r.Path("family"), [&] { return ParseKernelFamily(family); });
  k.length_scale = r.Get<double>("length_scale", k.length_scale);
  k.signal_variance = r.Get<double>("signal_variance", k.signal_variance);
  r.Finish();
  Wrap(path, [&] {
    k.Validate();
    return 0;
  });
  return k;
}

json Level0ToJson(const Level0Config& c) {
  json j;
  j["type"] = Level0KindName(c.kind);
  j["learning_rate"] = c.learning_rate ? json(*c.learning_rate) : json(nullptr);
  j["anytime"] = c.anytime;
  j["num_features"] = c.num_features;
  j["clamp_payoff"] = c.clamp_payoff;
  return j;
}

Level0Config Level0FromJson(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  Level0Config c;
  const std::string type = r.Get<std::string>("type", "gp_mw");
  c.kind = Wrap(r.Path("type"), [&] { return ParseLevel0Kind(type); });
  if (const json* v = r.Find("learning_rate")) {
    c.learning_rate = ObjectReader::Convert<double>(*v, r.Path("learning_rate"));
    if (!(*c.learning_rate > 0.0)) {
      FieldError(r.Path("learning_rate"), "must be positive");
    }
  }
  c.anytime = r.Get<bool>("anytime", c.anytime);
  c.num_features = r.Get<int>("num_features", c.num_features);
  if (c.num_features < 1) FieldError(r.Path("num_features"), "must be >= 1");
  c.clamp_payoff = r.Get<bool>("clamp_payoff", c.clamp_payoff);
  r.Finish();
  return c;
}

std::string ExpectationModeName(ExpectationMode mode) {
  return mode == ExpectationMode::kExact ? "exact" : "monte_carlo";
}

json AgentToJson(const AgentSpec& a) {
  json j;
  j["level"] = a.level;
  j["lite"] = a.lite;
  j["level0"] = Level0ToJson(a.level0);
  j["noise_variance"] = a.noise_variance;
  j["kernel"] = a.kernel ? KernelToJson(*a.kernel) : json(nullptr);
  json believed = json::array();
  for (const auto& b : a.believed_level0) {
    believed.push_back(b ? Level0ToJson(*b) : json(nullptr));
  }
  j["believed_level0"] = std::move(believed);
  j["believed_levels"] = a.believed_levels;
  json e;
  e["mode"] = ExpectationModeName(a.expectation.mode);
  e["samples"] = a.expectation.samples;
  e["exact_budget"] = a.expectation.exact_budget;
  j["expectation"] = std::move(e);
  return j;
}

AgentSpec AgentFromJson(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  AgentSpec a;
  a.level = r.Get<int>("level", a.level);
  a.lite = r.Get<bool>("lite", a.lite);
  if (const json* v = r.Find("level0")) a.level0 = Level0FromJson(*v, r.Path("level0"));
  a.noise_variance = r.Get<double>("noise_variance", a.noise_variance);
  if (const json* v = r.Find("kernel")) a.kernel = KernelFromJson(*v, r.Path("kernel"));
  if (const json* v = r.Find("believed_level0")) {
    if (!v->is_array()) FieldError(r.Path("believed_level0"), "expected an array");
    for (std::size_t i = 0; i < v->size(); ++i) {
      const json& e = (*v)[i];
      const std::string p = r.Path("believed_level0") + "[" + std::to_string(i) + "]";
      a.believed_level0.push_back(e.is_null() ? std::nullopt
                                              : std::optional(Level0FromJson(e, p)));
    }
  }
  if (const json* v = r.Find("believed_levels")) {
    if (!v->is_array()) FieldError(r.Path("believed_levels"), "expected an array");
    for (std::size_t i = 0; i < v->size(); ++i) {
      a.believed_levels.push_back(ObjectReader::Convert<int>(
          (*v)[i], r.Path("believed_levels") + "[" + std::to_string(i) + "]"));
    }
  }
  if (const json* v = r.Find("expectation")) {
    ObjectReader e(*v, r.Path("expectation"));
    const std::string mode = e.Get<std::string>("mode", "exact");
    if (mode == "exact") {
      a.expectation.mode = ExpectationMode::kExact;
    } else if (mode == "monte_carlo") {
      a.expectation.mode = ExpectationMode::kMonteCarlo;
    } else {
      FieldError(e.Path("mode"), "expected exact or monte_carlo, got '" + mode + "'");
    }
    a.expectation.samples = e.Get<int>("samples", a.expectation.samples);
    a.expectation.exact_budget =
        e.Get<std::size_t>("exact_budget", a.expectation.exact_budget);
    e.Finish();
  }
  r.Finish();
  return a;
}

std::string Hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << contents;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

json ParseJsonText(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(what + " is not valid JSON: " + e.what());
  }
}

}  // namespace

void ExperimentConfig::Validate() const {
  if (grids.size() < 2) FieldError("game.grids", "need at least two agents");
  for (std::size_t i = 0; i < grids.size(); ++i) {
    const std::string p = "game.grids[" + std::to_string(i) + "]";
    if (grids[i].empty()) FieldError(p, "need at least one axis");
    for (int n : grids[i]) {
      if (n < 1) FieldError(p, "every axis needs at least one point");
    }
  }
  if (agents.size() != grids.size()) {
    FieldError("agents", "expected " + std::to_string(grids.size()) +
                             " entries (one per grid), got " +
                             std::to_string(agents.size()));
  }
  Wrap("kernel", [&] {
    kernel.Validate();
    return 0;
  });
  if (horizon < 1) FieldError("horizon", "must be >= 1");
  if (num_function_samples < 1) FieldError("num_function_samples", "must be >= 1");
  if (num_inits < 1) FieldError("num_inits", "must be >= 1");
  if (init_size < 0) FieldError("init_size", "must be >= 0");
  if (!(delta > 0.0 && delta < 1.0)) {
    FieldError("delta", "must lie in (0, 1), got " + std::to_string(delta));
  }
  if (!(beta_scale >= 0.0) || !std::isfinite(beta_scale)) {
    FieldError("beta_scale", "must be finite and >= 0");
  }
  if (metric_agent < 0 || static_cast<std::size_t>(metric_agent) >= agents.size()) {
    FieldError("metric_agent", "must index an agent");
  }
  const std::size_t m = agents.size();
  std::size_t joint_size = 1;
  bool product_grid = true;
  for (const auto& g : grids) {
    for (int n : g) joint_size *= static_cast<std::size_t>(n);
  }
  if (kernel.family != KernelFamily::kSquaredExponential) product_grid = false;
  if (!product_grid && joint_size > kDensePriorCap) {
    FieldError("game.grids",
               "a joint space of " + std::to_string(joint_size) +
                   " points exceeds the dense prior cap of " +
                   std::to_string(kDensePriorCap) +
                   " for non-SE kernels");
  }
  for (std::size_t i = 0; i < m; ++i) {
    const AgentSpec& a = agents[i];
    const std::string p = "agents[" + std::to_string(i) + "]";
    if (a.level < 0) FieldError(p + ".level", "must be >= 0");
    if (m > 2 && a.level > 2) {
      FieldError(p + ".level", "with more than two agents only levels 0-2 are supported");
    }
    if (a.lite && a.level != 1) FieldError(p + ".lite", "requires level 1");
    if (!(a.noise_variance >= 0.0) || !std::isfinite(a.noise_variance)) {
      FieldError(p + ".noise_variance", "must be finite and >= 0");
    }
    if (!a.believed_level0.empty() && a.believed_level0.size() != m) {
      FieldError(p + ".believed_level0", "needs one entry per agent");
    }
    if (!a.believed_levels.empty()) {
      if (a.believed_levels.size() != m) {
        FieldError(p + ".believed_levels", "needs one entry per agent");
      }
      for (std::size_t j = 0; j < m; ++j) {
        if (j != i && (a.believed_levels[j] < 0 || a.believed_levels[j] > 1)) {
          FieldError(p + ".believed_levels",
                     "entries must be 0 or 1 (deeper opponents are not supported)");
        }
      }
    }
    if (a.expectation.samples < 0) FieldError(p + ".expectation.samples", "must be >= 0");
    if (a.level0.kind == Level0Kind::kExp3 &&
        a.kernel.value_or(kernel).family != KernelFamily::kSquaredExponential) {
      FieldError(p + ".level0.type", "exp3 random features need the se kernel");
    }
  }
}

JointSpace ExperimentConfig::MakeJointSpace() const {
  std::vector<ActionSpace> spaces;
  for (const auto& g : grids) spaces.push_back(ActionSpace::Grid(g));
  return JointSpace(std::move(spaces));
}

GameOptions ExperimentConfig::MakeGameOptions(std::uint64_t run_seed) const {
  GameOptions o;
  o.horizon = horizon;
  o.delta = delta;
  o.tight_beta = tight_beta;
  o.beta_scale = beta_scale;
  o.init_size = init_size;
  o.seed = run_seed;
  o.kernel = kernel;
  return o;
}

json ExperimentConfig::ToJson() const {
  json j;
  j["schema_version"] = kConfigSchemaVersion;
  json game;
  game["type"] = GameTypeName(game_type);
  game["grids"] = grids;
  j["game"] = std::move(game);
  j["kernel"] = KernelToJson(kernel);
  json a = json::array();
  for (const auto& spec : agents) a.push_back(AgentToJson(spec));
  j["agents"] = std::move(a);
  j["horizon"] = horizon;
  j["num_function_samples"] = num_function_samples;
  j["num_inits"] = num_inits;
  j["init_size"] = init_size;
  j["delta"] = delta;
  j["tight_beta"] = tight_beta;
  j["beta_scale"] = beta_scale;
  j["metric"] = MetricName(metric);
  j["metric_agent"] = metric_agent;
  j["master_seed"] = master_seed;
  json out;
  out["results"] = results_path;
  out["format"] = OutputFormatName(format);
  out["trace_dir"] = trace_dir;
  j["output"] = std::move(out);
  return j;
}

ExperimentConfig ExperimentConfig::FromJson(const json& j) {
  ObjectReader r(j, "");
  ExperimentConfig c;
  const int version = r.Get<int>("schema_version", -1);
  if (version != kConfigSchemaVersion) {
    FieldError("schema_version", "expected " + std::to_string(kConfigSchemaVersion) +
                                     ", got " + std::to_string(version));
  }
  if (const json* g = r.Find("game")) {
    ObjectReader gr(*g, "game");
    const std::string type = gr.Get<std::string>("type", "general_sum");
    c.game_type = Wrap("game.type", [&] { return ParseGameType(type); });
    if (const json* grids = gr.Find("grids")) {
      if (!grids->is_array()) FieldError("game.grids", "expected an array of arrays");
      c.grids.clear();
      for (std::size_t i = 0; i < grids->size(); ++i) {
        const std::string p = "game.grids[" + std::to_string(i) + "]";
        const json& axes = (*grids)[i];
        if (!axes.is_array()) FieldError(p, "expected an array of point counts");
        std::vector<int> g;
        for (const auto& n : axes) g.push_back(ObjectReader::Convert<int>(n, p));
        c.grids.push_back(std::move(g));
      }
    }
    gr.Finish();
  }
  if (const json* k = r.Find("kernel")) c.kernel = KernelFromJson(*k, "kernel");
  if (const json* a = r.Find("agents")) {
    if (!a->is_array()) FieldError("agents", "expected an array");
    c.agents.clear();
    for (std::size_t i = 0; i < a->size(); ++i) {
      c.agents.push_back(AgentFromJson((*a)[i], "agents[" + std::to_string(i) + "]"));
    }
  }
  c.horizon = r.Get<int>("horizon", c.horizon);
  c.num_function_samples = r.Get<int>("num_function_samples", c.num_function_samples);
  c.num_inits = r.Get<int>("num_inits", c.num_inits);
  c.init_size = r.Get<int>("init_size", c.init_size);
  c.delta = r.Get<double>("delta", c.delta);
  c.tight_beta = r.Get<bool>("tight_beta", c.tight_beta);
  c.beta_scale = r.Get<double>("beta_scale", c.beta_scale);
  const std::string metric = r.Get<std::string>("metric", MetricName(c.metric));
  c.metric = Wrap("metric", [&] { return ParseMetric(metric); });
  c.metric_agent = r.Get<int>("metric_agent", c.metric_agent);
  c.master_seed = r.Get<std::uint64_t>("master_seed", c.master_seed);
  if (const json* o = r.Find("output")) {
    ObjectReader orr(*o, "output");
    c.results_path = orr.Get<std::string>("results", c.results_path);
    const std::string format = orr.Get<std::string>("format", "csv");
    c.format = Wrap("output.format", [&] { return ParseOutputFormat(format); });
    c.trace_dir = orr.Get<std::string>("trace_dir", c.trace_dir);
    orr.Finish();
  }
  r.Finish();
  c.Validate();
  return c;
}

std::string ExperimentConfig::Digest() const {
  json j = ToJson();
  j.erase("output");
  return Hex64(HashTag(j.dump()));
}

ExperimentConfig LoadConfig(const std::string& path) {
  return ExperimentConfig::FromJson(
      ParseJsonText(ReadFile(path), "config '" + path + "'"));
}

void SaveConfig(const ExperimentConfig& config, const std::string& path) {
  WriteFile(path, config.ToJson().dump(2) + "\n");
}

// --- Running -----------------------------------------------------------------

std::uint64_t GameSeed(std::uint64_t master_seed, int draw) {
  return DeriveSeed(master_seed, "game", static_cast<std::uint64_t>(draw));
}

ReplicationPlan PlanReplication(const ExperimentConfig& config,
                                std::size_t index) {
  ReplicationPlan p;
  p.index = index;
  p.draw = static_cast<int>(index / static_cast<std::size_t>(config.num_inits));
  p.init = static_cast<int>(index % static_cast<std::size_t>(config.num_inits));
  p.game_seed = GameSeed(config.master_seed, p.draw);
  p.run_seed = DeriveSeed(p.game_seed, "run", static_cast<std::uint64_t>(p.init));
  return p;
}

bool ExperimentResult::TooManyFailures() const {
  return failed * 10 > replications.size();
}

std::vector<double> MetricCurve(Metric metric, const GameTrace& trace,
                                const PayoffTable& game, std::size_t agent) {
  if (metric == Metric::kMeanRegret) return MeanRegretCurve(trace, game, agent);
  std::vector<double> curve = ExternalRegretCurve(trace, game, agent);
  for (std::size_t t = 0; t < curve.size(); ++t) {
    curve[t] /= static_cast<double>(t + 1);
  }
  return curve;
}

AggregateResult Aggregate(const std::vector<std::vector<double>>& curves) {
  AggregateResult out;
  out.replications = curves.size();
  if (curves.empty()) return out;
  const std::size_t len = curves.front().size();
  for (const auto& c : curves) {
    if (c.size() != len) throw InputError("metric curves differ in length");
  }
  const double n = static_cast<double>(curves.size());
  out.mean.assign(len, 0.0);
  for (const auto& c : curves) {
    for (std::size_t t = 0; t < len; ++t) out.mean[t] += c[t];
  }
  for (double& v : out.mean) v /= n;
  if (curves.size() < 2) return out;
  out.std_error.assign(len, 0.0);
  for (const auto& c : curves) {
    for (std::size_t t = 0; t < len; ++t) {
      const double d = c[t] - out.mean[t];
      out.std_error[t] += d * d;
    }
  }
  for (double& v : out.std_error) v = std::sqrt(v / (n - 1.0)) / std::sqrt(n);
  return out;
}

namespace {

// Calls fn(i) for i in [0, n) on up to `workers` threads. A non-numerical
// exception aborts the run; the one from the lowest index is rethrown.
template <typename Fn>
void ParallelFor(std::size_t n, int workers, Fn&& fn,
                 const std::function<void()>& on_done = {}) {
  std::size_t threads = workers > 0 ? static_cast<std::size_t>(workers)
                                    : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(n, 1));
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::mutex mu;
  std::map<std::size_t, std::exception_ptr> errors;
  auto body = [&] {
    for (;;) {
      if (abort.load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        errors.emplace(i, std::current_exception());
        abort.store(true);
        return;
      }
      if (on_done) {
        std::lock_guard<std::mutex> lock(mu);
        on_done();
      }
    }
  };
  if (threads <= 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(body);
    for (auto& t : pool) t.join();
  }
  if (!errors.empty()) std::rethrow_exception(errors.begin()->second);
}

AggregateResult AggregateOutcomes(const std::vector<ReplicationOutcome>& outcomes) {
  std::vector<std::vector<double>> curves;
  for (const auto& o : outcomes) {
    if (o.ok) curves.push_back(o.metric);
  }
  return Aggregate(curves);
}

}  // namespace

ExperimentResult RunExperiment(const ExperimentConfig& config, int workers,
                               const ProgressCallback& progress) {
  config.Validate();
  const JointSpace joint = config.MakeJointSpace();
  const std::size_t draws = static_cast<std::size_t>(config.num_function_samples);
  const std::size_t total = draws * static_cast<std::size_t>(config.num_inits);

  ExperimentResult result;
  result.games.resize(draws);
  result.replications.resize(total);
  std::vector<std::string> game_errors(draws);

  ParallelFor(draws, workers, [&](std::size_t d) {
    try {
      result.games[d] = std::make_shared<const PayoffTable>(
          BuildGame(config.game_type, config.kernel, joint,
                    GameSeed(config.master_seed, static_cast<int>(d))));
    } catch (const NumericalError& e) {
      game_errors[d] = e.what();
    }
  });

  std::size_t done = 0;
  ParallelFor(
      total, workers,
      [&](std::size_t r) {
        ReplicationOutcome& out = result.replications[r];
        out.plan = PlanReplication(config, r);
        const auto& game = result.games[static_cast<std::size_t>(out.plan.draw)];
        if (!game) {
          out.error = "payoff draw failed: " +
                      game_errors[static_cast<std::size_t>(out.plan.draw)];
          return;
        }
        try {
          out.trace = RunRepeatedGame(*game, config.agents,
                                      config.MakeGameOptions(out.plan.run_seed));
          out.metric = MetricCurve(config.metric, out.trace, *game,
                                   static_cast<std::size_t>(config.metric_agent));
          out.ok = true;
        } catch (const NumericalError& e) {
          out.error = e.what();
          out.trace = GameTrace{};
        }
      },
      [&] {
        ++done;
        if (progress) progress(done, total);
      });

  for (const auto& o : result.replications) {
    if (!o.ok) ++result.failed;
  }
  result.aggregate = AggregateOutcomes(result.replications);
  return result;
}

// --- Output ------------------------------------------------------------------

namespace {

std::string Num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string FormatResults(const AggregateResult& result, OutputFormat format) {
  const bool with_se = !result.std_error.empty();
  std::string out;
  if (format == OutputFormat::kCsv) {
    // An empty stderr field means fewer than two replications.
    out = "iteration,metric_mean,metric_stderr,n_replications\n";
    for (std::size_t t = 0; t < result.mean.size(); ++t) {
      out += std::to_string(t + 1) + "," + Num(result.mean[t]) + ",";
      if (with_se) out += Num(result.std_error[t]);
      out += "," + std::to_string(result.replications) + "\n";
    }
    return out;
  }
  out = "[";
  for (std::size_t t = 0; t < result.mean.size(); ++t) {
    out += t ? ",\n " : "\n ";
    out += "{\"iteration\":" + std::to_string(t + 1) +
           ",\"metric_mean\":" + Num(result.mean[t]);
    out += ",\"metric_stderr\":" + (with_se ? Num(result.std_error[t]) : "null");
    out += ",\"n_replications\":" + std::to_string(result.replications) + "}";
  }
  out += "\n]\n";
  return out;
}

// --- Trace directories -------------------------------------------------------

namespace {

constexpr const char* kManifestTag = "r2b2-trace-dir";

std::string TraceFileName(std::size_t index) {
  return "trace_" + std::to_string(index) + ".jsonl";
}

std::string GameFileName(std::size_t draw) {
  return "game_" + std::to_string(draw) + ".json";
}

json TraceMeta(const ExperimentConfig& config, const ReplicationPlan& plan) {
  json meta;
  meta["replication"] = plan.index;
  meta["draw"] = plan.draw;
  meta["init_index"] = plan.init;
  meta["game_seed"] = plan.game_seed;
  meta["run_seed"] = plan.run_seed;
  meta["config_digest"] = config.Digest();
  json c1 = json::array();
  for (const auto& a : config.agents) {
    c1.push_back(a.noise_variance > 0.0 ? json(RegretConstantC1(a.noise_variance))
                                        : json(nullptr));
  }
  meta["c1"] = std::move(c1);
  return meta;
}

PayoffTable ReadGameFile(const ExperimentConfig& config, const fs::path& path) {
  const json j = ParseJsonText(ReadFile(path.string()), path.string());
  std::vector<Eigen::VectorXd> values;
  try {
    for (const auto& row : j.at("values")) {
      const auto v = row.get<std::vector<double>>();
      values.emplace_back(Eigen::Map<const Eigen::VectorXd>(
          v.data(), static_cast<Eigen::Index>(v.size())));
    }
  } catch (const json::exception& e) {
    throw IoError("malformed game file '" + path.string() + "': " + e.what());
  }
  return PayoffTable(config.MakeJointSpace(), std::move(values));
}

}  // namespace

void WriteTraceDir(const ExperimentConfig& config,
                   const ExperimentResult& result, const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create trace directory '" + dir + "': " + ec.message());
  const fs::path root(dir);

  for (std::size_t d = 0; d < result.games.size(); ++d) {
    if (!result.games[d]) continue;
    const PayoffTable& game = *result.games[d];
    json g;
    g["draw"] = d;
    g["game_seed"] = GameSeed(config.master_seed, static_cast<int>(d));
    g["game_type"] = GameTypeName(config.game_type);
    json values = json::array();
    for (std::size_t i = 0; i < game.num_agents(); ++i) {
      const auto& v = game.values(i);
      values.push_back(std::vector<double>(v.data(), v.data() + v.size()));
    }
    g["values"] = std::move(values);
    WriteFile(root / GameFileName(d), g.dump() + "\n");
  }

  json reps = json::array();
  for (const auto& o : result.replications) {
    json r;
    r["index"] = o.plan.index;
    r["draw"] = o.plan.draw;
    r["init"] = o.plan.init;
    r["game_seed"] = o.plan.game_seed;
    r["run_seed"] = o.plan.run_seed;
    r["ok"] = o.ok;
    if (o.ok) {
      r["file"] = TraceFileName(o.plan.index);
      std::ostringstream ss;
      WriteTrace(ss, o.trace, TraceMeta(config, o.plan));
      WriteFile(root / TraceFileName(o.plan.index), ss.str());
    } else {
      r["error"] = o.error;
    }
    reps.push_back(std::move(r));
  }

  json manifest;
  manifest["format"] = kManifestTag;
  manifest["version"] = kTraceFormatVersion;
  manifest["config_digest"] = config.Digest();
  manifest["config"] = config.ToJson();
  manifest["failed"] = result.failed;
  manifest["replications"] = std::move(reps);
  WriteFile(root / "manifest.json", manifest.dump(2) + "\n");
}

TraceDirAggregate AggregateTraceDir(const std::string& dir,
                                    std::optional<Metric> metric) {
  const fs::path root(dir);
  const json manifest =
      ParseJsonText(ReadFile((root / "manifest.json").string()), "manifest");
  if (manifest.value("format", "") != kManifestTag) {
    throw IoError("'" + dir + "' is not a trace directory");
  }
  TraceDirAggregate out;
  out.config = ExperimentConfig::FromJson(manifest.at("config"));
  if (metric) out.config.metric = *metric;

  std::map<int, std::shared_ptr<const PayoffTable>> games;
  std::vector<std::vector<double>> curves;
  for (const auto& r : manifest.at("replications")) {
    ++out.total;
    if (!r.at("ok").get<bool>()) {
      ++out.failed;
      continue;
    }
    const int draw = r.at("draw").get<int>();
    auto& game = games[draw];
    if (!game) {
      game = std::make_shared<const PayoffTable>(
          ReadGameFile(out.config, root / GameFileName(static_cast<std::size_t>(draw))));
    }
    const fs::path trace_path = root / r.at("file").get<std::string>();
    std::ifstream in(trace_path);
    if (!in) throw IoError("cannot open '" + trace_path.string() + "'");
    const GameTrace trace = ReadTrace(in);
    curves.push_back(MetricCurve(out.config.metric, trace, *game,
                                 static_cast<std::size_t>(out.config.metric_agent)));
  }
  out.aggregate = Aggregate(curves);
  return out;
}

// --- Verification ------------------------------------------------------------

namespace {

constexpr std::size_t kMaxMismatches = 20;

void Mismatch(VerifyReport& report, const std::string& what) {
  report.ok = false;
  if (report.mismatches.size() < kMaxMismatches) report.mismatches.push_back(what);
}

std::string StepsText(const ReasoningTrace& steps) {
  std::string s = "[";
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (i) s += ",";
    s += "(" + std::to_string(steps[i].level) + "," +
         std::to_string(steps[i].agent) + "," + std::to_string(steps[i].action) +
         ")";
  }
  return s + "]";
}

}  // namespace

VerifyReport VerifyTrace(const ExperimentConfig& config,
                         const std::string& trace_path) {
  config.Validate();
  std::ifstream in(trace_path);
  if (!in) throw IoError("cannot open '" + trace_path + "'");
  json meta;
  const GameTrace trace = ReadTrace(in, &meta);

  VerifyReport report;
  const std::string digest = meta.value("config_digest", "");
  if (digest != config.Digest()) {
    Mismatch(report, "config digest " + config.Digest() +
                         " does not match the trace's " + digest);
    return report;
  }
  const auto game_seed = meta.at("game_seed").get<std::uint64_t>();
  const auto run_seed = meta.at("run_seed").get<std::uint64_t>();
  if (run_seed != trace.seed) Mismatch(report, "header run_seed disagrees with seed");
  if (static_cast<int>(trace.iterations.size()) != config.horizon) {
    Mismatch(report, "trace has " + std::to_string(trace.iterations.size()) +
                         " iterations, config horizon is " +
                         std::to_string(config.horizon));
  }
  if (static_cast<int>(trace.init.size()) != config.init_size) {
    Mismatch(report, "trace has " + std::to_string(trace.init.size()) +
                         " initial samples, config init_size is " +
                         std::to_string(config.init_size));
  }
  if (!report.ok) return report;

  const PayoffTable game =
      BuildGame(config.game_type, config.kernel, config.MakeJointSpace(), game_seed);
  GameSession session(game, config.agents, config.MakeGameOptions(run_seed),
                      /*rebuild_from_history=*/true);
  const JointSpace& js = game.joint();
  const std::size_t m = js.num_agents();
  const double tol = 1e-12;

  auto check_payoffs = [&](const std::string& where,
                           std::span<const ActionIndex> actions,
                           const std::vector<double>& truth,
                           const std::vector<double>& noisy, int t, int k) {
    if (truth.size() != m || noisy.size() != m) {
      Mismatch(report, where + ": wrong number of payoffs");
      return;
    }
    for (std::size_t i = 0; i < m; ++i) {
      const double f = game.value(i, actions);
      if (std::abs(truth[i] - f) > tol) {
        Mismatch(report, where + ": agent " + std::to_string(i) + " true payoff " +
                             Num(truth[i]) + " != " + Num(f));
      }
      const double y = f + session.Noise(i, t, k);
      if (std::abs(noisy[i] - y) > tol) {
        Mismatch(report, where + ": agent " + std::to_string(i) +
                             " noisy payoff " + Num(noisy[i]) + " != " + Num(y));
      }
    }
  };

  const auto init_actions = InitialActions(js, run_seed, config.init_size);
  for (std::size_t k = 0; k < trace.init.size(); ++k) {
    const InitRecord& rec = trace.init[k];
    const std::string where = "init " + std::to_string(k);
    if (rec.actions != init_actions[k]) {
      Mismatch(report, where + ": initial joint action differs");
      return report;
    }
    check_payoffs(where, rec.actions, rec.truth, rec.noisy, 0, static_cast<int>(k));
    session.Observe(rec.actions, rec.noisy, 0);
  }

  for (const IterationRecord& rec : trace.iterations) {
    const std::string where = "t=" + std::to_string(rec.t);
    if (rec.actions.size() != m) {
      Mismatch(report, where + ": wrong number of actions");
      return report;
    }
    const std::vector<Selection> picks = session.SelectAll(rec.t);
    for (std::size_t i = 0; i < m; ++i) {
      if (picks[i].action != rec.actions[i]) {
        Mismatch(report, where + ": agent " + std::to_string(i) + " recorded " +
                             std::to_string(rec.actions[i]) + ", replay chose " +
                             std::to_string(picks[i].action));
      }
      if (rec.reasoning.size() == m && picks[i].trace != rec.reasoning[i]) {
        Mismatch(report, where + ": agent " + std::to_string(i) +
                             " reasoning " + StepsText(rec.reasoning[i]) +
                             " != replay " + StepsText(picks[i].trace));
      }
      if (rec.level0_cov_trace.size() == m) {
        const double omega = CovarianceTrace(session.Level0(i), js.agent(i));
        if (std::abs(omega - rec.level0_cov_trace[i]) > 1e-9) {
          Mismatch(report, where + ": agent " + std::to_string(i) +
                               " level-0 covariance trace differs");
        }
      }
    }
    check_payoffs(where, rec.actions, rec.truth, rec.noisy, rec.t, 0);
    // Continue from the recorded history so later checks stay meaningful.
    session.Observe(rec.actions, rec.noisy, rec.t);
    ++report.iterations_checked;
  }
  return report;
}

}  // namespace r2b2
