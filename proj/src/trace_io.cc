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

#include "r2b2/trace_io.h"

#include <istream>
#include <ostream>
#include <string>

#include "r2b2/errors.h"

namespace r2b2 {

using json = nlohmann::ordered_json;

namespace {

constexpr const char* kFormatTag = "r2b2-trace";

json InitToJson(const InitRecord& rec) {
  json j;
  j["actions"] = rec.actions;
  j["noisy"] = rec.noisy;
  j["true"] = rec.truth;
  return j;
}

InitRecord InitFromJson(const json& j) {
  InitRecord rec;
  rec.actions = j.at("actions").get<std::vector<ActionIndex>>();
  rec.noisy = j.at("noisy").get<std::vector<double>>();
  rec.truth = j.at("true").get<std::vector<double>>();
  return rec;
}

}  // namespace

json IterationToJson(const IterationRecord& rec) {
  json j;
  j["t"] = rec.t;
  j["actions"] = rec.actions;
  j["noisy"] = rec.noisy;
  j["true"] = rec.truth;
  json reasoning = json::array();
  for (const auto& chain : rec.reasoning) {
    json steps = json::array();
    for (const auto& s : chain) steps.push_back({s.level, s.agent, s.action});
    reasoning.push_back(std::move(steps));
  }
  j["reasoning"] = std::move(reasoning);
  j["level0_cov_trace"] = rec.level0_cov_trace;
  return j;
}

IterationRecord IterationFromJson(const json& j) {
  IterationRecord rec;
  rec.t = j.at("t").get<int>();
  rec.actions = j.at("actions").get<std::vector<ActionIndex>>();
  rec.noisy = j.at("noisy").get<std::vector<double>>();
  rec.truth = j.at("true").get<std::vector<double>>();
  for (const auto& chain : j.at("reasoning")) {
    ReasoningTrace steps;
    for (const auto& s : chain) {
      steps.push_back(ReasoningStep{s.at(0).get<int>(),
                                    s.at(1).get<std::size_t>(),
                                    s.at(2).get<ActionIndex>()});
    }
    rec.reasoning.push_back(std::move(steps));
  }
  rec.level0_cov_trace = j.at("level0_cov_trace").get<std::vector<double>>();
  return rec;
}

void WriteTrace(std::ostream& out, const GameTrace& trace, const json& meta) {
  json header;
  header["format"] = kFormatTag;
  header["version"] = kTraceFormatVersion;
  for (const auto& [key, value] : meta.items()) header[key] = value;
  header["seed"] = trace.seed;
  json init = json::array();
  for (const auto& rec : trace.init) init.push_back(InitToJson(rec));
  header["init"] = std::move(init);
  out << header.dump() << '\n';
  for (const auto& rec : trace.iterations) {
    out << IterationToJson(rec).dump() << '\n';
  }
  if (!out) throw IoError("failed writing trace");
}

GameTrace ReadTrace(std::istream& in, json* meta) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("trace is empty");
  GameTrace trace;
  try {
    json header = json::parse(line);
    if (header.value("format", "") != kFormatTag) {
      throw IoError("not a trace file (missing format tag)");
    }
    if (header.at("version").get<int>() != kTraceFormatVersion) {
      throw IoError("unsupported trace version " +
                    header.at("version").dump());
    }
    trace.seed = header.at("seed").get<std::uint64_t>();
    for (const auto& rec : header.at("init")) {
      trace.init.push_back(InitFromJson(rec));
    }
    if (meta) {
      *meta = json::object();
      for (const auto& [key, value] : header.items()) {
        if (key != "format" && key != "version" && key != "init") {
          (*meta)[key] = value;
        }
      }
    }
    int line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      trace.iterations.push_back(IterationFromJson(json::parse(line)));
      if (trace.iterations.back().t !=
          static_cast<int>(trace.iterations.size())) {
        throw IoError("trace line " + std::to_string(line_no) +
                      ": iterations out of order");
      }
    }
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed trace: ") + e.what());
  }
  return trace;
}

}  // namespace r2b2
