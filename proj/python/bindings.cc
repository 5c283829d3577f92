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

#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "r2b2/acquisition.h"
#include "r2b2/errors.h"
#include "r2b2/experiment.h"
#include "r2b2/game.h"
#include "r2b2/gp.h"
#include "r2b2/level0.h"
#include "r2b2/prior.h"
#include "r2b2/reasoning.h"

namespace py = pybind11;

namespace r2b2 {
namespace {

std::span<const double> AsSpan(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

py::dict TraceToDict(const GameTrace& trace) {
  py::list actions, noisy, truth;
  for (const auto& it : trace.iterations) {
    actions.append(it.actions);
    noisy.append(it.noisy);
    truth.append(it.truth);
  }
  py::dict d;
  d["seed"] = trace.seed;
  d["actions"] = actions;
  d["noisy"] = noisy;
  d["truth"] = truth;
  return d;
}

}  // namespace
}  // namespace r2b2

PYBIND11_MODULE(_core, m) {
  using namespace r2b2;
  m.doc() = "Level-k GP-UCB agents for repeated games";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<BudgetError>(m, "BudgetError", PyExc_MemoryError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  py::enum_<KernelFamily>(m, "KernelFamily")
      .value("SE", KernelFamily::kSquaredExponential)
      .value("MATERN32", KernelFamily::kMatern32)
      .value("MATERN52", KernelFamily::kMatern52);

  py::class_<KernelSpec>(m, "KernelSpec")
      .def(py::init([](KernelFamily f, double ls, double sv) {
             KernelSpec k{f, ls, sv};
             k.Validate();
             return k;
           }),
           py::arg("family") = KernelFamily::kSquaredExponential,
           py::arg("length_scale") = 0.1, py::arg("signal_variance") = 1.0)
      .def_readonly("family", &KernelSpec::family)
      .def_readonly("length_scale", &KernelSpec::length_scale)
      .def_readonly("signal_variance", &KernelSpec::signal_variance)
      .def("__call__", [](const KernelSpec& k, const Eigen::VectorXd& a,
                          const Eigen::VectorXd& b) {
        return KernelEval(k, AsSpan(a), AsSpan(b));
      });

  py::class_<ActionSpace>(m, "ActionSpace")
      .def_static("grid", &ActionSpace::Grid, py::arg("points_per_axis"))
      .def_property_readonly("dim", &ActionSpace::dim)
      .def("__len__", &ActionSpace::size);

  py::class_<JointSpace>(m, "JointSpace")
      .def(py::init<std::vector<ActionSpace>>())
      .def_static("grid",
                  [](const std::vector<std::vector<int>>& grids) {
                    std::vector<ActionSpace> spaces;
                    for (const auto& g : grids) spaces.push_back(ActionSpace::Grid(g));
                    return JointSpace(std::move(spaces));
                  },
                  py::arg("grids"))
      .def_property_readonly("num_agents", &JointSpace::num_agents)
      .def_property_readonly("dim", &JointSpace::dim)
      .def("__len__", &JointSpace::size)
      .def("agent_size", [](const JointSpace& j, std::size_t i) { return j.agent(i).size(); })
      .def("flatten", [](const JointSpace& j, const std::vector<ActionIndex>& a) {
        return j.Flatten(a);
      })
      .def("unflatten", &JointSpace::Unflatten)
      .def("point", [](const JointSpace& j, const std::vector<ActionIndex>& a) {
        return j.Point(a);
      })
      .def("all_points", &JointSpace::AllPoints);

  py::class_<Prediction>(m, "Prediction")
      .def_readonly("mean", &Prediction::mean)
      .def_readonly("variance", &Prediction::variance);

  py::class_<GpPosterior>(m, "GpPosterior")
      .def(py::init<KernelSpec, double, int>(), py::arg("kernel"),
           py::arg("noise_variance"), py::arg("input_dim"))
      .def_static("from_history", &GpPosterior::FromHistory, py::arg("kernel"),
                  py::arg("noise_variance"), py::arg("inputs"), py::arg("outputs"))
      .def("condition",
           [](const GpPosterior& gp, const Eigen::VectorXd& z, double y) {
             return gp.Condition(AsSpan(z), y);
           })
      .def("predict",
           [](const GpPosterior& gp, const Eigen::VectorXd& z) { return gp.Predict(AsSpan(z)); })
      .def("predict_batch",
           [](const GpPosterior& gp, const Eigen::MatrixXd& points) {
             Eigen::VectorXd mean, var;
             gp.PredictBatch(points, &mean, &var);
             return py::make_tuple(mean, var);
           })
      .def_property_readonly("num_observations", &GpPosterior::num_observations);

  m.def("sample_prior",
        [](const KernelSpec& k, const JointSpace& j, std::uint64_t seed) {
          return SamplePrior(k, j, seed);
        },
        py::arg("kernel"), py::arg("space"), py::arg("seed"));

  m.def("beta",
        [](std::size_t domain_size, double delta, int t, bool tight) {
          return Beta(BetaSchedule{domain_size, delta, tight}, t);
        },
        py::arg("domain_size"), py::arg("delta"), py::arg("t"), py::arg("tight") = false);
  m.def("ucb",
        [](const GpPosterior& gp, const Eigen::VectorXd& z, double beta) {
          return Ucb(gp, AsSpan(z), beta);
        },
        py::arg("gp"), py::arg("z"), py::arg("beta"));
  m.def("ucb_grid", &UcbGrid, py::arg("gp"), py::arg("space"), py::arg("beta"));

  py::class_<MixedStrategy>(m, "MixedStrategy")
      .def(py::init<std::vector<double>>())
      .def_static("uniform", &MixedStrategy::Uniform)
      .def_static("point_mass", &MixedStrategy::PointMass)
      .def_property_readonly("probs", &MixedStrategy::probs)
      .def("__len__", &MixedStrategy::size);

  py::class_<GpMwState>(m, "GpMwState")
      .def(py::init<std::size_t, double>(), py::arg("domain_size"), py::arg("learning_rate"))
      .def("apply_losses",
           [](const GpMwState& s, const std::vector<double>& losses) {
             return s.ApplyLosses(losses);
           })
      .def("strategy", &GpMwState::Strategy);
  m.def("gpmw_learning_rate", &GpMwLearningRate);

  m.def("level1_select",
        [](const GpPosterior& gp, const JointSpace& j, std::size_t self,
           const MixedStrategy& opponent, double beta) {
          return Level1Select(gp, j, self, opponent, beta, ExpectationSpec{}, nullptr).action;
        },
        py::arg("gp"), py::arg("space"), py::arg("agent"), py::arg("opponent"),
        py::arg("beta"));

  py::class_<PayoffTable>(m, "PayoffTable")
      .def_property_readonly("space", &PayoffTable::joint)
      .def_property_readonly("num_agents", &PayoffTable::num_agents)
      .def("values", &PayoffTable::values)
      .def("value", [](const PayoffTable& t, std::size_t agent,
                       const std::vector<ActionIndex>& a) { return t.value(agent, a); });

  m.def("build_game",
        [](const std::string& type, const KernelSpec& k, const JointSpace& j,
           std::uint64_t seed) { return BuildGame(ParseGameType(type), k, j, seed); },
        py::arg("game_type"), py::arg("kernel"), py::arg("space"), py::arg("seed"));

  m.def("run_game",
        [](const PayoffTable& game, const std::vector<int>& levels, int horizon,
           std::uint64_t seed, const KernelSpec& kernel) {
          std::vector<AgentSpec> agents(levels.size());
          for (std::size_t i = 0; i < levels.size(); ++i) agents[i].level = levels[i];
          GameOptions opt;
          opt.horizon = horizon;
          opt.seed = seed;
          opt.kernel = kernel;
          const GameTrace trace = RunRepeatedGame(game, agents, opt);
          py::dict d = TraceToDict(trace);
          py::list mean, ext;
          for (std::size_t i = 0; i < levels.size(); ++i) {
            mean.append(MeanRegretCurve(trace, game, i));
            ext.append(ExternalRegretCurve(trace, game, i));
          }
          d["mean_regret"] = mean;
          d["external_regret"] = ext;
          return d;
        },
        py::arg("game"), py::arg("levels"), py::arg("horizon"), py::arg("seed"),
        py::arg("kernel") = KernelSpec{});

  m.def("config_digest",
        [](const std::string& config_json) {
          return ExperimentConfig::FromJson(nlohmann::ordered_json::parse(config_json)).Digest();
        });
  m.def("default_config", [] { return ExperimentConfig{}.ToJson().dump(); });
  m.def("run_experiment",
        [](const std::string& config_json, int workers, const std::string& format) {
          const ExperimentConfig c =
              ExperimentConfig::FromJson(nlohmann::ordered_json::parse(config_json));
          ExperimentResult r;
          {
            py::gil_scoped_release release;
            r = RunExperiment(c, workers);
          }
          return FormatResults(r.aggregate, ParseOutputFormat(format));
        },
        py::arg("config_json"), py::arg("workers") = 1, py::arg("format") = "csv",
        "Runs every replication and returns the aggregated results as text.");
}
