/*
 * Copyright 2026 The iltm Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include "iltm/commands.hpp"
#include "iltm/dedupe.hpp"
#include "iltm/gradcheck.hpp"
#include "iltm/hpo.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <numeric>
#include <sstream>

namespace py = pybind11;
using namespace iltm;

namespace {

RunConfig config_with(const std::string& command, const std::map<std::string, std::string>& settings) {
  RunConfig rc = make_run_config(command);
  for (const auto& [k, v] : settings) rc.set(k, v);
  return rc;
}

py::dict as_dict(const std::vector<std::pair<std::string, std::string>>& fields) {
  py::dict d;
  for (const auto& [k, v] : fields) d[py::str(k)] = v;
  return d;
}

// A fitted ensemble plus the schema it was fitted under.
struct PyModel {
  EnsembleModel model;

  static PyModel fit(const std::string& checkpoint, const std::string& task_csv,
                     const std::map<std::string, std::string>& settings) {
    const RunConfig rc = config_with("fit-predict", settings);
    const Checkpoint ck = Checkpoint::load(checkpoint);
    const TabularTask task = load_task(task_csv);
    py::gil_scoped_release release;
    return {fit_task(ck.phi, task, inference_config_from(rc))};
  }

  Mat predict(const Mat& X) const {
    if (X.cols() != model.n_features) {
      throw DataError("predict: expected " + std::to_string(model.n_features) + " columns, got " +
                      std::to_string(X.cols()));
    }
    py::gil_scoped_release release;
    return iltm::predict(model, X);
  }

  py::dict evaluate(const std::string& task_csv, const std::string& split) const {
    const TabularTask task = load_task(task_csv);
    std::vector<int> rows;
    if (split == "all") {
      rows.resize(static_cast<std::size_t>(task.n_rows()));
      std::iota(rows.begin(), rows.end(), 0);
    } else {
      rows = task.split(split);
    }
    const Evaluation ev = evaluate_rows(model, task, rows);
    py::dict d;
    d["metric"] = ev.metric;
    d["value"] = ev.value;
    return d;
  }
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Hypernetwork tabular learner: fitting, prediction and the command workflows.";
  m.attr("__version__") = version_string();

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_IOError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  m.def("command_names", &command_names);
  m.def(
      "command_keys",
      [](const std::string& command) {
        py::dict d;
        for (const auto& k : command_keys(command)) d[py::str(k.name)] = k.default_value;
        return d;
      },
      py::arg("command"), "Declared keys of a command with their defaults.");
  m.def(
      "run_command",
      [](const std::string& command, const std::map<std::string, std::string>& settings) {
        const RunConfig rc = config_with(command, settings);
        std::ostringstream log;
        {
          py::gil_scoped_release release;
          run_command(rc, log);
        }
        return log.str();
      },
      py::arg("command"), py::arg("settings") = std::map<std::string, std::string>{},
      "Runs a command with key=value settings and returns its log.");

  m.def(
      "sample_hyperparams", [](std::uint64_t seed) { return as_dict(sample_hyperparams(seed).fields()); },
      py::arg("seed"));
  m.def("default_hyperparams", [] { return as_dict(HpSample::defaults().fields()); });

  m.def("sanitize_name", [](const std::string& s) { return sanitize_name(s); });
  m.def(
      "clean_keywords", [](const std::string& s) { return clean_keywords(s, DedupeConfig{}.keywords); },
      py::arg("name"));
  m.def("levenshtein_similarity", [](const std::string& a, const std::string& b) {
    return levenshtein_similarity(a, b);
  });
  m.def("token_sort_ratio", [](const std::string& a, const std::string& b) { return token_sort_ratio(a, b); });

  m.def(
      "gradcheck",
      [](int d_main, int hidden, int classes, bool mutate_relu) {
        GradcheckOptions o;
        o.d_main = d_main;
        o.hidden = hidden;
        o.K = classes;
        o.mutate_relu = mutate_relu;
        GradcheckReport rep;
        {
          py::gil_scoped_release release;
          rep = run_gradcheck(o);
        }
        py::dict d;
        d["passed"] = rep.pass();
        d["max_rel_error"] = rep.worst();
        d["seconds"] = rep.seconds;
        return d;
      },
      py::arg("d_main") = 8, py::arg("hidden") = 16, py::arg("classes") = 3, py::arg("mutate_relu") = false);

  py::class_<PyModel>(m, "Model")
      .def_static("fit", &PyModel::fit, py::arg("checkpoint"), py::arg("task_csv"),
                  py::arg("settings") = std::map<std::string, std::string>{},
                  "Fits an ensemble to a task; settings use the fit-predict keys.")
      .def_static(
          "load", [](const std::string& path) { return PyModel{EnsembleModel::from_container(Container::load(path))}; },
          py::arg("path"))
      .def("save", [](const PyModel& self, const std::string& path) { self.model.to_container().save(path); })
      .def("predict", &PyModel::predict, py::arg("X"),
           "Probabilities (N x K) or predictions (N x 1) for encoded feature rows.")
      .def("evaluate", &PyModel::evaluate, py::arg("task_csv"), py::arg("split") = "test")
      .def_property_readonly("n_classes", [](const PyModel& self) { return self.model.K; })
      .def_property_readonly("n_features", [](const PyModel& self) { return self.model.n_features; })
      .def_property_readonly("n_members", [](const PyModel& self) { return self.model.members.size(); });
}
