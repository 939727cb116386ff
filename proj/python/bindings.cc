// Copyright 2026 The TensorBudget Authors.
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

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

#include "tensorbudget/dump.h"
#include "tensorbudget/frontend.h"
#include "tensorbudget/interpreter.h"
#include "tensorbudget/ir.h"
#include "tensorbudget/pass_framework.h"
#include "tensorbudget/status.h"

namespace py = pybind11;

namespace tb {
namespace {

DType DTypeFrom(const std::string& s) {
  if (s == "f64" || s == "float64") return DType::kF64;
  if (s == "f32" || s == "float32") return DType::kF32;
  throw Error(ErrorCode::kInvalidArgument, "unknown dtype '" + s + "'");
}

template <typename T>
TensorValue Copy(const py::array& a, DType dtype) {
  auto arr = py::array_t<T, py::array::c_style | py::array::forcecast>(a);
  std::vector<int64_t> dims(arr.shape(), arr.shape() + arr.ndim());
  TensorValue t(dtype, Shape(dims));
  std::memcpy(t.data<T>().data(), arr.data(), sizeof(T) * t.size());
  return t;
}

py::array ToNumpy(const TensorValue& t) {
  std::vector<py::ssize_t> dims(t.shape().dims().begin(),
                                t.shape().dims().end());
  if (t.dtype() == DType::kF32) {
    py::array_t<float> out(dims);
    std::memcpy(out.mutable_data(), t.data<float>().data(),
                sizeof(float) * t.size());
    return out;
  }
  py::array_t<double> out(dims);
  std::memcpy(out.mutable_data(), t.data<double>().data(),
              sizeof(double) * t.size());
  return out;
}

}  // namespace
}  // namespace tb

PYBIND11_MODULE(_core, m) {
  using namespace tb;
  m.doc() = "Memory-budgeted tensor graph compiler";

  // Later registrations are tried first, so the subclass comes second.
  auto error = py::register_exception<Error>(m, "Error");
  py::register_exception<BudgetExceeded>(m, "BudgetExceeded", error.ptr());

  py::class_<Graph>(m, "Graph")
      .def_property_readonly("name", &Graph::name)
      .def("__len__", &Graph::size)
      .def("dump", [](const Graph& g) { return Dump(g); })
      .def("max_array_bytes", [](const Graph& g) { return MaxArrayByteSize(g); })
      .def("estimate_peak_memory",
           [](const Graph& g) { return EstimatePeakMemory(g); })
      .def("num_loops",
           [](const Graph& g) {
             int n = 0;
             for (InstrId id : g.ids()) n += Is<WhileOp>(g.instr(id).op);
             return n;
           })
      .def("parameter_shapes",
           [](const Graph& g) {
             std::vector<std::vector<int64_t>> out;
             for (const ParameterInfo& p : g.parameters()) {
               out.emplace_back(p.type.shape().dims().begin(),
                                p.type.shape().dims().end());
             }
             return out;
           })
      .def("__repr__", [](const Graph& g) {
        return "<Graph " + g.name() + " with " + std::to_string(g.size()) +
               " instructions>";
      });

  py::class_<PassConfig>(m, "PassConfig")
      .def(py::init([](int64_t threshold, std::optional<int64_t> split,
                       bool match_replace, bool reorder, bool split_pass) {
             PassConfig c;
             c.tensor_size_threshold = threshold;
             c.tensor_split_size = split;
             c.enable_match_replace = match_replace;
             c.enable_reorder = reorder;
             c.enable_split = split_pass;
             c.Check();
             return c;
           }),
           py::arg("tensor_size_threshold") = 1'000'000'000,
           py::arg("tensor_split_size") = py::none(),
           py::arg("match_replace") = true, py::arg("reorder") = true,
           py::arg("split") = true)
      .def_readonly("tensor_size_threshold", &PassConfig::tensor_size_threshold)
      .def_property_readonly("split_size", &PassConfig::split_size)
      .def_readonly("match_replace", &PassConfig::enable_match_replace)
      .def_readonly("reorder", &PassConfig::enable_reorder)
      .def_readonly("split", &PassConfig::enable_split);

  m.def(
      "build_kernel_mvm",
      [](int64_t n, double variance, double lengthscale,
         const std::string& dtype) {
        return BuildKernelMvm(n, {variance, lengthscale}, DTypeFrom(dtype));
      },
      py::arg("n"), py::arg("variance") = 1.0, py::arg("lengthscale") = 1.0,
      py::arg("dtype") = "f64");
  m.def(
      "build_pairwise_distance",
      [](int64_t n, int64_t mm, int64_t d, const std::string& metric,
         const std::string& dtype) {
        return BuildPairwiseDistance(n, mm, d, ParseMetric(metric),
                                     DTypeFrom(dtype));
      },
      py::arg("n"), py::arg("m"), py::arg("d"), py::arg("metric") = "l2",
      py::arg("dtype") = "f64");
  m.def(
      "build_knn",
      [](int64_t n, int64_t mm, int64_t d, int64_t k, const std::string& metric,
         const std::string& dtype) {
        return BuildKnn(n, mm, d, k, ParseMetric(metric), DTypeFrom(dtype));
      },
      py::arg("n"), py::arg("m"), py::arg("d"), py::arg("k"),
      py::arg("metric") = "l2", py::arg("dtype") = "f64");

  m.def(
      "run_pipeline",
      [](const Graph& g, const PassConfig& c) {
        std::vector<Diagnostic> diags;
        Graph out = RunPipeline(g, c, &diags);
        std::vector<std::string> reasons;
        for (const Diagnostic& d : diags) reasons.push_back(d.reason);
        return py::make_tuple(std::move(out), reasons);
      },
      py::arg("graph"), py::arg("config") = PassConfig{},
      "Returns (optimized graph, list of diagnostics).");

  m.def(
      "evaluate",
      [](const Graph& g, const std::vector<py::array>& inputs,
         std::optional<int64_t> budget) {
        const auto params = g.parameters();
        if (params.size() != inputs.size()) {
          throw Error(ErrorCode::kShapeMismatch,
                      "expected " + std::to_string(params.size()) +
                          " inputs, got " + std::to_string(inputs.size()));
        }
        std::vector<TensorValue> values;
        for (size_t i = 0; i < inputs.size(); ++i) {
          const DType t = params[i].type.dtype();
          values.push_back(t == DType::kF32 ? Copy<float>(inputs[i], t)
                                            : Copy<double>(inputs[i], t));
        }
        EvaluationResult r;
        {
          py::gil_scoped_release release;
          r = Evaluate(g, values, budget.value_or(kUnlimitedBudget));
        }
        py::list outs;
        for (const TensorValue& t : r.outputs) outs.append(ToNumpy(t));
        return py::make_tuple(outs, r.trace.peak_live_bytes);
      },
      py::arg("graph"), py::arg("inputs"), py::arg("budget") = py::none(),
      "Returns (list of output arrays, peak live bytes).");
}
