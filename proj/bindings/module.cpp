#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ltcnet/dataset.hpp"
#include "ltcnet/experiment.hpp"
#include "ltcnet/metrics.hpp"
#include "ltcnet/model.hpp"
#include "ltcnet/robustness.hpp"
#include "ltcnet/synth.hpp"
#include "ltcnet/trainer.hpp"
#include "ltcnet/wiring.hpp"

namespace py = pybind11;
using namespace ltcnet;

PYBIND11_MODULE(_ltcnet, m) {
  m.doc() = "Liquid time-constant networks with NCP wiring, plus the "
            "LSTM baseline, metrics and robustness tools.";

  py::class_<SynthSpec>(m, "SynthSpec")
      .def(py::init<>())
      .def_readwrite("seed", &SynthSpec::seed)
      .def_readwrite("rows", &SynthSpec::rows)
      .def_readwrite("features", &SynthSpec::features)
      .def_readwrite("noise_std", &SynthSpec::noise_std)
      .def_readwrite("hetero", &SynthSpec::hetero)
      .def_readwrite("trend", &SynthSpec::trend)
      .def_readwrite("feature_noise", &SynthSpec::feature_noise);

  py::class_<Dataset>(m, "Dataset")
      .def(py::init<>())
      .def_readwrite("feature_names", &Dataset::feature_names)
      .def_readwrite("features", &Dataset::features)
      .def_readwrite("target", &Dataset::target)
      .def_readwrite("timestamps", &Dataset::timestamps)
      .def_readwrite("scaled", &Dataset::scaled)
      .def_readwrite("train_end", &Dataset::train_end)
      .def_readwrite("test_begin", &Dataset::test_begin)
      .def_readonly("perturbation", &Dataset::perturbation)
      .def_property_readonly("rows", &Dataset::rows)
      .def_property_readonly("feature_count", &Dataset::feature_count)
      .def("train_features", &Dataset::train_features)
      .def("test_features", &Dataset::test_features)
      .def("train_target", &Dataset::train_target)
      .def("test_target", &Dataset::test_target)
      .def("save", &Dataset::save, py::arg("path"))
      .def_static("load", &Dataset::load, py::arg("path"));

  m.def("synth_generate", &synth_generate, py::arg("spec"));
  m.def("synth_true_signal", &synth_true_signal, py::arg("spec"));
  m.def("chrono_split", &chrono_split, py::arg("dataset"),
        py::arg("train_frac"), py::arg("test_frac"));
  m.def("fit_scale", &fit_scale, py::arg("dataset"), py::arg("train_frac"));

  py::class_<WiringSpec>(m, "WiringSpec")
      .def(py::init<>())
      .def_readwrite("sensory_count", &WiringSpec::sensory_count)
      .def_readwrite("inter_count", &WiringSpec::inter_count)
      .def_readwrite("command_count", &WiringSpec::command_count)
      .def_readwrite("motor_count", &WiringSpec::motor_count)
      .def_readwrite("sensory_fanout", &WiringSpec::sensory_fanout)
      .def_readwrite("inter_fanout", &WiringSpec::inter_fanout)
      .def_readwrite("command_recurrence", &WiringSpec::command_recurrence)
      .def_readwrite("motor_fanin", &WiringSpec::motor_fanin)
      .def_readwrite("polarity_seed", &WiringSpec::polarity_seed)
      .def_property_readonly("neuron_count", &WiringSpec::neuron_count)
      .def_static("default_for", &WiringSpec::default_for, py::arg("sensory"),
                  py::arg("inter"), py::arg("seed"));

  py::class_<Wiring>(m, "Wiring")
      .def_readonly("sensory_count", &Wiring::sensory_count)
      .def_readonly("neuron_count", &Wiring::neuron_count)
      .def_property_readonly("edge_count", &Wiring::edge_count)
      .def_readonly("patched_edges", &Wiring::patched_edges);

  m.def("build_ncp_wiring", &build_ncp_wiring, py::arg("spec"));
  m.def("sparsity", &sparsity, py::arg("wiring"));
  m.def("param_count", &param_count, py::arg("wiring"));
  m.def("lstm_param_count", &lstm_param_count, py::arg("input_dim"),
        py::arg("hidden"), py::arg("outputs"));
  m.def("flops_per_step",
        static_cast<std::size_t (*)(const Wiring&)>(&flops_per_step),
        py::arg("wiring"));
  m.def("lstm_flops_per_step", &lstm_flops_per_step, py::arg("input_dim"),
        py::arg("hidden"));

  py::class_<Model>(m, "Model")
      .def_property_readonly("kind", &Model::kind)
      .def_property_readonly("input_size", &Model::input_size)
      .def_property_readonly("param_scalar_count", &Model::param_scalar_count)
      .def_property_readonly("flops_per_step", &Model::flops_per_step)
      .def("predict", &Model::predict, py::arg("features"));
  m.def("make_model", &make_model, py::arg("kind"), py::arg("input_dim"),
        py::arg("neurons"), py::arg("seed"));

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("model_kind", &TrainConfig::model_kind)
      .def_readwrite("neuron_count", &TrainConfig::neuron_count)
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("learning_rate", &TrainConfig::learning_rate)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("truncation_len", &TrainConfig::truncation_len);

  py::class_<TrainTrace>(m, "TrainTrace")
      .def_readonly("epoch_loss", &TrainTrace::epoch_loss)
      .def_readonly("epoch_test_r2", &TrainTrace::epoch_test_r2)
      .def_readonly("total_wall_seconds", &TrainTrace::total_wall_seconds);

  m.def("train", &train, py::arg("model"), py::arg("dataset"), py::arg("cfg"),
        py::arg("track_test_r2") = false);

  m.def("mse", &mse, py::arg("pred"), py::arg("actual"));
  m.def("r2_score", &r2_score, py::arg("actual"), py::arg("pred"));
  m.def(
      "tail_mse",
      [](const std::vector<double>& actual, const std::vector<double>& pred,
         double percentile) {
        TailMse t = tail_mse(actual, pred, percentile);
        return py::make_tuple(t.value, t.threshold, t.n_tail);
      },
      py::arg("actual"), py::arg("pred"), py::arg("percentile") = 90.0,
      "Returns (value, threshold, n_tail) for the top-percentile bins.");

  m.def(
      "ks_2samp",
      [](const std::vector<double>& a, const std::vector<double>& b) {
        KsResult r = ks_2samp(a, b);
        return py::make_tuple(r.statistic, r.p_value);
      },
      py::arg("a"), py::arg("b"), "Returns (statistic, p_value).");

  m.def(
      "add_noise",
      [](std::vector<double> column, double epsilon, std::uint64_t seed) {
        add_noise(column, epsilon, seed);
        return column;
      },
      py::arg("column"), py::arg("epsilon"), py::arg("seed"));
  m.def(
      "add_drift",
      [](std::vector<double> column, double epsilon) {
        add_drift(column, epsilon);
        return column;
      },
      py::arg("column"), py::arg("epsilon"));

  py::enum_<PerturbKind>(m, "PerturbKind")
      .value("noise", PerturbKind::kNoise)
      .value("drift", PerturbKind::kDrift);
  py::enum_<PerturbTarget>(m, "PerturbTarget")
      .value("features", PerturbTarget::kFeatures)
      .value("label", PerturbTarget::kLabel);

  py::class_<PerturbationSpec>(m, "PerturbationSpec")
      .def(py::init<>())
      .def_readwrite("kind", &PerturbationSpec::kind)
      .def_readwrite("epsilon", &PerturbationSpec::epsilon)
      .def_readwrite("target", &PerturbationSpec::target)
      .def_readwrite("seed", &PerturbationSpec::seed)
      .def("label", &PerturbationSpec::label);
  m.def("apply_perturbation", &apply_perturbation, py::arg("dataset"),
        py::arg("spec"));
}
