// Copyright 2026 The DriftArena Authors.
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

// Python module _core. Packets are exposed as bytes, feature vectors as
// lists of floats; the game runs entirely on the C++ side.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <memory>
#include <string>
#include <vector>

#include "driftarena/agents.hpp"
#include "driftarena/arena.hpp"
#include "driftarena/config.hpp"
#include "driftarena/drift.hpp"
#include "driftarena/envs.hpp"
#include "driftarena/nids.hpp"
#include "driftarena/perturb.hpp"
#include "driftarena/report.hpp"
#include "driftarena/synth.hpp"
#include "driftarena/traffic.hpp"

namespace py = pybind11;
namespace da = driftarena;

namespace {

da::RawPacket packet_from_bytes(const py::bytes& b, da::Label label, bool has_link_header) {
  const std::string s = b;
  da::RawPacket p;
  p.bytes.assign(s.begin(), s.end());
  p.label = label;
  p.has_link_header = has_link_header;
  return p;
}

py::bytes to_bytes(const std::vector<std::uint8_t>& v) {
  return py::bytes(reinterpret_cast<const char*>(v.data()), v.size());
}

std::vector<da::FeatureVector> to_samples(const std::vector<std::vector<double>>& xs,
                                          const std::vector<int>& labels) {
  if (xs.size() != labels.size()) throw da::DimensionError("features and labels differ in length");
  std::vector<da::FeatureVector> out;
  out.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out.push_back({xs[i], da::label_from_int(labels[i])});
  return out;
}

da::GameConfig make_config(const py::dict& settings) {
  da::GameConfig c;
  for (const auto& [k, v] : settings) {
    da::apply_setting(c, py::str(k), py::str(v));
  }
  c.validate();
  return c;
}

py::dict summary_of(const da::RunReport& r) {
  py::dict d;
  d["complete"] = r.complete;
  d["error"] = r.error;
  d["rounds"] = r.rounds.size();
  d["initial_accuracy"] = r.initial_accuracy;
  d["final_accuracy"] = r.final_accuracy();
  d["action_counts"] = r.action_counts();
  d["action_mean_rewards"] = r.action_mean_rewards();
  const auto rs = r.recovery_summary();
  d["recovery_post_drift"] = rs.post_drift;
  d["recovery_fraction"] = rs.recovered_fraction;
  std::vector<double> acc;
  for (const auto& round : r.rounds) acc.push_back(round.acc_after_blue);
  d["accuracy"] = acc;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Packet-level adversarial drift game";

  py::register_exception<da::Error>(m, "Error");
  py::register_exception<da::ConfigError>(m, "ConfigError");
  py::register_exception<da::MalformedPacket>(m, "MalformedPacket");
  py::register_exception<da::RejectedPacket>(m, "RejectedPacket");

  m.attr("FEATURE_DIM") = da::kFeatureDim;
  m.attr("BLUE_STATE_DIM") = da::kBlueStateDim;
  m.attr("PERTURB_ACTIONS") = da::kPerturbActionCount;
  m.attr("ADAPTATION_ACTIONS") = da::kAdaptationActionCount;

  py::enum_<da::Label>(m, "Label")
      .value("BENIGN", da::Label::kBenign)
      .value("MALICIOUS", da::Label::kMalicious);

  py::class_<da::RawPacket>(m, "Packet")
      .def(py::init(&packet_from_bytes), py::arg("data"), py::arg("label") = da::Label::kBenign,
           py::arg("has_link_header") = true)
      .def_property_readonly("data", [](const da::RawPacket& p) { return to_bytes(p.bytes); })
      .def_readwrite("label", &da::RawPacket::label)
      .def_readwrite("timestamp", &da::RawPacket::timestamp)
      .def_readonly("has_link_header", &da::RawPacket::has_link_header)
      .def("__len__", [](const da::RawPacket& p) { return p.bytes.size(); });

  m.def("synthesize", [](std::size_t n, std::uint64_t seed) { return da::synth_generate(da::default_profile(), n, seed); },
        py::arg("n"), py::arg("seed") = 1, "Labelled packets from the default synthetic profile.");
  m.def("preprocess", [](const da::RawPacket& p) { return da::preprocess(p).values; }, py::arg("packet"));
  m.def("split_sizes", &da::split_sizes, py::arg("n"), py::arg("k"));

  m.def("perturb_action_name", [](int a) { return std::string(da::perturb_action_name(da::perturb_action_from_int(a))); });
  m.def(
      "perturb",
      [](const da::RawPacket& p, int action) {
        const auto view = da::PacketView::from_raw(p);
        auto out = da::apply(view, da::perturb_action_from_int(action));
        return py::make_tuple(out.view.raw(), out.effective);
      },
      py::arg("packet"), py::arg("action"), "Returns (packet, effective).");
  m.def("packet_valid", [](const da::RawPacket& p) { return da::PacketView::from_raw(p).valid(); });

  py::class_<da::Metrics>(m, "Metrics")
      .def_readonly("acc", &da::Metrics::acc)
      .def_readonly("balanced_acc", &da::Metrics::balanced_acc)
      .def_readonly("fpr", &da::Metrics::fpr)
      .def_readonly("fnr", &da::Metrics::fnr);

  py::class_<da::Classifier>(m, "Classifier")
      .def(py::init([](std::uint64_t seed) { return da::Classifier({}, seed); }), py::arg("seed") = 0)
      .def_static(
          "fit",
          [](const std::vector<std::vector<double>>& xs, const std::vector<int>& labels, std::uint64_t seed) {
            return da::Classifier::fit_initial(to_samples(xs, labels), seed);
          },
          py::arg("features"), py::arg("labels"), py::arg("seed") = 0)
      .def("predict_proba", [](const da::Classifier& c, const std::vector<double>& x) { return c.predict_proba(x); })
      .def(
          "partial_fit",
          [](da::Classifier& c, const std::vector<std::vector<double>>& xs, const std::vector<int>& labels,
             std::size_t passes) { return c.partial_fit(to_samples(xs, labels), passes).losses; },
          py::arg("features"), py::arg("labels"), py::arg("passes") = 5)
      .def(
          "evaluate",
          [](const da::Classifier& c, const std::vector<std::vector<double>>& xs, const std::vector<int>& labels) {
            return da::evaluate(c, to_samples(xs, labels));
          },
          py::arg("features"), py::arg("labels"))
      .def_property_readonly("version", &da::Classifier::version)
      .def("save", &da::Classifier::save)
      .def_static("load", &da::Classifier::load);

  m.def("entropy", [](double p0, double p1) { return da::entropy({p0, p1}); });
  m.def(
      "kl_divergence",
      [](const std::vector<double>& p, const std::vector<double>& q, std::size_t bins, bool smoothing) {
        return da::kl_divergence_1d(p, q, bins, smoothing);
      },
      py::arg("p"), py::arg("q"), py::arg("bins") = da::kKlBins,
        py::arg("smoothing") = true);
  m.def(
      "wasserstein", [](const std::vector<double>& a, const std::vector<double>& b) { return da::wasserstein_1d(a, b); },
      py::arg("a"), py::arg("b"));

  py::class_<da::AdaptationBudget>(m, "AdaptationBudget")
      .def(py::init<>())
      .def_readwrite("B", &da::AdaptationBudget::B)
      .def_readwrite("p_low", &da::AdaptationBudget::p_low)
      .def_readwrite("p_high", &da::AdaptationBudget::p_high)
      .def_readwrite("tau_low", &da::AdaptationBudget::tau_low)
      .def_readwrite("tau_high", &da::AdaptationBudget::tau_high)
      .def_readwrite("conf_threshold", &da::AdaptationBudget::conf_threshold);
  m.def(
      "select_active",
      [](const std::vector<double>& confidence, const da::AdaptationBudget& b) {
        return da::select_active_from_confidence(confidence, b);
      },
      py::arg("confidence"),
        py::arg("budget") = da::AdaptationBudget{});
  m.def(
      "select_continual",
      [](const std::vector<double>& entropies, const da::AdaptationBudget& b) {
        const auto s = da::select_continual_from_entropy(entropies, b);
        return py::make_tuple(s.representative, s.discriminative);
      },
      py::arg("entropies"), py::arg("budget") = da::AdaptationBudget{}, "Returns (representative, discriminative).");

  m.def(
      "red_reward",
      [](double before, double after, bool evaded, bool effective) {
        return da::red_reward(before, after, evaded, effective, {});
      },
      py::arg("p_before"), py::arg("p_after"), py::arg("evaded") = false, py::arg("effective") = true);
  m.def(
      "blue_reward", [](double acc, double acc_prev, double r) { return da::blue_reward(acc, acc_prev, r, {}); },
      py::arg("acc"), py::arg("acc_prev"), py::arg("r"));

  py::class_<da::DqnAgent>(m, "DqnAgent")
      .def(py::init([](std::size_t state_dim, std::size_t actions, std::uint64_t seed) {
             return std::make_unique<da::DqnAgent>(state_dim, actions, da::DqnConfig{}, seed);
           }),
           py::arg("state_dim"), py::arg("actions"), py::arg("seed") = 0)
      .def("act", [](da::DqnAgent& a, const std::vector<double>& s) { return a.act(s); })
      .def("greedy", [](const da::DqnAgent& a, const std::vector<double>& s) { return a.greedy(s); })
      .def("q_values", [](const da::DqnAgent& a, const std::vector<double>& s) { return a.q_values(s); })
      .def("observe",
           [](da::DqnAgent& a, std::vector<double> s, std::size_t action, double r, std::vector<double> s2,
              bool done) { a.observe({std::move(s), action, r, std::move(s2), done}); })
      .def_property_readonly("epsilon", &da::DqnAgent::epsilon);

  py::class_<da::PpoAgent>(m, "PpoAgent")
      .def(py::init([](std::size_t state_dim, std::size_t actions, std::uint64_t seed) {
             return std::make_unique<da::PpoAgent>(state_dim, actions, da::PpoConfig{}, seed);
           }),
           py::arg("state_dim"), py::arg("actions"), py::arg("seed") = 0)
      .def("act", [](da::PpoAgent& a, const std::vector<double>& s) { return a.act(s); })
      .def("greedy", [](const da::PpoAgent& a, const std::vector<double>& s) { return a.greedy(s); })
      .def("action_probabilities", [](const da::PpoAgent& a, const std::vector<double>& s) { return a.action_probabilities(s); })
      .def("observe", [](da::PpoAgent& a, std::vector<double> s, std::size_t action, double r, std::vector<double> s2,
                         bool done) { a.observe({std::move(s), action, r, std::move(s2), done}); });

  m.def("config_keys", &da::config_keys);
  m.def("default_config", [] { return da::dump_config(da::GameConfig{}); });
  m.def(
      "run_game",
      [](const py::dict& settings, const std::string& out) {
        const da::GameConfig c = make_config(settings);
        da::RunReport r;
        {
          py::gil_scoped_release release;
          r = da::run_game(c);
        }
        if (!out.empty()) da::report_emit(r, out);
        return summary_of(r);
      },
      py::arg("settings") = py::dict(), py::arg("out") = "",
      "Plays one game. `settings` maps config keys to values; `out` writes the report there.");
}
