#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sqka/json_io.hpp"

namespace py = pybind11;
using namespace sqka;

namespace {

py::object json_to_py(const Json& j) {
  switch (j.type()) {
    case Json::value_t::null: return py::none();
    case Json::value_t::boolean: return py::bool_(j.get<bool>());
    case Json::value_t::number_integer: return py::int_(j.get<long long>());
    case Json::value_t::number_unsigned: return py::int_(j.get<unsigned long long>());
    case Json::value_t::number_float: return py::float_(j.get<double>());
    case Json::value_t::string: return py::str(j.get<std::string>());
    case Json::value_t::array: {
      py::list out;
      for (const Json& item : j) out.append(json_to_py(item));
      return out;
    }
    case Json::value_t::object: {
      py::dict out;
      for (const auto& [key, value] : j.items()) out[py::str(key)] = json_to_py(value);
      return out;
    }
    default: return py::none();
  }
}

Json py_to_json(const py::handle& obj) {
  const py::module_ json_mod = py::module_::import("json");
  const std::string dumped = py::str(json_mod.attr("dumps")(obj));
  return Json::parse(dumped);
}

ProtocolConfig config_from_py(const py::dict& protocol) {
  return config_from_json(py_to_json(protocol));
}

AttackModel attack_from_py(const py::object& attack, const ProtocolConfig& config,
                           uint64_t seed) {
  Rng rng(seed ^ 0xa77ac4ULL);
  return attack_from_json(attack.is_none() ? Json::object() : py_to_json(attack), config,
                          rng);
}

std::vector<std::vector<Complex>> density_to_py(const DensityMatrix& rho) {
  std::vector<std::vector<Complex>> out(static_cast<size_t>(rho.dim));
  for (int r = 0; r < rho.dim; ++r)
    for (int c = 0; c < rho.dim; ++c) out[static_cast<size_t>(r)].push_back(rho.at(r, c));
  return out;
}

DensityMatrix density_from_py(const std::vector<std::vector<Complex>>& rows) {
  DensityMatrix rho;
  rho.dim = static_cast<int>(rows.size());
  for (const auto& row : rows) {
    if (row.size() != rows.size())
      throw std::invalid_argument("density matrix must be square");
    rho.entries.insert(rho.entries.end(), row.begin(), row.end());
  }
  return rho;
}

Unitary unitary_from_py(const std::vector<std::vector<Complex>>& rows) {
  std::vector<Complex> entries;
  for (const auto& row : rows) {
    if (row.size() != rows.size()) throw std::invalid_argument("unitary must be square");
    entries.insert(entries.end(), row.begin(), row.end());
  }
  return Unitary(static_cast<int>(rows.size()), std::move(entries));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Simulator and security analysis for a single-state multi-party "
            "semiquantum key agreement protocol on GHZ entangled states";

  py::class_<Rng>(m, "Rng")
      .def(py::init<uint64_t>(), py::arg("seed"))
      .def_static("substream", &Rng::substream, py::arg("seed"), py::arg("index"))
      .def("uniform", &Rng::uniform)
      .def("bit", &Rng::bit);

  py::class_<StateVector>(m, "StateVector")
      .def_property_readonly("num_qubits", &StateVector::num_qubits)
      .def_property_readonly("amplitudes",
                             [](const StateVector& s) { return s.amplitudes(); })
      .def("norm", &StateVector::norm)
      .def("__repr__", [](const StateVector& s) {
        return "<StateVector of " + std::to_string(s.num_qubits()) + " qubits>";
      });

  m.def(
      "ghz_state",
      [](int num_parties, const std::string& bits, const std::string& sign) {
        if (sign.size() != 1) throw std::invalid_argument("sign must be '+' or '-'");
        return ghz_state(num_parties, bits_from_string(bits), sign[0]);
      },
      py::arg("num_parties"), py::arg("bits"), py::arg("sign") = "+");
  m.def("basis_state", [](int num_qubits, uint64_t index) {
    return StateVector::basis(num_qubits, index);
  });
  m.def("tensor", &tensor);
  m.def(
      "apply_unitary",
      [](const StateVector& s, const std::vector<std::vector<Complex>>& u,
         const std::vector<int>& targets) {
        return apply_unitary(s, unitary_from_py(u), targets);
      },
      py::arg("state"), py::arg("unitary"), py::arg("targets"));
  m.def("measure_z", &measure_z, py::arg("state"), py::arg("target"), py::arg("rng"));
  m.def(
      "measure_ghz",
      [](const StateVector& s, const std::vector<int>& targets, Rng& rng) {
        auto [label, post] = measure_ghz(s, targets, rng);
        return py::make_tuple(label.to_string(), post);
      },
      py::arg("state"), py::arg("targets"), py::arg("rng"));
  m.def(
      "reduced_density",
      [](const StateVector& s, const std::vector<int>& keep) {
        return density_to_py(reduced_density(s, keep));
      },
      py::arg("state"), py::arg("keep"));
  m.def(
      "trace_distance",
      [](const std::vector<std::vector<Complex>>& rho,
         const std::vector<std::vector<Complex>>& sigma) {
        return trace_distance(density_from_py(rho), density_from_py(sigma));
      },
      py::arg("rho"), py::arg("sigma"));

  m.def(
      "commit_key",
      [](const std::string& key_bits, int digest_bits) {
        return bits_to_hex(commit_key(bits_from_string(key_bits), digest_bits));
      },
      py::arg("key_bits"), py::arg("digest_bits") = kDefaultDigestBits);
  m.def("mask_key", [](const std::string& info, const std::string& key) {
    return bits_to_string(mask_key(bits_from_string(info), bits_from_string(key)));
  });
  m.def("unmask_key", [](const std::string& masked, const std::string& info) {
    return bits_to_string(unmask_key(bits_from_string(masked), bits_from_string(info)));
  });

  m.def(
      "run_protocol",
      [](const py::dict& protocol, const py::object& attack, uint64_t seed) {
        const ProtocolConfig config = config_from_py(protocol);
        const AttackModel model = attack_from_py(attack, config, seed);
        Rng rng(seed);
        return json_to_py(outcome_to_json(run_protocol(config, model, rng)));
      },
      py::arg("protocol"), py::arg("attack") = py::none(), py::arg("seed") = 0);

  m.def(
      "monte_carlo",
      [](const py::dict& protocol, const py::object& attack, long trials, uint64_t seed,
         int threads) {
        const ProtocolConfig config = config_from_py(protocol);
        const AttackModel model = attack_from_py(attack, config, seed);
        return json_to_py(
            detection_stats_to_json(monte_carlo(config, model, trials, seed, threads)));
      },
      py::arg("protocol"), py::arg("attack") = py::none(), py::arg("trials") = 1000,
      py::arg("seed") = 0, py::arg("threads") = 0);

  m.def(
      "qubit_efficiency",
      [](int num_parties, long key_length, long digest_bits) {
        return json_to_py(
            efficiency_to_json(qubit_efficiency(num_parties, key_length, digest_bits)));
      },
      py::arg("N"), py::arg("n"), py::arg("m"));

  m.def(
      "probe_independence",
      [](const py::dict& attack, const py::dict& protocol, long samples, uint64_t seed,
         bool include_probes) {
        const ProtocolConfig config = config_from_py(protocol);
        const AttackModel model = attack_from_py(attack, config, seed);
        if (model.kind != AttackKind::EntangleMeasure)
          throw std::invalid_argument("probe_independence needs an entangle-measure attack");
        return json_to_py(independence_to_json(
            probe_independence(model.probe, config, samples, seed), include_probes));
      },
      py::arg("attack"), py::arg("protocol"), py::arg("samples") = 0, py::arg("seed") = 0,
      py::arg("include_probes") = false);

  m.def(
      "detection_theory",
      [](const py::object& attack, const std::string& case_key, const py::dict& protocol) {
        const ProtocolConfig config = config_from_py(protocol);
        const AttackModel model = attack_from_py(attack, config, 0);
        CaseTag tag;
        if (case_key == "a" || case_key == "all_ctrl") tag.kind = CaseKind::AllCtrl;
        else if (case_key == "d" || case_key == "all_sift") tag.kind = CaseKind::AllSift;
        else tag.kind = CaseKind::Mixed;
        if (config.num_parties == 3) {
          using PA = PartyAction;
          if (case_key == "a") tag.actions = {PA::Ctrl, PA::Ctrl};
          if (case_key == "b") tag.actions = {PA::Ctrl, PA::Sift};
          if (case_key == "c") tag.actions = {PA::Sift, PA::Ctrl};
          if (case_key == "d") tag.actions = {PA::Sift, PA::Sift};
        }
        return theoretical_case_detection(model, tag, config.num_parties);
      },
      py::arg("attack"), py::arg("case_key"), py::arg("protocol"));

  m.def(
      "random_satisfying_attack",
      [](int probe_dim, uint64_t seed) {
        Rng rng(seed);
        return json_to_py(
            attack_to_json(AttackModel::entangle_measure(random_satisfying_attack(probe_dim, rng))));
      },
      py::arg("probe_dim"), py::arg("seed") = 0);
  m.def(
      "random_violating_attack",
      [](int probe_dim, uint64_t seed) {
        Rng rng(seed);
        return json_to_py(
            attack_to_json(AttackModel::entangle_measure(random_violating_attack(probe_dim, rng))));
      },
      py::arg("probe_dim"), py::arg("seed") = 0);
}
