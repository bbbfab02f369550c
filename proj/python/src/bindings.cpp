#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dmawpt/baselines.hpp"
#include "dmawpt/beamforming.hpp"
#include "dmawpt/harness.hpp"
#include "dmawpt/materials.hpp"

namespace py = pybind11;
using namespace dmawpt;

namespace {

std::vector<ChannelVector> to_channels(const std::vector<Eigen::VectorXcd>& gammas) {
  std::vector<ChannelVector> out;
  for (std::size_t k = 0; k < gammas.size(); ++k) {
    ChannelVector c;
    c.user_index = static_cast<int>(k);
    c.coefficients = gammas[k];
    out.push_back(std::move(c));
  }
  return out;
}

py::dict record_dict(const RunRecord& r) {
  py::dict d;
  d["method"] = r.method;
  d["sweep_index"] = r.sweep_index;
  d["frequency_hz"] = r.frequency_hz;
  d["antenna_length_m"] = r.antenna_length_m;
  d["num_users"] = r.num_users;
  d["realization_index"] = r.realization_index;
  d["transmit_power_w"] = r.transmit_power_w;
  d["min_received_power_w"] = r.min_received_power_w;
  d["feasible"] = r.feasible;
  d["avg_gain"] = r.avg_gain;
  d["num_elements"] = r.num_elements;
  d["outer_iterations"] = r.outer_iterations;
  d["status"] = r.status;
  d["scene_checksum"] = r.scene_checksum;
  d["wall_time_s"] = r.wall_time_s;
  return d;
}

ExperimentConfig config_from(const std::string& json_text) {
  return ExperimentConfig::from_json(nlohmann::json::parse(json_text));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "DMA wireless power transfer beamforming core";
  m.attr("__version__") = DMAWPT_VERSION;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<InfeasibleProblem>(m, "InfeasibleProblem", PyExc_RuntimeError);
  py::register_exception<ZeroArray>(m, "ZeroArray", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  py::class_<MaterialSpec>(m, "MaterialSpec")
      .def_readonly("name", &MaterialSpec::name)
      .def_readonly("dielectric_constant", &MaterialSpec::dielectric_constant)
      .def_readonly("loss_tangent", &MaterialSpec::loss_tangent)
      .def_readonly("substrate_thickness_m", &MaterialSpec::substrate_thickness_m)
      .def_readonly("conductor_width_m", &MaterialSpec::conductor_width_m)
      .def_readonly("conductivity_s_per_m", &MaterialSpec::conductivity_s_per_m)
      .def_readonly("measured_at", &MaterialSpec::measured_at)
      .def("__repr__", [](const MaterialSpec& s) { return "<MaterialSpec '" + s.name + "'>"; });

  m.def("materials", [] { return MaterialDatabase::builtin().materials(); },
        "Built-in substrate table.");
  m.def("material", [](const std::string& name) { return MaterialDatabase::builtin().get(name); },
        py::arg("name") = std::string(kDefaultMaterial));

  m.def(
      "microstrip",
      [](const std::string& name, double frequency_hz) {
        const auto r = attenuation_and_beta(MaterialDatabase::builtin().get(name), frequency_hz);
        py::dict d;
        d["static_eff_dielectric"] = r.static_eff_dielectric;
        d["eff_dielectric"] = r.eff_dielectric;
        d["char_impedance_ohm"] = r.char_impedance_ohm;
        d["alpha_np_per_m"] = r.alpha_np_per_m;
        d["alpha_dielectric"] = r.alpha_dielectric;
        d["alpha_conductor"] = r.alpha_conductor;
        d["beta_rad_per_m"] = r.beta_rad_per_m;
        return d;
      },
      py::arg("material"), py::arg("frequency_hz"),
      "Effective permittivity, impedance, attenuation (Np/m) and beta (rad/m).");

  m.def(
      "array_shape",
      [](double length_m, double frequency_hz) {
        const auto g = build_array_geometry(length_m, wavelength_from_frequency(frequency_hz), 3.0);
        return py::make_tuple(g.num_waveguides, g.elements_per_waveguide);
      },
      py::arg("length_m"), py::arg("frequency_hz"), "(N_v, N_h) of the DMA.");

  m.def("lorentzian_weight", &lorentzian_weight, py::arg("phase_rad"));
  m.def(
      "project_to_lorentzian",
      [](const Eigen::VectorXcd& q) {
        const auto p = project_to_lorentzian(q);
        return py::make_tuple(p.phases, p.weights);
      },
      py::arg("q"), "Nearest Lorentzian weights; returns (phases, weights).");

  m.def(
      "solve_fd",
      [](const std::vector<Eigen::VectorXcd>& gammas, const std::vector<double>& thresholds) {
        const auto r = solve_fd(to_channels(gammas), thresholds);
        return py::make_tuple(r.transmit_power_w, r.precoders.precoders, r.received_powers_w);
      },
      py::arg("channels"), py::arg("thresholds"),
      "Fully digital minimum power; returns (P_Tx, precoders, received powers).");
  m.def(
      "mrt_lower_bound",
      [](const std::vector<Eigen::VectorXcd>& gammas, const std::vector<double>& thresholds) {
        return mrt_lower_bound(to_channels(gammas), thresholds);
      },
      py::arg("channels"), py::arg("thresholds"));

  m.def(
      "optimize_scene",
      [](const std::string& config_json, int realization, const std::string& method,
         std::uint64_t seed) {
        const ExperimentConfig c = config_from(config_json);
        SystemConfig sys = c.base;
        const Scenario sc = build_scenario(sys, c.material_database().get(c.material_name), realization);
        BeamformingSolution s;
        {
          py::gil_scoped_release release;
          if (method == "PSO") {
            PsoOptions o = c.pso;
            o.seed = seed;
            s = pso_optimize(sc, o);
          } else if (method == "EB_ASD") {
            AlternatingOptions o;
            o.seed = seed;
            o.stall_limit = c.stall_limit;
            o.max_iterations = c.max_iterations;
            o.init_retries = c.init_retries;
            s = alternating_optimize(sc, o);
          } else {
            throw ConfigError("method must be EB_ASD or PSO");
          }
        }
        py::dict d;
        d["transmit_power_w"] = s.transmit_power_w;
        d["received_powers_w"] = s.received_powers_w;
        d["feasible"] = s.feasible;
        d["phases"] = s.dma.phases;
        d["precoders"] = s.precoders.precoders;
        d["iterations_used"] = s.iterations_used;
        std::vector<double> best;
        for (const auto& t : s.trace) best.push_back(t.best_transmit_power_w);
        d["best_trace"] = best;
        return d;
      },
      py::arg("config_json"), py::arg("realization") = 0, py::arg("method") = "EB_ASD",
      py::arg("seed") = 1,
      "Optimize one scene of the config's base system with EB_ASD or PSO.");

  m.def(
      "run_experiment",
      [](const std::string& config_json) {
        const ExperimentConfig c = config_from(config_json);
        std::vector<RunRecord> records;
        {
          py::gil_scoped_release release;
          records = run_experiment(c);
        }
        py::list out;
        for (const auto& r : records) out.append(record_dict(r));
        return out;
      },
      py::arg("config_json"), "Run every cell of a JSON config; returns a list of dicts.");

  m.def(
      "records_csv",
      [](const std::string& config_json) {
        const ExperimentConfig c = config_from(config_json);
        py::gil_scoped_release release;
        return records_csv(run_experiment(c));
      },
      py::arg("config_json"), "records.csv text for a JSON config.");
}
