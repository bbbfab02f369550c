// dmawpt: run sweeps, list materials, validate configs.
//
//   dmawpt run configs/frequency-desk.json --out out/freq --workers 2
//   dmawpt materials list
//   dmawpt materials export data/materials.json
//   dmawpt validate configs/length-sweep.json

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>

#include <CLI11.hpp>

#include "dmawpt/harness.hpp"
#include "dmawpt/materials.hpp"

using namespace dmawpt;
namespace fs = std::filesystem;

namespace {

struct RunArgs {
  std::string config;
  std::string sweep;
  std::vector<double> values;
  std::vector<std::string> methods;
  std::vector<int> users;
  std::int64_t seed = -1;
  std::string out;
  int realizations = 0;
  int workers = 0;
  bool quiet = false;
};

ExperimentConfig load_with_overrides(const RunArgs& a) {
  ExperimentConfig c = ExperimentConfig::load(a.config);
  if (!a.sweep.empty()) c.sweep_variable = parse_sweep_variable(a.sweep);
  if (!a.values.empty()) c.sweep_values = a.values;
  if (!a.methods.empty()) {
    c.methods.clear();
    for (const auto& m : a.methods) c.methods.push_back(parse_method(m));
  }
  if (!a.users.empty()) c.user_counts = a.users;
  if (a.seed >= 0) c.base.rng_seed = static_cast<std::uint64_t>(a.seed);
  if (!a.out.empty()) c.output_dir = a.out;
  if (a.realizations > 0) c.base.realizations = a.realizations;
  if (a.workers > 0) c.workers = a.workers;
  c.validate();
  return c;
}

int cmd_run(const RunArgs& a) {
  const ExperimentConfig c = load_with_overrides(a);
  fs::create_directories(c.output_dir);
  const fs::path partial = fs::path(c.output_dir) / "records.partial.csv";
  std::ofstream flush(partial, std::ios::binary);
  if (!flush) throw IoError("cannot write " + partial.string());
  flush << kRecordsHeader << '\n' << std::flush;
  std::mutex mu;
  std::size_t done = 0;
  const auto records = run_experiment(c, [&](const RunRecord& r) {
    std::lock_guard<std::mutex> lock(mu);
    flush << format_record(r) << '\n' << std::flush;
    ++done;
    if (!a.quiet) {
      std::fprintf(stderr, "[%zu] %s f=%.4g GHz L=%.4g m K=%d r=%d: %s P_Tx=%.6g W (%.2f s)\n",
                   done, r.method.c_str(), r.frequency_hz / 1e9, r.antenna_length_m, r.num_users,
                   r.realization_index, r.status.c_str(), r.transmit_power_w, r.wall_time_s);
    }
  });
  flush.close();
  const auto summary = aggregate(records);
  const auto files = emit_outputs(records, summary, c, c.output_dir);
  fs::remove(partial);
  for (const auto& row : summary) {
    std::printf("%-9s f=%6.3g GHz  L=%5.3f m  K=%d  P_Tx=%.6g W  gain=%.4g  N=%.0f  feasible %d/%d\n",
                row.method.c_str(), row.frequency_hz / 1e9, row.antenna_length_m, row.num_users,
                row.mean_transmit_power_w, row.mean_avg_gain, row.mean_num_elements,
                row.feasible_count, row.count);
  }
  std::printf("wrote %zu files to %s\n", files.size(), c.output_dir.c_str());
  return 0;
}

int cmd_materials(const std::string& file) {
  const MaterialDatabase db = file.empty() ? MaterialDatabase::builtin() : MaterialDatabase::load(file);
  std::printf("%-28s %6s %8s %10s %10s  %s\n", "name", "eps_r", "tan_d", "zeta (mm)",
              "width (mm)", "measured at");
  for (const auto& m : db.materials()) {
    std::printf("%-28s %6.3g %8.4g %10.4g %10.4g  %s\n", m.name.c_str(), m.dielectric_constant,
                m.loss_tangent, m.substrate_thickness_m * 1e3, m.conductor_width_m * 1e3,
                m.measured_at.c_str());
  }
  return 0;
}

int cmd_validate(const std::string& path) {
  const ExperimentConfig c = ExperimentConfig::load(path);
  c.validate();
  std::size_t cells = c.sweep_points().size() * c.effective_user_counts().size() *
                      static_cast<std::size_t>(c.base.realizations) * c.methods.size();
  std::printf("%s: ok (%zu cells)\n", path.c_str(), cells);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DMA wireless power transfer beamforming toolkit"};
  app.set_version_flag("--version", DMAWPT_VERSION);
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run an experiment config");
  run_cmd->add_option("config,--config", run.config, "Experiment JSON")->required();
  run_cmd->add_option("--sweep", run.sweep, "frequency | antenna_length | none");
  run_cmd->add_option("--values", run.values, "Sweep values (Hz or m)")->delimiter(',');
  run_cmd->add_option("--methods", run.methods, "EB_ASD,PSO,FD,MRT_BOUND")->delimiter(',');
  run_cmd->add_option("--users", run.users, "User counts K")->delimiter(',');
  run_cmd->add_option("--seed", run.seed, "Base RNG seed");
  run_cmd->add_option("--out", run.out, "Output directory");
  run_cmd->add_option("--realizations", run.realizations, "Realizations per sweep point");
  run_cmd->add_option("--workers", run.workers, "Worker threads");
  run_cmd->add_flag("-q,--quiet", run.quiet, "No per-cell progress");

  std::string mat_file;
  auto* mat_cmd = app.add_subcommand("materials", "Material database");
  auto* list_cmd = mat_cmd->add_subcommand("list", "List materials");
  list_cmd->add_option("--file", mat_file, "Materials JSON instead of the built-in table");
  std::string export_path;
  auto* export_cmd = mat_cmd->add_subcommand("export", "Write the built-in table as JSON");
  export_cmd->add_option("path", export_path, "Destination file")->required();
  mat_cmd->require_subcommand(1);

  std::string validate_path;
  auto* val_cmd = app.add_subcommand("validate", "Check a config without running it");
  val_cmd->add_option("config,--config", validate_path, "Experiment JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return cmd_run(run);
    if (*export_cmd) {
      MaterialDatabase::builtin().save(export_path);
      return 0;
    }
    if (*mat_cmd) return cmd_materials(mat_file);
    if (*val_cmd) return cmd_validate(validate_path);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 3;
  }
  return 0;
}
