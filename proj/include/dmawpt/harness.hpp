#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dmawpt/baselines.hpp"
#include "dmawpt/beamforming.hpp"
#include "dmawpt/geometry.hpp"
#include "dmawpt/materials.hpp"

namespace dmawpt {

enum class SweepVariable { None, Frequency, AntennaLength };
enum class Method { EbAsd, Pso, Fd, MrtBound };

const char* to_string(SweepVariable v);
const char* to_string(Method m);
SweepVariable parse_sweep_variable(const std::string& s);
Method parse_method(const std::string& s);

/// Experiment description. JSON layout (every key optional except where noted):
///
///   {
///     "system":   {"frequency_hz", "antenna_length_m", "num_users",
///                  "rf_thresholds_w" (number or list), "boresight_gain",
///                  "room_side_m", "tx_height_m", "realizations", "rng_seed"},
///     "sweep":    {"variable": "frequency" | "antenna_length" | "none",
///                  "values": [...]},
///     "user_counts": [1, 2],            // overrides system.num_users
///     "methods":  ["EB_ASD", "PSO", "FD", "MRT_BOUND"],   // required
///     "material": "DuPont Pyralux AP-9161",
///     "materials_file": "path.json",    // relative to the config file
///     "solver":   {"tol", "max_iters"},
///     "algorithm": {"C", "I", "init_retries"},
///     "pso":      {"num_particles", "num_iterations", "inertia",
///                  "cognitive", "social", "threads"},
///     "workers":  1,
///     "output_dir": "out"
///   }
struct ExperimentConfig {
  SystemConfig base;
  SweepVariable sweep_variable = SweepVariable::None;
  std::vector<double> sweep_values;
  std::vector<int> user_counts;  // empty: use base.num_users
  std::vector<Method> methods;
  std::string material_name = kDefaultMaterial;
  std::string materials_file;
  SdpOptions solver;
  int stall_limit = 5;
  int max_iterations = 50;
  int init_retries = 10;
  PsoOptions pso;
  int workers = 1;
  std::string output_dir = "out";

  static ExperimentConfig from_json(const nlohmann::json& doc,
                                    const std::string& base_dir = "");
  static ExperimentConfig load(const std::string& path);
  nlohmann::json to_json() const;

  /// Throws ConfigError.
  void validate() const;
  MaterialDatabase material_database() const;
  /// Effective sweep grid (a single base-value point when the sweep is none).
  std::vector<double> sweep_points() const;
  std::vector<int> effective_user_counts() const;
};

struct RunRecord {
  std::string method;
  int sweep_index = 0;
  double frequency_hz = 0.0;
  double antenna_length_m = 0.0;
  int num_users = 0;
  int realization_index = 0;
  double transmit_power_w = 0.0;
  double min_received_power_w = 0.0;
  bool feasible = false;
  double avg_gain = 0.0;
  int num_elements = 0;
  int outer_iterations = 0;
  std::string status;
  std::string scene_checksum;
  double wall_time_s = 0.0;  // not part of records.csv

  bool operator==(const RunRecord& o) const;
};

/// Scene of one (system, realization): DMA geometry, waveguide propagation
/// for `material`, users and channels.
Scenario build_scenario(const SystemConfig& config, const MaterialSpec& material,
                        int realization_index);

/// 16 hex digits identifying the user positions of a scene.
std::string scene_checksum(const std::vector<Vec3>& users);

/// SystemConfig at one sweep point with K users.
SystemConfig system_at(const ExperimentConfig& config, int sweep_index, int num_users);

/// Every (sweep point, K, realization, method) cell, run on `config.workers`
/// threads, returned in canonical order. `on_record` is called (serialized)
/// as each cell finishes.
std::vector<RunRecord> run_experiment(const ExperimentConfig& config,
                                      const std::function<void(const RunRecord&)>& on_record = {});

struct SummaryRow {
  std::string method;
  double frequency_hz = 0.0;
  double antenna_length_m = 0.0;
  int num_users = 0;
  int count = 0;
  int feasible_count = 0;
  double infeasible_fraction = 0.0;
  double mean_transmit_power_w = 0.0;
  double std_transmit_power_w = 0.0;
  double mean_avg_gain = 0.0;
  double std_avg_gain = 0.0;
  double mean_num_elements = 0.0;
  bool empty_cell = false;  // every realization infeasible; means are NaN
};

/// One row per (method, sweep point, K), means and sample standard deviations
/// over feasible records.
std::vector<SummaryRow> aggregate(const std::vector<RunRecord>& records);

extern const char* const kRecordsHeader;
extern const char* const kSummaryHeader;

std::string format_record(const RunRecord& r);
std::string records_csv(const std::vector<RunRecord>& records);
std::string summary_csv(const std::vector<SummaryRow>& rows);
std::vector<RunRecord> parse_records_csv(const std::string& text);
std::vector<RunRecord> read_records_csv(const std::string& path);

/// Writes records.csv, summary.csv, timings.csv, the SVG charts (only when
/// records exist) and manifest.json into `output_dir`. Returns the file names.
/// Throws IoError.
std::vector<std::string> emit_outputs(const std::vector<RunRecord>& records,
                                      const std::vector<SummaryRow>& summary,
                                      const ExperimentConfig& config,
                                      const std::string& output_dir);

}  // namespace dmawpt
