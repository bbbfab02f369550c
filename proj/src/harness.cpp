#include "dmawpt/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "dmawpt/channel.hpp"
#include "dmawpt/microstrip.hpp"
#include "dmawpt/svg.hpp"

namespace dmawpt {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <typename T>
T read_field(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed,
                    const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string sanitize(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ';';
  }
  return s;
}

double mean_dma_gain(const Scenario& sc) {
  double total = 0.0;
  for (const auto& ch : sc.channels) {
    total += ch.coefficients.cwiseProduct(sc.propagation.entries).squaredNorm();
  }
  return total / static_cast<double>(sc.channels.size());
}

double mean_gain(const std::vector<ChannelVector>& channels) {
  double total = 0.0;
  for (const auto& ch : channels) total += ch.coefficients.squaredNorm();
  return total / static_cast<double>(channels.size());
}

double min_of(const std::vector<double>& v) {
  double m = kInf;
  for (double x : v) m = std::min(m, x);
  return v.empty() ? 0.0 : m;
}

bool meets(const std::vector<double>& rx, const std::vector<double>& thresholds) {
  for (std::size_t k = 0; k < rx.size(); ++k) {
    if (!(rx[k] >= thresholds[k] * (1.0 - 1e-6))) return false;
  }
  return true;
}

struct Cell {
  int sweep_index;
  int num_users;
  int realization;
  Method method;
};

RunRecord run_cell(const ExperimentConfig& cfg, const MaterialSpec& material, const Cell& cell) {
  const SystemConfig sys = system_at(cfg, cell.sweep_index, cell.num_users);
  const std::vector<Vec3> users = sample_user_positions(sys, cell.realization);
  const std::vector<double> thresholds = sys.thresholds();
  const std::uint64_t seed = derive_seed(sys.rng_seed, static_cast<std::uint64_t>(cell.sweep_index),
                                         static_cast<std::uint64_t>(cell.realization));

  RunRecord rec;
  rec.method = to_string(cell.method);
  rec.sweep_index = cell.sweep_index;
  rec.frequency_hz = sys.frequency_hz;
  rec.antenna_length_m = sys.antenna_length_m;
  rec.num_users = sys.num_users;
  rec.realization_index = cell.realization;
  rec.scene_checksum = scene_checksum(users);
  rec.transmit_power_w = kInf;
  rec.status = "ok";

  const auto start = std::chrono::steady_clock::now();
  try {
    const double lambda = sys.wavelength_m();
    switch (cell.method) {
      case Method::EbAsd:
      case Method::Pso: {
        const Scenario sc = build_scenario(sys, material, cell.realization);
        rec.num_elements = sc.geometry.total_elements;
        rec.avg_gain = mean_dma_gain(sc);
        BeamformingSolution sol;
        if (cell.method == Method::EbAsd) {
          AlternatingOptions ao;
          ao.stall_limit = cfg.stall_limit;
          ao.max_iterations = cfg.max_iterations;
          ao.init_retries = cfg.init_retries;
          ao.seed = seed;
          ao.sdp = cfg.solver;
          sol = alternating_optimize(sc, ao);
        } else {
          PsoOptions po = cfg.pso;
          po.seed = seed;
          po.sdp = cfg.solver;
          sol = pso_optimize(sc, po);
        }
        rec.outer_iterations = sol.iterations_used;
        if (std::isfinite(sol.transmit_power_w)) {
          rec.transmit_power_w = sol.transmit_power_w;
          rec.min_received_power_w = min_of(sol.received_powers_w);
          rec.feasible = sol.feasible;
          if (!sol.feasible) rec.status = "recheck_failed";
        } else {
          rec.status = "infeasible";
        }
        break;
      }
      case Method::Fd:
      case Method::MrtBound: {
        const FdGeometry fd = build_fd_geometry(sys.antenna_length_m, lambda, sys.tx_height_m);
        const auto channels = channel_set(fd.positions, users, lambda, sys.boresight_gain);
        rec.num_elements = fd.num_elements;
        rec.avg_gain = mean_gain(channels);
        if (cell.method == Method::Fd) {
          const PrecoderResult res = solve_fd(channels, thresholds, cfg.solver);
          rec.transmit_power_w = res.transmit_power_w;
          rec.min_received_power_w = min_of(res.received_powers_w);
          rec.feasible = meets(res.received_powers_w, thresholds);
          if (!rec.feasible) rec.status = "recheck_failed";
        } else {
          const double bound = mrt_lower_bound(channels, thresholds);
          if (!std::isfinite(bound)) throw InfeasibleProblem("zero channel");
          // Per-user MRT beams at exactly the bound's power split.
          std::vector<double> rx(channels.size(), 0.0);
          for (std::size_t m = 0; m < channels.size(); ++m) {
            const Eigen::VectorXcd w = channels[m].coefficients *
                                       (std::sqrt(thresholds[m]) /
                                        channels[m].coefficients.squaredNorm());
            for (std::size_t k = 0; k < channels.size(); ++k) {
              rx[k] += std::norm(channels[k].coefficients.dot(w));
            }
          }
          rec.transmit_power_w = bound;
          rec.min_received_power_w = min_of(rx);
          rec.feasible = meets(rx, thresholds);
        }
        break;
      }
    }
  } catch (const InfeasibleProblem&) {
    rec.status = "infeasible";
  } catch (const ZeroArray&) {
    rec.status = "zero_array";
  } catch (const DegenerateGeometry&) {
    rec.status = "degenerate_geometry";
  } catch (const std::exception& e) {
    rec.status = sanitize(std::string("error: ") + e.what());
  }
  if (!rec.feasible && rec.status == "ok") rec.status = "infeasible";
  rec.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

const char* to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::None: return "none";
    case SweepVariable::Frequency: return "frequency";
    case SweepVariable::AntennaLength: return "antenna_length";
  }
  return "?";
}

const char* to_string(Method m) {
  switch (m) {
    case Method::EbAsd: return "EB_ASD";
    case Method::Pso: return "PSO";
    case Method::Fd: return "FD";
    case Method::MrtBound: return "MRT_BOUND";
  }
  return "?";
}

SweepVariable parse_sweep_variable(const std::string& s) {
  if (s == "none") return SweepVariable::None;
  if (s == "frequency") return SweepVariable::Frequency;
  if (s == "antenna_length") return SweepVariable::AntennaLength;
  throw ConfigError("unknown sweep variable '" + s + "'");
}

Method parse_method(const std::string& s) {
  if (s == "EB_ASD") return Method::EbAsd;
  if (s == "PSO") return Method::Pso;
  if (s == "FD") return Method::Fd;
  if (s == "MRT_BOUND") return Method::MrtBound;
  throw ConfigError("unknown method '" + s + "'");
}

ExperimentConfig ExperimentConfig::from_json(const json& doc, const std::string& base_dir) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(doc,
                 {"system", "sweep", "user_counts", "methods", "material", "materials_file",
                  "solver", "algorithm", "pso", "workers", "output_dir", "description"},
                 "config");
  ExperimentConfig c;
  if (doc.contains("system")) {
    const json& s = doc.at("system");
    reject_unknown(s,
                   {"frequency_hz", "antenna_length_m", "num_users", "rf_thresholds_w",
                    "boresight_gain", "room_side_m", "tx_height_m", "realizations", "rng_seed"},
                   "system");
    auto& b = c.base;
    b.frequency_hz = read_field(s, "frequency_hz", b.frequency_hz);
    b.antenna_length_m = read_field(s, "antenna_length_m", b.antenna_length_m);
    b.num_users = read_field(s, "num_users", b.num_users);
    if (s.contains("rf_thresholds_w")) {
      const json& t = s.at("rf_thresholds_w");
      b.rf_thresholds_w = t.is_array() ? read_field(s, "rf_thresholds_w", b.rf_thresholds_w)
                                       : std::vector<double>{read_field(s, "rf_thresholds_w", 0.0)};
    }
    b.boresight_gain = read_field(s, "boresight_gain", b.boresight_gain);
    b.room_side_m = read_field(s, "room_side_m", b.room_side_m);
    b.tx_height_m = read_field(s, "tx_height_m", b.tx_height_m);
    b.realizations = read_field(s, "realizations", b.realizations);
    b.rng_seed = read_field(s, "rng_seed", b.rng_seed);
  }
  if (doc.contains("sweep")) {
    const json& s = doc.at("sweep");
    reject_unknown(s, {"variable", "values"}, "sweep");
    c.sweep_variable = parse_sweep_variable(read_field<std::string>(s, "variable", "none"));
    c.sweep_values = read_field(s, "values", c.sweep_values);
  }
  c.user_counts = read_field(doc, "user_counts", c.user_counts);
  if (!doc.contains("methods")) throw ConfigError("config must list 'methods'");
  for (const auto& m : read_field(doc, "methods", std::vector<std::string>{})) {
    c.methods.push_back(parse_method(m));
  }
  c.material_name = read_field(doc, "material", c.material_name);
  c.materials_file = read_field(doc, "materials_file", c.materials_file);
  if (!c.materials_file.empty() && !base_dir.empty() && fs::path(c.materials_file).is_relative()) {
    c.materials_file = (fs::path(base_dir) / c.materials_file).lexically_normal().string();
  }
  if (doc.contains("solver")) {
    const json& s = doc.at("solver");
    reject_unknown(s, {"tol", "max_iters"}, "solver");
    c.solver.tol = read_field(s, "tol", c.solver.tol);
    c.solver.max_iters = read_field(s, "max_iters", c.solver.max_iters);
  }
  if (doc.contains("algorithm")) {
    const json& s = doc.at("algorithm");
    reject_unknown(s, {"C", "I", "init_retries"}, "algorithm");
    c.stall_limit = read_field(s, "C", c.stall_limit);
    c.max_iterations = read_field(s, "I", c.max_iterations);
    c.init_retries = read_field(s, "init_retries", c.init_retries);
  }
  if (doc.contains("pso")) {
    const json& s = doc.at("pso");
    reject_unknown(s,
                   {"num_particles", "num_iterations", "inertia", "cognitive", "social", "threads"},
                   "pso");
    c.pso.num_particles = read_field(s, "num_particles", c.pso.num_particles);
    c.pso.num_iterations = read_field(s, "num_iterations", c.pso.num_iterations);
    c.pso.inertia = read_field(s, "inertia", c.pso.inertia);
    c.pso.cognitive = read_field(s, "cognitive", c.pso.cognitive);
    c.pso.social = read_field(s, "social", c.pso.social);
    c.pso.threads = read_field(s, "threads", c.pso.threads);
  }
  c.workers = read_field(doc, "workers", c.workers);
  c.output_dir = read_field(doc, "output_dir", c.output_dir);
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return from_json(doc, fs::path(path).parent_path().string());
}

json ExperimentConfig::to_json() const {
  json j;
  j["system"] = {{"frequency_hz", base.frequency_hz},
                 {"antenna_length_m", base.antenna_length_m},
                 {"num_users", base.num_users},
                 {"rf_thresholds_w", base.rf_thresholds_w},
                 {"boresight_gain", base.boresight_gain},
                 {"room_side_m", base.room_side_m},
                 {"tx_height_m", base.tx_height_m},
                 {"realizations", base.realizations},
                 {"rng_seed", base.rng_seed}};
  j["sweep"] = {{"variable", to_string(sweep_variable)}, {"values", sweep_values}};
  if (!user_counts.empty()) j["user_counts"] = user_counts;
  std::vector<std::string> names;
  for (Method m : methods) names.emplace_back(to_string(m));
  j["methods"] = names;
  j["material"] = material_name;
  if (!materials_file.empty()) j["materials_file"] = materials_file;
  j["solver"] = {{"tol", solver.tol}, {"max_iters", solver.max_iters}};
  j["algorithm"] = {{"C", stall_limit}, {"I", max_iterations}, {"init_retries", init_retries}};
  j["pso"] = {{"num_particles", pso.num_particles}, {"num_iterations", pso.num_iterations},
              {"inertia", pso.inertia},             {"cognitive", pso.cognitive},
              {"social", pso.social},               {"threads", pso.threads}};
  j["workers"] = workers;
  j["output_dir"] = output_dir;
  return j;
}

MaterialDatabase ExperimentConfig::material_database() const {
  return materials_file.empty() ? MaterialDatabase::builtin() : MaterialDatabase::load(materials_file);
}

std::vector<double> ExperimentConfig::sweep_points() const {
  switch (sweep_variable) {
    case SweepVariable::Frequency:
    case SweepVariable::AntennaLength:
      return sweep_values;
    case SweepVariable::None:
      break;
  }
  return {0.0};
}

std::vector<int> ExperimentConfig::effective_user_counts() const {
  return user_counts.empty() ? std::vector<int>{base.num_users} : user_counts;
}

void ExperimentConfig::validate() const {
  if (sweep_variable != SweepVariable::None && sweep_values.empty()) {
    throw ConfigError("sweep.values must be nonempty when a sweep variable is set");
  }
  for (double v : sweep_values) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("sweep values must be positive");
  }
  if (methods.empty()) throw ConfigError("methods must be nonempty");
  std::set<Method> seen(methods.begin(), methods.end());
  if (seen.size() != methods.size()) throw ConfigError("methods must not repeat");
  for (int k : user_counts) {
    if (k < 1) throw ConfigError("user_counts entries must be at least 1");
  }
  if (!(solver.tol > 0.0)) throw ConfigError("solver.tol must be positive");
  if (solver.max_iters < 1) throw ConfigError("solver.max_iters must be at least 1");
  if (stall_limit < 0) throw ConfigError("algorithm.C must be nonnegative");
  if (max_iterations < 1) throw ConfigError("algorithm.I must be at least 1");
  if (init_retries < 0) throw ConfigError("algorithm.init_retries must be nonnegative");
  pso.validate();
  if (workers < 1) throw ConfigError("workers must be at least 1");
  if (output_dir.empty()) throw ConfigError("output_dir must be set");
  const MaterialDatabase db = material_database();
  if (!db.contains(material_name)) throw ConfigError("unknown material '" + material_name + "'");
  for (int s = 0; s < static_cast<int>(sweep_points().size()); ++s) {
    for (int k : effective_user_counts()) system_at(*this, s, k).validate();
  }
}

SystemConfig system_at(const ExperimentConfig& config, int sweep_index, int num_users) {
  SystemConfig s = config.base;
  s.num_users = num_users;
  const auto points = config.sweep_points();
  switch (config.sweep_variable) {
    case SweepVariable::Frequency: s.frequency_hz = points.at(sweep_index); break;
    case SweepVariable::AntennaLength: s.antenna_length_m = points.at(sweep_index); break;
    case SweepVariable::None: break;
  }
  return s;
}

Scenario build_scenario(const SystemConfig& config, const MaterialSpec& material,
                        int realization_index) {
  Scenario sc;
  const double lambda = config.wavelength_m();
  sc.geometry = build_array_geometry(config);
  sc.propagation = propagation_matrix(attenuation_and_beta(material, config.frequency_hz),
                                      sc.geometry);
  const auto users = sample_user_positions(config, realization_index);
  sc.channels = channel_set(sc.geometry.element_positions, users, lambda, config.boresight_gain);
  sc.thresholds = config.thresholds();
  return sc;
}

std::string scene_checksum(const std::vector<Vec3>& users) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& u : users) {
    for (int i = 0; i < 3; ++i) {
      const double v = u[i];
      unsigned char bytes[sizeof v];
      std::memcpy(bytes, &v, sizeof v);
      for (unsigned char b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
      }
    }
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

std::vector<RunRecord> run_experiment(const ExperimentConfig& config,
                                      const std::function<void(const RunRecord&)>& on_record) {
  config.validate();
  const MaterialSpec material = config.material_database().get(config.material_name);

  std::vector<Cell> cells;
  const int points = static_cast<int>(config.sweep_points().size());
  for (int s = 0; s < points; ++s)
    for (int k : config.effective_user_counts())
      for (int r = 0; r < config.base.realizations; ++r)
        for (Method m : config.methods) cells.push_back({s, k, r, m});

  std::vector<RunRecord> records(cells.size());
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      RunRecord rec = run_cell(config, material, cells[i]);
      std::lock_guard<std::mutex> lock(mu);
      if (on_record) on_record(rec);
      records[i] = std::move(rec);
    }
  };
  const int nthreads = std::max(1, std::min<int>(config.workers, static_cast<int>(cells.size())));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return records;
}

bool RunRecord::operator==(const RunRecord& o) const {
  auto same = [](double a, double b) {
    return (std::isnan(a) && std::isnan(b)) || a == b;
  };
  return method == o.method && sweep_index == o.sweep_index &&
         same(frequency_hz, o.frequency_hz) && same(antenna_length_m, o.antenna_length_m) &&
         num_users == o.num_users && realization_index == o.realization_index &&
         same(transmit_power_w, o.transmit_power_w) &&
         same(min_received_power_w, o.min_received_power_w) && feasible == o.feasible &&
         same(avg_gain, o.avg_gain) && num_elements == o.num_elements &&
         outer_iterations == o.outer_iterations && status == o.status &&
         scene_checksum == o.scene_checksum;
}

// ---------------------------------------------------------------------------

std::vector<SummaryRow> aggregate(const std::vector<RunRecord>& records) {
  using Key = std::tuple<std::string, double, double, int>;
  std::vector<Key> order;
  std::map<Key, std::vector<const RunRecord*>> groups;
  for (const auto& r : records) {
    Key key{r.method, r.frequency_hz, r.antenna_length_m, r.num_users};
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(&r);
  }
  auto mean_std = [](const std::vector<double>& v) -> std::pair<double, double> {
    if (v.empty()) return {kNaN, kNaN};
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    if (v.size() < 2) return {m, 0.0};
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return {m, std::sqrt(ss / static_cast<double>(v.size() - 1))};
  };

  std::vector<SummaryRow> rows;
  for (const auto& key : order) {
    const auto& g = groups[key];
    SummaryRow row;
    row.method = std::get<0>(key);
    row.frequency_hz = std::get<1>(key);
    row.antenna_length_m = std::get<2>(key);
    row.num_users = std::get<3>(key);
    row.count = static_cast<int>(g.size());
    std::vector<double> p, gain, n;
    for (const RunRecord* r : g) {
      if (!r->feasible) continue;
      p.push_back(r->transmit_power_w);
      gain.push_back(r->avg_gain);
      n.push_back(r->num_elements);
    }
    row.feasible_count = static_cast<int>(p.size());
    row.infeasible_fraction = 1.0 - static_cast<double>(row.feasible_count) / row.count;
    row.empty_cell = p.empty();
    std::tie(row.mean_transmit_power_w, row.std_transmit_power_w) = mean_std(p);
    std::tie(row.mean_avg_gain, row.std_avg_gain) = mean_std(gain);
    row.mean_num_elements = mean_std(n).first;
    rows.push_back(row);
  }
  return rows;
}

const char* const kRecordsHeader =
    "method,sweep_index,frequency_hz,antenna_length_m,num_users,realization_index,"
    "transmit_power_w,min_received_power_w,feasible,avg_gain,num_elements,outer_iterations,"
    "status,scene_checksum";

const char* const kSummaryHeader =
    "method,frequency_hz,antenna_length_m,num_users,count,feasible_count,infeasible_fraction,"
    "mean_transmit_power_w,std_transmit_power_w,mean_avg_gain,std_avg_gain,mean_num_elements,"
    "empty_cell";

std::string format_record(const RunRecord& r) {
  std::ostringstream o;
  o << sanitize(r.method) << ',' << r.sweep_index << ',' << fmt_double(r.frequency_hz) << ','
    << fmt_double(r.antenna_length_m) << ',' << r.num_users << ',' << r.realization_index << ','
    << fmt_double(r.transmit_power_w) << ',' << fmt_double(r.min_received_power_w) << ','
    << (r.feasible ? 1 : 0) << ',' << fmt_double(r.avg_gain) << ',' << r.num_elements << ','
    << r.outer_iterations << ',' << sanitize(r.status) << ',' << r.scene_checksum;
  return o.str();
}

std::string records_csv(const std::vector<RunRecord>& records) {
  std::string out = std::string(kRecordsHeader) + "\n";
  for (const auto& r : records) out += format_record(r) + "\n";
  return out;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::ostringstream o;
  o << kSummaryHeader << '\n';
  for (const auto& r : rows) {
    o << r.method << ',' << fmt_double(r.frequency_hz) << ',' << fmt_double(r.antenna_length_m)
      << ',' << r.num_users << ',' << r.count << ',' << r.feasible_count << ','
      << fmt_double(r.infeasible_fraction) << ',' << fmt_double(r.mean_transmit_power_w) << ','
      << fmt_double(r.std_transmit_power_w) << ',' << fmt_double(r.mean_avg_gain) << ','
      << fmt_double(r.std_avg_gain) << ',' << fmt_double(r.mean_num_elements) << ','
      << (r.empty_cell ? 1 : 0) << '\n';
  }
  return o.str();
}

std::vector<RunRecord> parse_records_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kRecordsHeader) {
    throw IoError("records.csv header mismatch");
  }
  std::vector<RunRecord> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 14) throw IoError("records.csv line " + std::to_string(lineno) + ": bad field count");
    try {
      RunRecord r;
      r.method = f[0];
      r.sweep_index = std::stoi(f[1]);
      r.frequency_hz = std::strtod(f[2].c_str(), nullptr);
      r.antenna_length_m = std::strtod(f[3].c_str(), nullptr);
      r.num_users = std::stoi(f[4]);
      r.realization_index = std::stoi(f[5]);
      r.transmit_power_w = std::strtod(f[6].c_str(), nullptr);
      r.min_received_power_w = std::strtod(f[7].c_str(), nullptr);
      r.feasible = f[8] == "1";
      r.avg_gain = std::strtod(f[9].c_str(), nullptr);
      r.num_elements = std::stoi(f[10]);
      r.outer_iterations = std::stoi(f[11]);
      r.status = f[12];
      r.scene_checksum = f[13];
      out.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw IoError("records.csv line " + std::to_string(lineno) + ": unparsable field");
    }
  }
  return out;
}

std::vector<RunRecord> read_records_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_records_csv(buf.str());
}

std::vector<std::string> emit_outputs(const std::vector<RunRecord>& records,
                                      const std::vector<SummaryRow>& summary,
                                      const ExperimentConfig& config,
                                      const std::string& output_dir) {
  const fs::path dir(output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  std::vector<std::string> files;
  write_text(dir / "records.csv", records_csv(records));
  files.push_back("records.csv");
  write_text(dir / "summary.csv", summary_csv(summary));
  files.push_back("summary.csv");
  {
    std::ostringstream o;
    o << "method,sweep_index,num_users,realization_index,wall_time_s\n";
    for (const auto& r : records) {
      o << r.method << ',' << r.sweep_index << ',' << r.num_users << ',' << r.realization_index
        << ',' << fmt_double(r.wall_time_s) << '\n';
    }
    write_text(dir / "timings.csv", o.str());
    files.push_back("timings.csv");
  }

  json warnings = json::array();
  for (const auto& row : summary) {
    if (row.empty_cell) {
      warnings.push_back("empty cell: " + row.method + " at f=" + fmt_double(row.frequency_hz) +
                         " Hz, L=" + fmt_double(row.antenna_length_m) +
                         " m, K=" + std::to_string(row.num_users));
    }
  }

  if (!records.empty()) {
    const bool by_length = config.sweep_variable == SweepVariable::AntennaLength;
    const std::string var = by_length ? "antenna_length" : "frequency";
    auto xval = [&](const SummaryRow& r) {
      return by_length ? r.antenna_length_m : r.frequency_hz / 1e9;
    };
    const std::string xlabel = by_length ? "antenna length L (m)" : "frequency (GHz)";
    std::vector<double> ticks;
    for (const auto& r : summary) {
      const double x = xval(r);
      if (std::find(ticks.begin(), ticks.end(), x) == ticks.end()) ticks.push_back(x);
    }
    std::sort(ticks.begin(), ticks.end());

    auto chart = [&](const std::string& title, const std::string& ylabel,
                     const std::function<double(const SummaryRow&)>& y) {
      LineChart c;
      c.title = title;
      c.x_label = xlabel;
      c.y_label = ylabel;
      c.x_ticks = ticks;
      std::vector<std::pair<std::string, int>> keys;
      for (const auto& r : summary) {
        const std::pair<std::string, int> key{r.method, r.num_users};
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
      }
      for (const auto& key : keys) {
        ChartSeries s;
        s.name = key.first + " K=" + std::to_string(key.second);
        std::vector<std::pair<double, double>> pts;
        for (const auto& r : summary) {
          if (r.method == key.first && r.num_users == key.second) pts.emplace_back(xval(r), y(r));
        }
        std::sort(pts.begin(), pts.end());
        for (const auto& [px, py] : pts) {
          s.x.push_back(px);
          s.y.push_back(py);
        }
        c.series.push_back(std::move(s));
      }
      return render_svg(c);
    };
    auto db = [](double v, double offset) {
      return (v > 0.0 && std::isfinite(v)) ? 10.0 * std::log10(v) + offset : kNaN;
    };

    const std::string power = "power_vs_" + var + ".svg";
    write_text(dir / power, chart("Mean transmit power", "P_Tx (dBm)", [&](const SummaryRow& r) {
                 return db(r.mean_transmit_power_w, 30.0);
               }));
    files.push_back(power);
    const std::string gain = "gain_vs_" + var + ".svg";
    write_text(dir / gain, chart("Mean average gain", "gain (dB)", [&](const SummaryRow& r) {
                 return db(r.mean_avg_gain, 0.0);
               }));
    files.push_back(gain);
    const std::string elems = "elements_vs_" + var + ".svg";
    write_text(dir / elems, chart("Number of elements", "N", [](const SummaryRow& r) {
                 return r.mean_num_elements;
               }));
    files.push_back(elems);
  }

  files.push_back("manifest.json");
  json manifest;
  manifest["toolkit"] = "dmawpt";
  manifest["version"] = DMAWPT_VERSION;
  manifest["seed"] = config.base.rng_seed;
  manifest["config"] = config.to_json();
  manifest["record_count"] = records.size();
  manifest["files"] = files;
  manifest["warnings"] = warnings;
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
  return files;
}

}  // namespace dmawpt
