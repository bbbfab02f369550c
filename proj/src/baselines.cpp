#include "dmawpt/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <thread>

namespace dmawpt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Angular difference a - b in (-π, π].
double angle_diff(double a, double b) {
  double d = std::remainder(a - b, kTwoPi);
  if (d <= -kPi) d += kTwoPi;
  return d;
}

}  // namespace

FdGeometry build_fd_geometry(double length_m, double wavelength_m, double tx_height_m) {
  if (!(length_m > 0.0) || !(wavelength_m > 0.0)) {
    throw ZeroArray("FD array needs positive length and wavelength");
  }
  FdGeometry g;
  g.spacing_m = wavelength_m / 2.0;
  g.side_count = static_cast<int>(std::floor(length_m / g.spacing_m * (1.0 + 1e-12)));
  if (g.side_count < 1) throw ZeroArray("FD array side shorter than half a wavelength");
  g.num_elements = g.side_count * g.side_count;
  const double offset = 0.5 * (g.side_count - 1);
  g.positions.reserve(static_cast<std::size_t>(g.num_elements));
  for (int a = 0; a < g.side_count; ++a) {
    for (int c = 0; c < g.side_count; ++c) {
      g.positions.emplace_back((c - offset) * g.spacing_m, (a - offset) * g.spacing_m,
                               tx_height_m);
    }
  }
  return g;
}

PrecoderResult solve_fd(const std::vector<ChannelVector>& channels,
                        const std::vector<double>& thresholds, const SdpOptions& options) {
  if (channels.empty()) throw DimensionMismatch("at least one user is required");
  const Eigen::Index n = channels.front().coefficients.size();
  std::vector<Eigen::VectorXcd> b;
  b.reserve(channels.size());
  for (const auto& ch : channels) {
    if (ch.coefficients.size() != n) throw DimensionMismatch("channel lengths differ");
    b.push_back(ch.coefficients);
  }
  const int streams = static_cast<int>(std::min<Eigen::Index>(n, b.size()));
  return solve_min_power_precoders(Eigen::MatrixXcd::Identity(n, n), b, thresholds, streams,
                                   options);
}

double mrt_lower_bound(const std::vector<ChannelVector>& channels,
                       const std::vector<double>& thresholds) {
  if (channels.size() != thresholds.size()) {
    throw DimensionMismatch("one threshold per user is required");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < channels.size(); ++k) {
    if (thresholds[k] <= 0.0) continue;
    const double g2 = channels[k].coefficients.squaredNorm();
    if (!(g2 > 0.0)) return kInf;
    total += thresholds[k] / g2;
  }
  return total;
}

void PsoOptions::validate() const {
  if (num_particles < 1) throw ConfigError("pso: num_particles must be >= 1");
  if (num_iterations < 1) throw ConfigError("pso: num_iterations must be >= 1");
  if (threads < 1) throw ConfigError("pso: threads must be >= 1");
  if (!std::isfinite(inertia) || !std::isfinite(cognitive) || !std::isfinite(social)) {
    throw ConfigError("pso: coefficients must be finite");
  }
}

BeamformingSolution pso_optimize(const Scenario& scenario, const PsoOptions& options) {
  options.validate();
  if (scenario.channels.empty()) throw DimensionMismatch("scenario has no users");
  const int nv = scenario.geometry.num_waveguides;
  const int nh = scenario.geometry.elements_per_waveguide;
  const int n = scenario.geometry.total_elements;
  const int np = options.num_particles;

  struct Particle {
    Eigen::VectorXd x, v, best_x;
    double best_fit = kInf;
    double fit = kInf;
    std::optional<PrecoderResult> result;
  };
  std::vector<Particle> swarm(static_cast<std::size_t>(np));
  for (int p = 0; p < np; ++p) {
    auto& s = swarm[p];
    s.x = random_phases(n, p == 0 ? options.seed
                                  : derive_seed(options.seed, static_cast<std::uint64_t>(p)));
    s.v = Eigen::VectorXd::Zero(n);
  }

  auto evaluate = [&](Particle& s) {
    try {
      s.result = solve_precoder_sdp(scenario.channels, scenario.propagation,
                                    build_q_matrix(s.x, nv, nh), scenario.thresholds,
                                    options.sdp);
      s.fit = s.result->transmit_power_w;
    } catch (const InfeasibleProblem&) {
      s.result.reset();
      s.fit = kInf;
    }
  };
  auto evaluate_all = [&]() {
    const int t = std::min(options.threads, np);
    if (t <= 1) {
      for (auto& s : swarm) evaluate(s);
      return;
    }
    std::vector<std::thread> pool;
    for (int w = 0; w < t; ++w) {
      pool.emplace_back([&, w] {
        for (int p = w; p < np; p += t) evaluate(swarm[p]);
      });
    }
    for (auto& th : pool) th.join();
  };

  Eigen::VectorXd g_x;
  double g_fit = kInf;
  std::optional<PrecoderResult> g_result;
  std::vector<IterationRecord> trace;
  std::mt19937_64 rng(derive_seed(options.seed, 0x9e3779b9ULL, 0x50ULL));

  for (int it = 0; it < options.num_iterations; ++it) {
    if (it > 0) {
      for (auto& s : swarm) {
        for (int d = 0; d < n; ++d) {
          const double r1 = unit_uniform(rng());
          const double r2 = unit_uniform(rng());
          double vd = options.inertia * s.v[d] +
                      options.cognitive * r1 * angle_diff(s.best_x[d], s.x[d]) +
                      options.social * r2 * angle_diff(g_x[d], s.x[d]);
          s.v[d] = std::clamp(vd, -kPi, kPi);
          s.x[d] = wrap_phase(s.x[d] + s.v[d]);
        }
      }
    }
    evaluate_all();

    IterationRecord rec;
    rec.iteration = it;
    rec.transmit_power_w = kInf;
    for (auto& s : swarm) {
      rec.transmit_power_w = std::min(rec.transmit_power_w, s.fit);
      if (it == 0 || s.fit < s.best_fit) {
        s.best_fit = s.fit;
        s.best_x = s.x;
      }
      if (g_x.size() == 0 || s.fit < g_fit) {
        if (s.fit < g_fit) rec.accepted = true;
        g_fit = s.fit;
        g_x = s.x;
        g_result = s.result;
      }
    }
    rec.best_transmit_power_w = g_fit;
    rec.min_slack_w = -kInf;
    if (g_result) {
      rec.min_slack_w = kInf;
      for (std::size_t k = 0; k < scenario.thresholds.size(); ++k) {
        rec.min_slack_w =
            std::min(rec.min_slack_w, g_result->received_powers_w[k] - scenario.thresholds[k]);
      }
    }
    trace.push_back(rec);
  }

  BeamformingSolution out;
  const DmaConfiguration dma = build_q_matrix(g_x, nv, nh);
  if (g_result) {
    out = evaluate_solution(scenario, dma, g_result->precoders);
    out.boost_factor = g_result->boost_factor;
  } else {
    out.dma = dma;
    out.transmit_power_w = kInf;
    out.received_powers_w.assign(scenario.channels.size(), 0.0);
    out.feasible = false;
  }
  out.iterations_used = options.num_iterations;
  out.trace = std::move(trace);
  return out;
}

}  // namespace dmawpt
