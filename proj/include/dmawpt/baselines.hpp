#pragma once

#include <cstdint>
#include <vector>

#include "dmawpt/beamforming.hpp"
#include "dmawpt/channel.hpp"
#include "dmawpt/common.hpp"

namespace dmawpt {

/// Uniform square array with λ/2 spacing and one RF chain per element,
/// side ⌊L/(λ/2)⌋, centered at (0, 0, height).
struct FdGeometry {
  std::vector<Vec3> positions;
  int side_count = 0;
  int num_elements = 0;
  double spacing_m = 0.0;
};

/// Throws ZeroArray when L < λ/2.
FdGeometry build_fd_geometry(double length_m, double wavelength_m, double tx_height_m);

/// Minimum-power fully-digital precoders (F = I, b_k = γ_k).
/// Throws InfeasibleProblem when some user with δ_k > 0 has a zero channel.
PrecoderResult solve_fd(const std::vector<ChannelVector>& channels,
                        const std::vector<double>& thresholds, const SdpOptions& options = {});

/// Σ_k δ_k / ‖γ_k‖², the power of serving every user with its own MRT beam
/// and ignoring cross-user power. Every term is achieved by that scheme, so
/// the value never falls below the FD optimum; it equals it for a single user
/// and for mutually orthogonal channels. +inf if a user with δ_k > 0 has a
/// zero channel.
double mrt_lower_bound(const std::vector<ChannelVector>& channels,
                       const std::vector<double>& thresholds);

struct PsoOptions {
  int num_particles = 100;
  int num_iterations = 1000;  // including the initial evaluation
  double inertia = 0.729;
  double cognitive = 1.49445;
  double social = 1.49445;
  std::uint64_t seed = 1;
  int threads = 1;
  SdpOptions sdp;

  void validate() const;
};

/// Particle swarm over the N element phases. Each particle is scored by the
/// optimal precoder SDP at its Q (+inf when that SDP is infeasible). Particle
/// 0 starts from random_phases(N, seed), the same start alternating_optimize
/// uses. The trace holds one record per iteration with the global best.
/// If no particle is ever feasible, the result has feasible = false and
/// transmit_power_w = +inf.
BeamformingSolution pso_optimize(const Scenario& scenario, const PsoOptions& options);

}  // namespace dmawpt
