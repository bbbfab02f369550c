#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "dmawpt/channel.hpp"
#include "dmawpt/geometry.hpp"
#include "dmawpt/lorentzian.hpp"
#include "dmawpt/microstrip.hpp"
#include "dmawpt/sdp.hpp"

namespace dmawpt {

/// Digital precoders w_1..w_M and their Gram matrix W = sum_m w_m w_m^H.
/// Energy symbols are unit-power and mutually uncorrelated, so every power
/// depends on the precoders only through W.
struct PrecoderSet {
  int num_streams = 0;
  std::vector<Eigen::VectorXcd> precoders;
  Eigen::MatrixXcd gram;

  /// Pads `factors` with zero vectors up to `num_streams` and builds the Gram.
  static PrecoderSet from_factors(std::vector<Eigen::VectorXcd> factors, int num_streams,
                                  int dimension);
  void scale(double factor);
};

/// One DMA scene: array, waveguide propagation, user channels and thresholds.
struct Scenario {
  ArrayGeometry geometry;
  PropagationMatrix propagation;
  std::vector<ChannelVector> channels;
  std::vector<double> thresholds;

  int num_users() const { return static_cast<int>(channels.size()); }
  /// M = min(N_v, K).
  int num_streams() const;
};

/// H Q, the N × N_v map from RF chains to element excitations.
Eigen::MatrixXcd effective_matrix(const PropagationMatrix& h, const DmaConfiguration& dma);

/// P_Tx = sum_m |H Q w_m|^2.
double transmit_power(const PrecoderSet& precoders, const PropagationMatrix& h,
                      const DmaConfiguration& dma);
/// Tr(W F) with F = (HQ)^H HQ.
double transmit_power_gram(const PrecoderSet& precoders, const PropagationMatrix& h,
                           const DmaConfiguration& dma);

/// P_Rx^k = sum_m |γ_k^H H Q w_m|^2.
double received_power(const ChannelVector& channel, const PropagationMatrix& h,
                      const DmaConfiguration& dma, const PrecoderSet& precoders);
/// Tr(W B_k) with b_k = (γ_k^H H Q)^H.
double received_power_gram(const ChannelVector& channel, const PropagationMatrix& h,
                           const DmaConfiguration& dma, const PrecoderSet& precoders);
/// Tr(Z̃_k Q̃) with Q̃ = q̂ q̂^H over the nonzero support of Vec(Q).
double received_power_vectorized(const ChannelVector& channel, const PropagationMatrix& h,
                                 const DmaConfiguration& dma, const PrecoderSet& precoders);

/// ẑ_{m,k} for every stream m: (w_m^T ⊗ γ_k^H H)^H restricted to the support
/// of Vec(Q), so that γ_k^H H Q w_m = ẑ_{m,k}^H q̂.
std::vector<Eigen::VectorXcd> weight_domain_vectors(const ChannelVector& channel,
                                                    const PropagationMatrix& h,
                                                    const PrecoderSet& precoders,
                                                    int num_waveguides,
                                                    int elements_per_waveguide);

struct PrecoderResult {
  PrecoderSet precoders;
  double transmit_power_w = 0.0;
  std::vector<double> received_powers_w;
  /// Uniform power boost applied after factor extraction (1 when unneeded).
  double boost_factor = 1.0;
  SdpStatus status = SdpStatus::Optimal;
  int sdp_iterations = 0;
};

/// Generic minimum-power precoder design: min Tr(W F) s.t. b_k^H W b_k ≥ δ_k,
/// W ⪰ 0, factored into at most `max_streams` precoders. The SDP is solved on
/// the subspace that can carry received power (range of F whitened, then the
/// span of the whitened b_k), which leaves the optimum unchanged.
/// Throws InfeasibleProblem when some user with δ_k > 0 is unreachable.
PrecoderResult solve_min_power_precoders(const Eigen::MatrixXcd& f,
                                         const std::vector<Eigen::VectorXcd>& b,
                                         const std::vector<double>& thresholds, int max_streams,
                                         const SdpOptions& options = {});

/// Optimal digital precoders for a fixed DMA configuration.
PrecoderResult solve_precoder_sdp(const std::vector<ChannelVector>& channels,
                                  const PropagationMatrix& h, const DmaConfiguration& dma,
                                  const std::vector<double>& thresholds,
                                  const SdpOptions& options = {});

struct WeightSdpResult {
  Eigen::VectorXcd unconstrained;  // q' = sqrt(λ_max) v_max of Q̃
  double min_power = 0.0;          // t = min_k Tr(Z̃_k Q̃)
  double trace = 0.0;              // Tr(Q̃)
  int subspace_dimension = 0;
  SdpStatus status = SdpStatus::Optimal;
  int sdp_iterations = 0;
};

/// Relaxed max-min element-weight design for fixed precoders:
/// max t s.t. t ≤ Tr(Z̃_k Q̃) ∀k, Tr(Q̃) ≤ N, Q̃ ⪰ 0.
WeightSdpResult solve_weight_sdp(const std::vector<ChannelVector>& channels,
                                 const PropagationMatrix& h, const PrecoderSet& precoders,
                                 int num_waveguides, int elements_per_waveguide,
                                 const SdpOptions& options = {});

struct AlternatingOptions {
  int stall_limit = 5;      // C
  int max_iterations = 50;  // I
  std::uint64_t seed = 1;
  int init_retries = 10;
  SdpOptions sdp;
};

struct IterationRecord {
  int iteration = 0;
  double transmit_power_w = 0.0;       // candidate of this iteration (inf if P2 failed)
  double best_transmit_power_w = 0.0;  // after the accept step
  double min_slack_w = 0.0;            // min_k (P_Rx^k - δ_k) of the candidate
  bool accepted = false;
};

struct BeamformingSolution {
  PrecoderSet precoders;
  DmaConfiguration dma;
  double transmit_power_w = 0.0;
  std::vector<double> received_powers_w;
  bool feasible = false;
  int iterations_used = 0;
  double boost_factor = 1.0;
  std::vector<IterationRecord> trace;
};

/// Received powers and feasibility recomputed from scratch for a configuration.
BeamformingSolution evaluate_solution(const Scenario& scenario, const DmaConfiguration& dma,
                                      const PrecoderSet& precoders);

/// Alternating design: random Lorentzian start, then repeat {weight SDP →
/// Lorentzian projection → precoder SDP}, keeping the best transmit power,
/// until `stall_limit` consecutive non-improving rounds or `max_iterations`.
/// Throws InfeasibleProblem if no random start yields a feasible precoder SDP.
BeamformingSolution alternating_optimize(const Scenario& scenario,
                                         const AlternatingOptions& options);

}  // namespace dmawpt
