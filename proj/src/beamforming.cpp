#include "dmawpt/beamforming.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace dmawpt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_dims(const PropagationMatrix& h, const DmaConfiguration& dma) {
  if (h.size() != dma.q_matrix.rows()) {
    throw DimensionMismatch("propagation matrix and Q disagree on the element count");
  }
}

void check_precoders(const PrecoderSet& p, const DmaConfiguration& dma) {
  for (const auto& w : p.precoders) {
    if (w.size() != dma.q_matrix.cols()) {
      throw DimensionMismatch("precoder length must equal the number of waveguides");
    }
  }
}

void check_channel(const ChannelVector& c, const PropagationMatrix& h) {
  if (c.coefficients.size() != h.size()) {
    throw DimensionMismatch("channel length must equal the number of elements");
  }
}

// Orthonormal basis of the column span of `vectors` (columns), dropping
// directions below rel_tol of the largest singular value.
Eigen::MatrixXcd span_basis(const Eigen::MatrixXcd& vectors, double rel_tol = 1e-12) {
  if (vectors.cols() == 0 || vectors.rows() == 0) return Eigen::MatrixXcd(vectors.rows(), 0);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(vectors, Eigen::ComputeThinU);
  const Eigen::VectorXd& s = svd.singularValues();
  if (!(s.size() > 0 && s[0] > 0.0)) return Eigen::MatrixXcd(vectors.rows(), 0);
  Eigen::Index rank = 0;
  while (rank < s.size() && s[rank] > rel_tol * s[0]) ++rank;
  return svd.matrixU().leftCols(rank);
}

}  // namespace

// ---------------------------------------------------------------------------

PrecoderSet PrecoderSet::from_factors(std::vector<Eigen::VectorXcd> factors, int num_streams,
                                      int dimension) {
  PrecoderSet set;
  set.num_streams = num_streams;
  set.precoders = std::move(factors);
  if (static_cast<int>(set.precoders.size()) > num_streams) set.precoders.resize(num_streams);
  while (static_cast<int>(set.precoders.size()) < num_streams) {
    set.precoders.push_back(Eigen::VectorXcd::Zero(dimension));
  }
  set.gram = Eigen::MatrixXcd::Zero(dimension, dimension);
  for (const auto& w : set.precoders) set.gram.noalias() += w * w.adjoint();
  return set;
}

void PrecoderSet::scale(double factor) {
  for (auto& w : precoders) w *= factor;
  gram *= factor * factor;
}

int Scenario::num_streams() const {
  return std::min(geometry.num_waveguides, num_users());
}

Eigen::MatrixXcd effective_matrix(const PropagationMatrix& h, const DmaConfiguration& dma) {
  check_dims(h, dma);
  return h.entries.asDiagonal() * dma.q_matrix;
}

double transmit_power(const PrecoderSet& precoders, const PropagationMatrix& h,
                      const DmaConfiguration& dma) {
  check_precoders(precoders, dma);
  const Eigen::MatrixXcd g = effective_matrix(h, dma);
  double total = 0.0;
  for (const auto& w : precoders.precoders) total += (g * w).squaredNorm();
  return total;
}

double transmit_power_gram(const PrecoderSet& precoders, const PropagationMatrix& h,
                           const DmaConfiguration& dma) {
  check_precoders(precoders, dma);
  const Eigen::MatrixXcd g = effective_matrix(h, dma);
  const Eigen::MatrixXcd f = g.adjoint() * g;
  return (precoders.gram * f).trace().real();
}

double received_power(const ChannelVector& channel, const PropagationMatrix& h,
                      const DmaConfiguration& dma, const PrecoderSet& precoders) {
  check_channel(channel, h);
  check_precoders(precoders, dma);
  const Eigen::RowVectorXcd row = channel.coefficients.adjoint() * effective_matrix(h, dma);
  double total = 0.0;
  for (const auto& w : precoders.precoders) total += std::norm((row * w)(0));
  return total;
}

double received_power_gram(const ChannelVector& channel, const PropagationMatrix& h,
                           const DmaConfiguration& dma, const PrecoderSet& precoders) {
  check_channel(channel, h);
  check_precoders(precoders, dma);
  const Eigen::VectorXcd b = effective_matrix(h, dma).adjoint() * channel.coefficients;
  const Eigen::MatrixXcd bk = b * b.adjoint();
  return (precoders.gram * bk).trace().real();
}

std::vector<Eigen::VectorXcd> weight_domain_vectors(const ChannelVector& channel,
                                                    const PropagationMatrix& h,
                                                    const PrecoderSet& precoders,
                                                    int num_waveguides,
                                                    int elements_per_waveguide) {
  check_channel(channel, h);
  const Eigen::Index n = static_cast<Eigen::Index>(num_waveguides) * elements_per_waveguide;
  // (γ^H H)^H = conj(H) γ, elementwise since H is diagonal.
  const Eigen::VectorXcd g = h.entries.conjugate().cwiseProduct(channel.coefficients);
  std::vector<Eigen::VectorXcd> out;
  out.reserve(precoders.precoders.size());
  for (const auto& w : precoders.precoders) {
    if (w.size() != num_waveguides) {
      throw DimensionMismatch("precoder length must equal the number of waveguides");
    }
    Eigen::VectorXcd z(n);
    for (Eigen::Index e = 0; e < n; ++e) z[e] = std::conj(w[e / elements_per_waveguide]) * g[e];
    out.push_back(std::move(z));
  }
  return out;
}

double received_power_vectorized(const ChannelVector& channel, const PropagationMatrix& h,
                                 const DmaConfiguration& dma, const PrecoderSet& precoders) {
  check_dims(h, dma);
  const auto zs = weight_domain_vectors(channel, h, precoders, dma.num_waveguides,
                                        dma.elements_per_waveguide);
  const Eigen::Index n = dma.weights.size();
  Eigen::MatrixXcd z_tilde = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& z : zs) z_tilde.noalias() += z * z.adjoint();
  const Eigen::MatrixXcd q_tilde = dma.weights * dma.weights.adjoint();
  return (z_tilde * q_tilde).trace().real();
}

// ---------------------------------------------------------------------------
// Precoder design

PrecoderResult solve_min_power_precoders(const Eigen::MatrixXcd& f,
                                         const std::vector<Eigen::VectorXcd>& b,
                                         const std::vector<double>& thresholds, int max_streams,
                                         const SdpOptions& options) {
  const Eigen::Index n = f.rows();
  if (f.cols() != n) throw DimensionMismatch("F must be square");
  if (b.size() != thresholds.size()) {
    throw DimensionMismatch("one threshold per user is required");
  }
  if (b.empty()) throw DimensionMismatch("at least one user is required");
  for (const auto& bk : b) {
    if (bk.size() != n) throw DimensionMismatch("b_k length must match F");
  }
  const int k_users = static_cast<int>(b.size());

  PrecoderResult result;
  auto finish = [&](PrecoderSet set) {
    result.received_powers_w.assign(b.size(), 0.0);
    for (int k = 0; k < k_users; ++k) {
      double p = 0.0;
      for (const auto& w : set.precoders) p += std::norm(b[k].dot(w));
      result.received_powers_w[k] = p;
    }
    double boost = 1.0;
    for (int k = 0; k < k_users; ++k) {
      if (thresholds[k] <= 0.0) continue;
      if (!(result.received_powers_w[k] > 0.0)) {
        throw InfeasibleProblem("user " + std::to_string(k) + " receives no power");
      }
      boost = std::max(boost, thresholds[k] / result.received_powers_w[k]);
    }
    if (boost > 1.0) {
      set.scale(std::sqrt(boost));
      for (auto& p : result.received_powers_w) p *= boost;
    }
    result.boost_factor = boost;
    double ptx = 0.0;
    for (const auto& w : set.precoders) ptx += w.dot(f * w).real();
    result.transmit_power_w = std::max(ptx, 0.0);
    result.precoders = std::move(set);
    return result;
  };

  if (std::all_of(thresholds.begin(), thresholds.end(), [](double d) { return d <= 0.0; })) {
    return finish(PrecoderSet::from_factors({}, max_streams, static_cast<int>(n)));
  }

  // Whiten on range(F): W = T V T^H with T = U_r Λ_r^{-1/2} gives Tr(W F) = Tr(V).
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (f + f.adjoint()));
  if (es.info() != Eigen::Success) throw EigenFailure("eigendecomposition of F failed");
  const Eigen::VectorXd& lam = es.eigenvalues();
  const double lam_max = lam.size() > 0 ? lam[lam.size() - 1] : 0.0;
  if (!(lam_max > 0.0)) throw InfeasibleProblem("F is zero: no element radiates");
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (lam[i] > 1e-12 * lam_max) keep.push_back(i);
  }
  Eigen::MatrixXcd t(n, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) {
    t.col(static_cast<Eigen::Index>(j)) = es.eigenvectors().col(keep[j]) / std::sqrt(lam[keep[j]]);
  }
  Eigen::MatrixXcd c(t.cols(), k_users);
  for (int k = 0; k < k_users; ++k) c.col(k) = t.adjoint() * b[k];

  // Only span{c_k} carries received power.
  const Eigen::MatrixXcd p = span_basis(c);
  for (int k = 0; k < k_users; ++k) {
    if (thresholds[k] > 0.0 && !(c.col(k).norm() > 0.0)) {
      throw InfeasibleProblem("user " + std::to_string(k) + " is orthogonal to the reachable subspace");
    }
  }
  const int s = static_cast<int>(p.cols());
  SdpProblem prob;
  prob.dimension = s;
  prob.cost = HermitianMatrix::identity(s);
  for (int k = 0; k < k_users; ++k) {
    const Eigen::VectorXcd dk = p.adjoint() * c.col(k);
    prob.constraints.push_back(
        {HermitianMatrix::outer(dk), thresholds[k], ConstraintSense::GreaterEqual});
  }
  const SdpSolution sol = solve_sdp(prob, options);
  result.status = sol.status;
  result.sdp_iterations = sol.iterations;
  if (sol.status == SdpStatus::Infeasible || sol.status == SdpStatus::Unbounded) {
    throw InfeasibleProblem(std::string("precoder SDP reported ") + to_string(sol.status));
  }
  const Eigen::MatrixXcd tp = t * p;
  const Eigen::MatrixXcd w = tp * sol.matrix.entries() * tp.adjoint();
  auto factors = extract_rank_factors(w, max_streams, 1e-9);
  return finish(PrecoderSet::from_factors(std::move(factors), max_streams, static_cast<int>(n)));
}

PrecoderResult solve_precoder_sdp(const std::vector<ChannelVector>& channels,
                                  const PropagationMatrix& h, const DmaConfiguration& dma,
                                  const std::vector<double>& thresholds,
                                  const SdpOptions& options) {
  if (channels.empty()) throw DimensionMismatch("at least one user is required");
  const Eigen::MatrixXcd g = effective_matrix(h, dma);
  std::vector<Eigen::VectorXcd> b;
  b.reserve(channels.size());
  for (const auto& ch : channels) {
    check_channel(ch, h);
    b.push_back(g.adjoint() * ch.coefficients);
  }
  const int streams = std::min(dma.num_waveguides, static_cast<int>(channels.size()));
  return solve_min_power_precoders(g.adjoint() * g, b, thresholds, streams, options);
}

// ---------------------------------------------------------------------------
// Element-weight relaxation

WeightSdpResult solve_weight_sdp(const std::vector<ChannelVector>& channels,
                                 const PropagationMatrix& h, const PrecoderSet& precoders,
                                 int num_waveguides, int elements_per_waveguide,
                                 const SdpOptions& options) {
  const Eigen::Index n = static_cast<Eigen::Index>(num_waveguides) * elements_per_waveguide;
  const int k_users = static_cast<int>(channels.size());
  if (k_users == 0) throw DimensionMismatch("at least one user is required");

  std::vector<std::vector<Eigen::VectorXcd>> z(channels.size());
  std::size_t total = 0;
  for (int k = 0; k < k_users; ++k) {
    z[k] = weight_domain_vectors(channels[k], h, precoders, num_waveguides,
                                 elements_per_waveguide);
    total += z[k].size();
  }
  Eigen::MatrixXcd stacked(n, static_cast<Eigen::Index>(total));
  Eigen::Index col = 0;
  for (const auto& zk : z)
    for (const auto& v : zk) stacked.col(col++) = v;

  // Components of Q̃ orthogonal to every ẑ add trace without adding power,
  // so the optimum lives on their span.
  const Eigen::MatrixXcd u = span_basis(stacked);
  const int r = static_cast<int>(u.cols());

  WeightSdpResult result;
  result.subspace_dimension = r;
  if (r == 0) {
    // Every Z̃_k vanishes: t = 0 for any Q̃. Take Q̃ = I and its first
    // eigen-direction.
    result.unconstrained = Eigen::VectorXcd::Unit(n, 0);
    result.min_power = 0.0;
    result.trace = static_cast<double>(n);
    return result;
  }

  std::vector<Eigen::MatrixXcd> zr(channels.size(), Eigen::MatrixXcd::Zero(r, r));
  double scale = 0.0;
  for (int k = 0; k < k_users; ++k) {
    for (const auto& v : z[k]) {
      const Eigen::VectorXcd y = u.adjoint() * v;
      zr[k].noalias() += y * y.adjoint();
    }
    scale = std::max(scale, zr[k].trace().real());
  }

  // Variable [[Q̃_r, *], [*, t]] ⪰ 0; minimize -t.
  SdpProblem prob;
  prob.dimension = r + 1;
  Eigen::MatrixXcd cost = Eigen::MatrixXcd::Zero(r + 1, r + 1);
  cost(r, r) = -1.0;
  prob.cost = HermitianMatrix(cost);
  for (int k = 0; k < k_users; ++k) {
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(r + 1, r + 1);
    a.topLeftCorner(r, r) = zr[k] / scale;
    a(r, r) = -1.0;
    prob.constraints.push_back({HermitianMatrix(a), 0.0, ConstraintSense::GreaterEqual});
  }
  Eigen::MatrixXcd cap = Eigen::MatrixXcd::Zero(r + 1, r + 1);
  cap.topLeftCorner(r, r).setIdentity();
  prob.constraints.push_back(
      {HermitianMatrix(cap), static_cast<double>(n), ConstraintSense::LessEqual});

  const SdpSolution sol = solve_sdp(prob, options);
  result.status = sol.status;
  result.sdp_iterations = sol.iterations;
  if (sol.status == SdpStatus::Infeasible || sol.status == SdpStatus::Unbounded) {
    result.unconstrained = Eigen::VectorXcd::Zero(n);
    return result;
  }

  const Eigen::MatrixXcd xq = sol.matrix.entries().topLeftCorner(r, r);
  result.trace = xq.trace().real();
  double t = kInf;
  for (int k = 0; k < k_users; ++k) t = std::min(t, (zr[k] * xq).trace().real());
  result.min_power = t;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(xq);
  const double top = std::max(es.eigenvalues()[r - 1], 0.0);
  result.unconstrained = u * es.eigenvectors().col(r - 1) * std::sqrt(top);
  normalize_phase(result.unconstrained);
  return result;
}

// ---------------------------------------------------------------------------
// Alternating optimization

BeamformingSolution evaluate_solution(const Scenario& scenario, const DmaConfiguration& dma,
                                      const PrecoderSet& precoders) {
  BeamformingSolution s;
  s.dma = dma;
  s.precoders = precoders;
  s.transmit_power_w = transmit_power(precoders, scenario.propagation, dma);
  s.feasible = true;
  for (std::size_t k = 0; k < scenario.channels.size(); ++k) {
    const double p = received_power(scenario.channels[k], scenario.propagation, dma, precoders);
    s.received_powers_w.push_back(p);
    if (p < scenario.thresholds[k] * (1.0 - 1e-6)) s.feasible = false;
  }
  return s;
}

namespace {

void validate_scenario(const Scenario& sc) {
  if (sc.channels.empty()) throw DimensionMismatch("scenario has no users");
  if (sc.thresholds.size() != sc.channels.size()) {
    throw DimensionMismatch("one threshold per user is required");
  }
  if (sc.propagation.size() != sc.geometry.total_elements) {
    throw DimensionMismatch("propagation matrix does not match the array");
  }
  for (const auto& ch : sc.channels) check_channel(ch, sc.propagation);
}

double min_slack(const std::vector<double>& rx, const std::vector<double>& thresholds) {
  double slack = kInf;
  for (std::size_t k = 0; k < rx.size(); ++k) slack = std::min(slack, rx[k] - thresholds[k]);
  return slack;
}

}  // namespace

BeamformingSolution alternating_optimize(const Scenario& scenario,
                                         const AlternatingOptions& options) {
  validate_scenario(scenario);
  const int nv = scenario.geometry.num_waveguides;
  const int nh = scenario.geometry.elements_per_waveguide;
  const int n = scenario.geometry.total_elements;

  auto solve_p2 = [&](const DmaConfiguration& dma) -> std::optional<PrecoderResult> {
    try {
      return solve_precoder_sdp(scenario.channels, scenario.propagation, dma,
                                scenario.thresholds, options.sdp);
    } catch (const InfeasibleProblem&) {
      return std::nullopt;
    }
  };

  DmaConfiguration best_dma;
  std::optional<PrecoderResult> best;
  for (int attempt = 0; attempt <= options.init_retries && !best; ++attempt) {
    const std::uint64_t seed =
        attempt == 0 ? options.seed : derive_seed(options.seed, static_cast<std::uint64_t>(attempt));
    best_dma = build_q_matrix(random_phases(n, seed), nv, nh);
    best = solve_p2(best_dma);
  }
  if (!best) {
    throw InfeasibleProblem("no random Lorentzian start admits a feasible precoder design");
  }

  std::vector<IterationRecord> trace;
  trace.push_back({0, best->transmit_power_w, best->transmit_power_w,
                   min_slack(best->received_powers_w, scenario.thresholds), true});

  PrecoderSet current = best->precoders;
  int iteration = 1;
  int stall = 0;
  while (stall < options.stall_limit && iteration < options.max_iterations) {
    IterationRecord rec;
    rec.iteration = iteration;
    rec.transmit_power_w = kInf;
    rec.min_slack_w = -kInf;

    std::optional<PrecoderResult> candidate;
    DmaConfiguration dma;
    const WeightSdpResult relaxed =
        solve_weight_sdp(scenario.channels, scenario.propagation, current, nv, nh, options.sdp);
    if (relaxed.status == SdpStatus::Optimal || relaxed.status == SdpStatus::MaxIterations) {
      const LorentzianProjection proj = project_to_lorentzian(relaxed.unconstrained);
      dma = build_q_matrix(proj.phases, nv, nh);
      candidate = solve_p2(dma);
    }
    ++stall;
    ++iteration;
    if (candidate) {
      rec.transmit_power_w = candidate->transmit_power_w;
      rec.min_slack_w = min_slack(candidate->received_powers_w, scenario.thresholds);
      if (candidate->transmit_power_w < best->transmit_power_w) {
        best = candidate;
        best_dma = dma;
        stall = 0;
        rec.accepted = true;
      }
      current = candidate->precoders;
    }
    rec.best_transmit_power_w = best->transmit_power_w;
    trace.push_back(rec);
  }

  BeamformingSolution out = evaluate_solution(scenario, best_dma, best->precoders);
  out.iterations_used = iteration - 1;
  out.boost_factor = best->boost_factor;
  out.trace = std::move(trace);
  return out;
}

}  // namespace dmawpt
