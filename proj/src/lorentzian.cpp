#include "dmawpt/lorentzian.hpp"

#include <cmath>
#include <random>

namespace dmawpt {

cplx lorentzian_weight(double phase_rad) {
  return (cplx(0.0, 1.0) + std::polar(1.0, phase_rad)) / 2.0;
}

DmaConfiguration build_q_matrix(const Eigen::VectorXd& phases, const ArrayGeometry& geometry) {
  return build_q_matrix(phases, geometry.num_waveguides, geometry.elements_per_waveguide);
}

DmaConfiguration build_q_matrix(const Eigen::VectorXd& phases, int num_waveguides,
                                int elements_per_waveguide) {
  const Eigen::Index n = static_cast<Eigen::Index>(num_waveguides) * elements_per_waveguide;
  if (phases.size() != n) {
    throw DimensionMismatch("phase vector has " + std::to_string(phases.size()) +
                            " entries, array has " + std::to_string(n));
  }
  DmaConfiguration dma;
  dma.num_waveguides = num_waveguides;
  dma.elements_per_waveguide = elements_per_waveguide;
  dma.phases = phases.unaryExpr([](double p) { return wrap_phase(p); });
  dma.weights.resize(n);
  dma.q_matrix = Eigen::MatrixXcd::Zero(n, num_waveguides);
  for (Eigen::Index e = 0; e < n; ++e) {
    const cplx q = lorentzian_weight(dma.phases[e]);
    dma.weights[e] = q;
    dma.q_matrix(e, e / elements_per_waveguide) = q;
  }
  return dma;
}

LorentzianProjection project_to_lorentzian(const Eigen::VectorXcd& unconstrained) {
  const cplx center(0.0, 0.5);
  LorentzianProjection out;
  out.phases.resize(unconstrained.size());
  out.weights.resize(unconstrained.size());
  for (Eigen::Index e = 0; e < unconstrained.size(); ++e) {
    const cplx offset = unconstrained[e] - center;
    const double phase = offset == cplx(0.0, 0.0) ? kPi / 2.0 : wrap_phase(std::arg(offset));
    out.phases[e] = phase;
    out.weights[e] = lorentzian_weight(phase);
  }
  return out;
}

Eigen::VectorXd random_phases(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Eigen::VectorXd phases(count);
  for (int e = 0; e < count; ++e) phases[e] = kTwoPi * unit_uniform(rng());
  return phases;
}

}  // namespace dmawpt
