#pragma once

#include <Eigen/Core>

#include "dmawpt/common.hpp"
#include "dmawpt/geometry.hpp"

namespace dmawpt {

/// Element phases, their Lorentzian weights and the N × N_v block-sparse Q.
/// Column i of Q carries the weights of waveguide i and is zero elsewhere.
struct DmaConfiguration {
  int num_waveguides = 0;
  int elements_per_waveguide = 0;
  Eigen::VectorXd phases;    // [0, 2π)
  Eigen::VectorXcd weights;  // (j + e^{jφ})/2, flat (i, l) order
  Eigen::MatrixXcd q_matrix;

  int total_elements() const { return num_waveguides * elements_per_waveguide; }
};

/// q = (j + e^{jφ})/2.
cplx lorentzian_weight(double phase_rad);

DmaConfiguration build_q_matrix(const Eigen::VectorXd& phases, const ArrayGeometry& geometry);
DmaConfiguration build_q_matrix(const Eigen::VectorXd& phases, int num_waveguides,
                                int elements_per_waveguide);

struct LorentzianProjection {
  Eigen::VectorXd phases;
  Eigen::VectorXcd weights;
};

/// Nearest point on the circle |q - j/2| = 1/2 for each entry, in closed form:
/// φ* = arg(q' - j/2). The circle center maps to φ* = π/2.
LorentzianProjection project_to_lorentzian(const Eigen::VectorXcd& unconstrained);

/// Uniform phases in [0, 2π) drawn from a seeded stream.
Eigen::VectorXd random_phases(int count, std::uint64_t seed);

}  // namespace dmawpt
