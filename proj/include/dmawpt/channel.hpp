#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "dmawpt/common.hpp"
#include "dmawpt/geometry.hpp"

namespace dmawpt {

struct ChannelVector {
  int user_index = 0;
  Eigen::VectorXcd coefficients;  // one entry per element, flat (i, l) order
  Vec3 user_position = Vec3::Zero();
};

/// Element pattern G_t cos(θ)^(G_t/2 - 1) with G_t = 2(b + 1); zero outside [0, π/2].
double element_radiation_gain(double elevation_rad, double boresight_gain);

/// Near-field coefficient sqrt(F(θ)) λ/(4πd) e^{-j2πd/λ}. θ is measured from
/// the array's downward normal (-z). Throws DegenerateGeometry when d = 0.
cplx channel_coefficient(const Vec3& element_pos, const Vec3& user_pos, double wavelength_m,
                         double boresight_gain);

ChannelVector channel_vector(std::span<const Vec3> element_positions, const Vec3& user_pos,
                             double wavelength_m, double boresight_gain, int user_index = 0);

ChannelVector channel_vector(const ArrayGeometry& geometry, const Vec3& user_pos,
                             double wavelength_m, double boresight_gain, int user_index = 0);

std::vector<ChannelVector> channel_set(std::span<const Vec3> element_positions,
                                       const std::vector<Vec3>& users, double wavelength_m,
                                       double boresight_gain);

}  // namespace dmawpt
