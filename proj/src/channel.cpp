#include "dmawpt/channel.hpp"

#include <algorithm>
#include <cmath>

namespace dmawpt {

namespace {

double gain_from_cosine(double cos_elevation, double boresight_gain) {
  if (cos_elevation < 0.0) return 0.0;
  const double gt = 2.0 * (boresight_gain + 1.0);
  return gt * std::pow(std::min(cos_elevation, 1.0), gt / 2.0 - 1.0);
}

}  // namespace

double element_radiation_gain(double elevation_rad, double boresight_gain) {
  if (elevation_rad < 0.0 || elevation_rad > kPi / 2.0) return 0.0;
  // cos(π/2) is ~6e-17 in floating point; pin the edge to exact zero.
  const double c = elevation_rad == kPi / 2.0 ? 0.0 : std::cos(elevation_rad);
  return gain_from_cosine(c, boresight_gain);
}

cplx channel_coefficient(const Vec3& element_pos, const Vec3& user_pos, double wavelength_m,
                         double boresight_gain) {
  const Vec3 ray = user_pos - element_pos;
  const double d = ray.norm();
  if (!(d > 0.0)) {
    throw DegenerateGeometry("user coincides with an array element");
  }
  // Boresight is -z (ceiling toward floor).
  const double cos_elevation = -ray.z() / d;
  const double pattern = gain_from_cosine(cos_elevation, boresight_gain);
  if (pattern == 0.0) return {0.0, 0.0};
  const double amplitude = std::sqrt(pattern) * wavelength_m / (4.0 * kPi * d);
  // Reduce the distance modulo λ before forming the phase to keep precision
  // at large d/λ.
  const double phase = -kTwoPi * std::fmod(d, wavelength_m) / wavelength_m;
  return std::polar(amplitude, phase);
}

ChannelVector channel_vector(std::span<const Vec3> element_positions, const Vec3& user_pos,
                             double wavelength_m, double boresight_gain, int user_index) {
  ChannelVector cv;
  cv.user_index = user_index;
  cv.user_position = user_pos;
  cv.coefficients.resize(static_cast<Eigen::Index>(element_positions.size()));
  for (std::size_t e = 0; e < element_positions.size(); ++e) {
    cv.coefficients[static_cast<Eigen::Index>(e)] =
        channel_coefficient(element_positions[e], user_pos, wavelength_m, boresight_gain);
  }
  return cv;
}

ChannelVector channel_vector(const ArrayGeometry& geometry, const Vec3& user_pos,
                             double wavelength_m, double boresight_gain, int user_index) {
  return channel_vector(std::span<const Vec3>(geometry.element_positions), user_pos, wavelength_m,
                        boresight_gain, user_index);
}

std::vector<ChannelVector> channel_set(std::span<const Vec3> element_positions,
                                       const std::vector<Vec3>& users, double wavelength_m,
                                       double boresight_gain) {
  std::vector<ChannelVector> out;
  out.reserve(users.size());
  for (std::size_t k = 0; k < users.size(); ++k) {
    out.push_back(channel_vector(element_positions, users[k], wavelength_m, boresight_gain,
                                 static_cast<int>(k)));
  }
  return out;
}

}  // namespace dmawpt
