#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dmawpt/common.hpp"

namespace dmawpt {

/// Physical scenario shared by every method: carrier, aperture, users and room.
///
/// The wavelength is always derived from `frequency_hz`. A single threshold in
/// `rf_thresholds_w` is broadcast to all users.
struct SystemConfig {
  double frequency_hz = 10.0e9;
  double antenna_length_m = 0.10;
  int num_users = 1;
  std::vector<double> rf_thresholds_w{100.0e-6};
  double boresight_gain = 2.0;
  double room_side_m = 10.0;
  double tx_height_m = 3.0;
  int realizations = 5;
  std::uint64_t rng_seed = 1;

  double wavelength_m() const { return wavelength_from_frequency(frequency_hz); }

  /// Per-user RF thresholds (length num_users).
  std::vector<double> thresholds() const;

  /// Throws ConfigError on any violated field constraint.
  void validate() const;
};

/// Planar N_v × N_h DMA on the ceiling plane z = tx_height, centered on the
/// z axis. Elements run along x inside a waveguide; waveguides are stacked
/// along y. Element (i, l) (0-based) lives at flat index i * N_h + l.
struct ArrayGeometry {
  int num_waveguides = 0;
  int elements_per_waveguide = 0;
  int total_elements = 0;
  std::vector<Vec3> element_positions;
  double element_spacing_m = 0.0;
  double waveguide_spacing_m = 0.0;
  double length_m = 0.0;
  double diameter_m = 0.0;
  Vec3 center = Vec3::Zero();

  int index(int waveguide, int element) const {
    return waveguide * elements_per_waveguide + element;
  }
};

struct FieldRegion {
  double fresnel_m = 0.0;
  double fraunhofer_m = 0.0;

  bool contains(double distance_m) const {
    return distance_m > fresnel_m && distance_m < fraunhofer_m;
  }
};

ArrayGeometry build_array_geometry(const SystemConfig& config);

/// Same construction with explicit parameters. Throws ZeroArray when either
/// floor count is zero.
ArrayGeometry build_array_geometry(double length_m, double wavelength_m, double tx_height_m);

FieldRegion field_region_bounds(const ArrayGeometry& geometry, double wavelength_m);
FieldRegion field_region_bounds(double diameter_m, double wavelength_m);

/// K users uniform on the floor square [-s/2, s/2]^2 at z = 0. Deterministic in
/// (config.rng_seed, realization_index).
std::vector<Vec3> sample_user_positions(const SystemConfig& config, int realization_index);

/// Human-readable notes for users whose distance to the array center falls
/// outside (d_fs, d_fr). Advisory only.
std::vector<std::string> near_field_warnings(const ArrayGeometry& geometry, double wavelength_m,
                                             const std::vector<Vec3>& users);

}  // namespace dmawpt
