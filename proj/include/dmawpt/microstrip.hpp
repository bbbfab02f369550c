#pragma once

#include <string>

#include <Eigen/Core>

#include "dmawpt/common.hpp"
#include "dmawpt/geometry.hpp"

namespace dmawpt {

struct MaterialSpec {
  std::string name;
  double dielectric_constant = 1.0;   // ε_r
  double loss_tangent = 0.0;          // ϱ
  double substrate_thickness_m = 0.0; // ζ
  double conductor_width_m = 0.0;     // υ
  double conductivity_s_per_m = 5.8e7;
  std::string measured_at;            // frequency tag of the tabulated ε_r

  /// Throws ConfigError unless ε_r > 1 and every geometric field is positive.
  void validate() const;
};

/// Quasi-static microstrip state at one frequency. α terms are in Np/m.
struct MicrostripModel {
  MaterialSpec material;
  double frequency_hz = 0.0;
  double static_eff_dielectric = 1.0;  // ε'_e
  double eff_dielectric = 1.0;         // ε_e^f
  double static_impedance_ohm = 0.0;   // Z_0 at ε'_e, used inside the dispersion law
  double char_impedance_ohm = 0.0;     // Z_0 at ε_e^f
  double beta_rad_per_m = 0.0;
  double alpha_np_per_m = 0.0;
  double alpha_dielectric = 0.0;
  double alpha_conductor = 0.0;
  double surface_resistivity_ohm = 0.0;

  double alpha_db_per_m() const { return alpha_np_per_m * kNeperToDb; }
};

/// Diagonal of the N × N intra-waveguide propagation matrix H.
struct PropagationMatrix {
  Eigen::VectorXcd entries;
  double inter_element_spacing_m = 0.0;

  Eigen::Index size() const { return entries.size(); }
  Eigen::MatrixXcd dense() const { return entries.asDiagonal(); }
};

double static_eff_dielectric(const MaterialSpec& material);

/// Getsinger dispersion law with f in GHz, ζ in cm and Z_0 in ohms.
double dispersive_eff_dielectric(const MaterialSpec& material, double frequency_hz, double z0_ohm);

/// Narrow-strip branch (υ ≤ ζ).
double characteristic_impedance_narrow(const MaterialSpec& material, double eff_dielectric);
/// Wide-strip branch (υ ≥ ζ).
double characteristic_impedance_wide(const MaterialSpec& material, double eff_dielectric);
double characteristic_impedance(const MaterialSpec& material, double eff_dielectric);

double surface_resistivity(double frequency_hz, double conductivity_s_per_m);

MicrostripModel attenuation_and_beta(const MaterialSpec& material, double frequency_hz);

PropagationMatrix propagation_matrix(const MicrostripModel& model, const ArrayGeometry& geometry);

/// h_{i,l} = exp(-(l-1) d_l (α + jβ)), identical for every waveguide.
PropagationMatrix propagation_matrix(double alpha_np_per_m, double beta_rad_per_m,
                                     double element_spacing_m, int num_waveguides,
                                     int elements_per_waveguide);

}  // namespace dmawpt
