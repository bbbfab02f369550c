#include "dmawpt/microstrip.hpp"

#include <cmath>

namespace dmawpt {

void MaterialSpec::validate() const {
  auto fail = [this](const std::string& what) {
    throw ConfigError("material '" + name + "': " + what);
  };
  if (!(dielectric_constant > 1.0)) fail("dielectric constant must exceed 1");
  if (!(loss_tangent >= 0.0)) fail("loss tangent must be nonnegative");
  if (!(substrate_thickness_m > 0.0)) fail("substrate thickness must be positive");
  if (!(conductor_width_m > 0.0)) fail("conductor width must be positive");
  if (!(conductivity_s_per_m > 0.0)) fail("conductivity must be positive");
}

double static_eff_dielectric(const MaterialSpec& m) {
  const double er = m.dielectric_constant;
  return (er + 1.0) / 2.0 +
         (er - 1.0) / (2.0 * std::sqrt(1.0 + 12.0 * m.substrate_thickness_m / m.conductor_width_m));
}

double dispersive_eff_dielectric(const MaterialSpec& m, double frequency_hz, double z0_ohm) {
  const double er = m.dielectric_constant;
  const double e_static = static_eff_dielectric(m);
  const double f_ghz = frequency_hz * 1e-9;
  const double h_cm = m.substrate_thickness_m * 1e2;
  const double fp = z0_ohm / (8.0 * kPi * h_cm);
  const double g = (0.6 + 0.009 * z0_ohm) * f_ghz * f_ghz / (fp * fp);
  return er - (er - e_static) / (1.0 + g);
}

double characteristic_impedance_narrow(const MaterialSpec& m, double eff_dielectric) {
  const double r = m.substrate_thickness_m / m.conductor_width_m;  // ζ/υ
  return 60.0 * std::log(8.0 * r + 1.0 / (4.0 * r)) / std::sqrt(eff_dielectric);
}

double characteristic_impedance_wide(const MaterialSpec& m, double eff_dielectric) {
  const double w = m.conductor_width_m / m.substrate_thickness_m;  // υ/ζ
  return (120.0 * kPi / std::sqrt(eff_dielectric)) /
         (w + 1.393 + 0.667 * std::log(w + 1.444));
}

double characteristic_impedance(const MaterialSpec& m, double eff_dielectric) {
  if (m.conductor_width_m <= m.substrate_thickness_m) {
    return characteristic_impedance_narrow(m, eff_dielectric);
  }
  return characteristic_impedance_wide(m, eff_dielectric);
}

double surface_resistivity(double frequency_hz, double conductivity_s_per_m) {
  return std::sqrt(2.0 * kPi * frequency_hz * kMu0 / (2.0 * conductivity_s_per_m));
}

MicrostripModel attenuation_and_beta(const MaterialSpec& material, double frequency_hz) {
  material.validate();
  if (!(frequency_hz > 0.0)) throw ConfigError("frequency must be positive");

  MicrostripModel m;
  m.material = material;
  m.frequency_hz = frequency_hz;
  m.static_eff_dielectric = static_eff_dielectric(material);
  // Z_0 is fixed from the static constant and reused inside the dispersion law.
  m.static_impedance_ohm = characteristic_impedance(material, m.static_eff_dielectric);
  m.eff_dielectric = dispersive_eff_dielectric(material, frequency_hz, m.static_impedance_ohm);
  m.char_impedance_ohm = characteristic_impedance(material, m.eff_dielectric);

  const double lambda = wavelength_from_frequency(frequency_hz);
  const double er = material.dielectric_constant;
  const double sq = std::sqrt(m.eff_dielectric);
  m.beta_rad_per_m = kTwoPi / lambda * sq;
  m.alpha_dielectric = kPi * er * (m.eff_dielectric - 1.0) * material.loss_tangent /
                       (lambda * sq * (er - 1.0));
  m.surface_resistivity_ohm = surface_resistivity(frequency_hz, material.conductivity_s_per_m);
  m.alpha_conductor =
      m.surface_resistivity_ohm / (m.char_impedance_ohm * material.conductor_width_m);
  m.alpha_np_per_m = m.alpha_dielectric + m.alpha_conductor;
  return m;
}

PropagationMatrix propagation_matrix(const MicrostripModel& model, const ArrayGeometry& geometry) {
  return propagation_matrix(model.alpha_np_per_m, model.beta_rad_per_m, geometry.element_spacing_m,
                            geometry.num_waveguides, geometry.elements_per_waveguide);
}

PropagationMatrix propagation_matrix(double alpha_np_per_m, double beta_rad_per_m,
                                     double element_spacing_m, int num_waveguides,
                                     int elements_per_waveguide) {
  PropagationMatrix h;
  h.inter_element_spacing_m = element_spacing_m;
  h.entries.resize(static_cast<Eigen::Index>(num_waveguides) * elements_per_waveguide);
  for (int l = 0; l < elements_per_waveguide; ++l) {
    const double run = l * element_spacing_m;
    const cplx value = l == 0 ? cplx(1.0, 0.0)
                              : std::exp(-run * cplx(alpha_np_per_m, beta_rad_per_m));
    for (int i = 0; i < num_waveguides; ++i) {
      h.entries[static_cast<Eigen::Index>(i) * elements_per_waveguide + l] = value;
    }
  }
  return h;
}

}  // namespace dmawpt
