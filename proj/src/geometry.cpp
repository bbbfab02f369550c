#include "dmawpt/geometry.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace dmawpt {

double wrap_phase(double phase_rad) {
  double wrapped = std::fmod(phase_rad, kTwoPi);
  if (wrapped < 0.0) wrapped += kTwoPi;
  if (wrapped >= kTwoPi) wrapped = 0.0;
  return wrapped;
}

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Floor with a relative guard so that L = k * spacing computed in floating
// point still yields k.
int guarded_floor(double ratio) {
  return static_cast<int>(std::floor(ratio * (1.0 + 1e-12)));
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  std::uint64_t h = splitmix(base);
  h = splitmix(h ^ (a + 0x632be59bd9b4e019ULL));
  h = splitmix(h ^ (b + 0x85157af5ULL));
  return h;
}

std::vector<double> SystemConfig::thresholds() const {
  if (rf_thresholds_w.size() == 1) {
    return std::vector<double>(static_cast<std::size_t>(num_users), rf_thresholds_w.front());
  }
  return rf_thresholds_w;
}

void SystemConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("invalid system config: " + what); };
  if (!(frequency_hz > 0.0)) fail("frequency_hz must be positive");
  if (!(antenna_length_m > 0.0)) fail("antenna_length_m must be positive");
  if (num_users < 1) fail("num_users must be at least 1");
  if (rf_thresholds_w.empty()) fail("rf_thresholds_w must not be empty");
  if (rf_thresholds_w.size() != 1 &&
      rf_thresholds_w.size() != static_cast<std::size_t>(num_users)) {
    fail("rf_thresholds_w must hold one value or one per user");
  }
  for (double d : rf_thresholds_w) {
    if (!(d > 0.0)) fail("every RF threshold must be positive");
  }
  if (!(boresight_gain >= 0.0)) fail("boresight_gain must be nonnegative");
  if (!(room_side_m > 0.0)) fail("room_side_m must be positive");
  if (!(tx_height_m > 0.0)) fail("tx_height_m must be positive");
  if (realizations < 1) fail("realizations must be at least 1");
}

ArrayGeometry build_array_geometry(const SystemConfig& config) {
  return build_array_geometry(config.antenna_length_m, config.wavelength_m(), config.tx_height_m);
}

ArrayGeometry build_array_geometry(double length_m, double wavelength_m, double tx_height_m) {
  if (!(length_m > 0.0) || !(wavelength_m > 0.0)) {
    throw ZeroArray("antenna length and wavelength must be positive");
  }
  ArrayGeometry g;
  g.waveguide_spacing_m = wavelength_m / 2.0;
  g.element_spacing_m = wavelength_m / 5.0;
  g.num_waveguides = guarded_floor(length_m / g.waveguide_spacing_m);
  g.elements_per_waveguide = guarded_floor(length_m / g.element_spacing_m);
  if (g.num_waveguides < 1 || g.elements_per_waveguide < 1) {
    std::ostringstream msg;
    msg << "antenna length " << length_m << " m is shorter than half a wavelength ("
        << wavelength_m / 2.0 << " m)";
    throw ZeroArray(msg.str());
  }
  g.total_elements = g.num_waveguides * g.elements_per_waveguide;
  g.length_m = length_m;
  g.diameter_m = std::sqrt(2.0) * length_m;
  g.center = Vec3(0.0, 0.0, tx_height_m);

  const double x0 = 0.5 * (g.elements_per_waveguide - 1) * g.element_spacing_m;
  const double y0 = 0.5 * (g.num_waveguides - 1) * g.waveguide_spacing_m;
  g.element_positions.reserve(static_cast<std::size_t>(g.total_elements));
  for (int i = 0; i < g.num_waveguides; ++i) {
    for (int l = 0; l < g.elements_per_waveguide; ++l) {
      g.element_positions.emplace_back(l * g.element_spacing_m - x0,
                                       i * g.waveguide_spacing_m - y0, tx_height_m);
    }
  }
  return g;
}

FieldRegion field_region_bounds(const ArrayGeometry& geometry, double wavelength_m) {
  return field_region_bounds(geometry.diameter_m, wavelength_m);
}

FieldRegion field_region_bounds(double diameter_m, double wavelength_m) {
  FieldRegion r;
  r.fresnel_m = std::cbrt(std::pow(diameter_m, 4) / (8.0 * wavelength_m));
  r.fraunhofer_m = 2.0 * diameter_m * diameter_m / wavelength_m;
  if (diameter_m > wavelength_m / 2.0 && !(r.fresnel_m < r.fraunhofer_m)) {
    throw std::logic_error("Fresnel bound must lie below the Fraunhofer bound");
  }
  return r;
}

std::vector<Vec3> sample_user_positions(const SystemConfig& config, int realization_index) {
  std::mt19937_64 rng(derive_seed(config.rng_seed, static_cast<std::uint64_t>(realization_index)));
  const double half = config.room_side_m / 2.0;
  std::vector<Vec3> users;
  users.reserve(static_cast<std::size_t>(config.num_users));
  for (int k = 0; k < config.num_users; ++k) {
    const double x = -half + config.room_side_m * unit_uniform(rng());
    const double y = -half + config.room_side_m * unit_uniform(rng());
    users.emplace_back(x, y, 0.0);
  }
  return users;
}

std::vector<std::string> near_field_warnings(const ArrayGeometry& geometry, double wavelength_m,
                                             const std::vector<Vec3>& users) {
  const FieldRegion region = field_region_bounds(geometry, wavelength_m);
  std::vector<std::string> warnings;
  for (std::size_t k = 0; k < users.size(); ++k) {
    const double r = (users[k] - geometry.center).norm();
    if (!region.contains(r)) {
      std::ostringstream msg;
      msg << "user " << k << " at distance " << r << " m is outside the near-field region ("
          << region.fresnel_m << ", " << region.fraunhofer_m << ") m";
      warnings.push_back(msg.str());
    }
  }
  return warnings;
}

}  // namespace dmawpt
