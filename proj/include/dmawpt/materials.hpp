#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dmawpt/microstrip.hpp"

namespace dmawpt {

/// Named substrate catalogue. Ships with the seven reference laminates; users
/// can add entries or load a JSON file with the same schema:
///
///   {"materials": [{"name": ..., "dielectric_constant": ..., "loss_tangent": ...,
///                   "substrate_thickness_m": ..., "conductivity_s_per_m": ...,
///                   "conductor_width_m": <number> | "equal_to_thickness",
///                   "measured_at": ...}, ...]}
class MaterialDatabase {
 public:
  static MaterialDatabase builtin();
  static MaterialDatabase from_json(const nlohmann::json& doc);
  static MaterialDatabase load(const std::string& path);

  nlohmann::json to_json() const;
  void save(const std::string& path) const;

  const MaterialSpec& get(const std::string& name) const;
  bool contains(const std::string& name) const;
  void add(MaterialSpec spec);
  const std::vector<MaterialSpec>& materials() const { return materials_; }

 private:
  std::vector<MaterialSpec> materials_;
};

inline constexpr const char* kDefaultMaterial = "DuPont Pyralux AP-9161";

}  // namespace dmawpt
