#include "dmawpt/materials.hpp"

#include <algorithm>
#include <fstream>

namespace dmawpt {

namespace {

constexpr double kCopper = 5.8e7;
constexpr const char* kWidthRule = "equal_to_thickness";

MaterialSpec make(const char* name, double er, double tan_d, double thickness_m,
                  const char* measured_at) {
  return MaterialSpec{name, er, tan_d, thickness_m, thickness_m, kCopper, measured_at};
}

MaterialSpec spec_from_json(const nlohmann::json& j) {
  MaterialSpec m;
  m.name = j.at("name").get<std::string>();
  m.dielectric_constant = j.at("dielectric_constant").get<double>();
  m.loss_tangent = j.at("loss_tangent").get<double>();
  m.substrate_thickness_m = j.at("substrate_thickness_m").get<double>();
  m.conductivity_s_per_m = j.value("conductivity_s_per_m", kCopper);
  m.measured_at = j.value("measured_at", std::string{});
  const auto width = j.find("conductor_width_m");
  if (width == j.end() || (width->is_string() && width->get<std::string>() == kWidthRule)) {
    m.conductor_width_m = m.substrate_thickness_m;
  } else if (width->is_number()) {
    m.conductor_width_m = width->get<double>();
  } else {
    throw ConfigError("material '" + m.name + "': conductor_width_m must be a number or \"" +
                      kWidthRule + "\"");
  }
  m.validate();
  return m;
}

}  // namespace

MaterialDatabase MaterialDatabase::builtin() {
  MaterialDatabase db;
  db.materials_ = {
      make("Cylex FR4", 5.5, 0.04, 1.6e-3, "50 Hz"),
      make("DuPont Pyralux AP-9161", 3.4, 0.002, 0.15e-3, "1 MHz"),
      make("Arlon AD260A", 2.6, 0.00135, 1.14e-3, "1 MHz"),
      make("Rogers RO4003C", 3.55, 0.0021, 0.53e-3, "2.5 GHz"),
      make("Taconic RF-10", 10.2, 0.0025, 0.25e-3, "10 GHz"),
      make("Panasonic R-5515", 3.0, 0.002, 0.105e-3, "14, 26 GHz"),
      make("Isola IS580G", 3.8, 0.006, 0.4e-3, "5, 10, 20 GHz"),
  };
  return db;
}

MaterialDatabase MaterialDatabase::from_json(const nlohmann::json& doc) {
  MaterialDatabase db;
  try {
    for (const auto& entry : doc.at("materials")) db.add(spec_from_json(entry));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed material database: ") + e.what());
  }
  return db;
}

MaterialDatabase MaterialDatabase::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open material database '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cannot parse '" + path + "': " + e.what());
  }
  return from_json(doc);
}

nlohmann::json MaterialDatabase::to_json() const {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& m : materials_) {
    nlohmann::json j;
    j["name"] = m.name;
    j["dielectric_constant"] = m.dielectric_constant;
    j["loss_tangent"] = m.loss_tangent;
    j["substrate_thickness_m"] = m.substrate_thickness_m;
    if (m.conductor_width_m == m.substrate_thickness_m) {
      j["conductor_width_m"] = kWidthRule;
    } else {
      j["conductor_width_m"] = m.conductor_width_m;
    }
    j["conductivity_s_per_m"] = m.conductivity_s_per_m;
    j["measured_at"] = m.measured_at;
    list.push_back(std::move(j));
  }
  return nlohmann::json{{"materials", list}};
}

void MaterialDatabase::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write material database '" + path + "'");
  out << to_json().dump(2) << '\n';
}

const MaterialSpec& MaterialDatabase::get(const std::string& name) const {
  const auto it = std::find_if(materials_.begin(), materials_.end(),
                               [&](const MaterialSpec& m) { return m.name == name; });
  if (it == materials_.end()) throw ConfigError("unknown material '" + name + "'");
  return *it;
}

bool MaterialDatabase::contains(const std::string& name) const {
  return std::any_of(materials_.begin(), materials_.end(),
                     [&](const MaterialSpec& m) { return m.name == name; });
}

void MaterialDatabase::add(MaterialSpec spec) {
  spec.validate();
  if (contains(spec.name)) throw ConfigError("duplicate material '" + spec.name + "'");
  materials_.push_back(std::move(spec));
}

}  // namespace dmawpt
