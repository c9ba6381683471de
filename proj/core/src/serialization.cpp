#include <fstream>
#include <sstream>

#include <json.hpp>

#include "physmo/character.hpp"

namespace physmo {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ValidationError("character config: " + where + ": " + what);
}

const json& require(const json& obj, const std::string& key,
                    const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(where, "missing field '" + key + "'");
  return *it;
}

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed, bool strict) {
  if (!strict) return;
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) { known = true; break; }
    if (!known) fail(where, "unknown field '" + it.key() + "'");
  }
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  return v.get<double>();
}

Vec3 vec3(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 3) fail(where, "expected [x, y, z]");
  return {number(v[0], where), number(v[1], where), number(v[2], where)};
}

Vec3 axis(const json& v, const std::string& where) {
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "x") return Vec3::UnitX();
    if (s == "y") return Vec3::UnitY();
    if (s == "z") return Vec3::UnitZ();
    fail(where, "axis letter must be x, y or z");
  }
  return vec3(v, where);
}

Mat3 inertia_from_json(const json& v, const std::string& where) {
  Mat3 m;
  if (!v.is_array()) fail(where, "expected inertia array");
  if (v.size() == 6) {
    // [ixx, iyy, izz, ixy, ixz, iyz]
    const double ixx = number(v[0], where), iyy = number(v[1], where),
                 izz = number(v[2], where), ixy = number(v[3], where),
                 ixz = number(v[4], where), iyz = number(v[5], where);
    m << ixx, ixy, ixz, ixy, iyy, iyz, ixz, iyz, izz;
    return m;
  }
  if (v.size() == 9) {
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) m(r, c) = number(v[3 * r + c], where);
    return m;
  }
  fail(where, "inertia must have 6 or 9 entries");
}

json inertia_to_json(const Mat3& m) {
  return json::array(
      {m(0, 0), m(1, 1), m(2, 2), m(0, 1), m(0, 2), m(1, 2)});
}

json vec3_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

std::optional<std::string> axis_letter(const Vec3& a) {
  if (a == Vec3::UnitX()) return "x";
  if (a == Vec3::UnitY()) return "y";
  if (a == Vec3::UnitZ()) return "z";
  return std::nullopt;
}

ContactProxy proxy_from_json(const json& v, const std::string& where,
                             bool strict) {
  check_keys(v, where, {"type", "radius", "half_extents"}, strict);
  ContactProxy proxy;
  const std::string type =
      require(v, "type", where).get<std::string>();
  if (type == "sphere") {
    proxy.kind = ProxyKind::Sphere;
    proxy.radius = number(require(v, "radius", where), where);
  } else if (type == "box") {
    proxy.kind = ProxyKind::Box;
    proxy.half_extents = vec3(require(v, "half_extents", where), where);
  } else {
    fail(where, "unknown proxy type '" + type + "'");
  }
  return proxy;
}

CameraModel camera_from_json(const json& v, const std::string& where,
                             bool strict) {
  check_keys(v, where,
             {"name", "fx", "fy", "cx", "cy", "rotation", "translation",
              "width", "height"},
             strict);
  CameraModel cam;
  cam.name = require(v, "name", where).get<std::string>();
  cam.fx = number(require(v, "fx", where), where);
  cam.fy = number(require(v, "fy", where), where);
  cam.cx = number(require(v, "cx", where), where);
  cam.cy = number(require(v, "cy", where), where);
  const json& rot = require(v, "rotation", where);
  if (!rot.is_array() || rot.size() != 9)
    fail(where, "rotation must be 9 row-major entries");
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) cam.rotation(r, c) = number(rot[3 * r + c], where);
  cam.translation = vec3(require(v, "translation", where), where);
  if (v.contains("width")) cam.width = v["width"].get<int>();
  if (v.contains("height")) cam.height = v["height"].get<int>();
  return cam;
}

json camera_to_json(const CameraModel& cam) {
  json rot = json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) rot.push_back(cam.rotation(r, c));
  return json{{"name", cam.name},   {"fx", cam.fx},
              {"fy", cam.fy},       {"cx", cam.cx},
              {"cy", cam.cy},       {"rotation", rot},
              {"translation", vec3_to_json(cam.translation)},
              {"width", cam.width}, {"height", cam.height}};
}

}  // namespace

namespace {

CharacterModel parse_character_document(const json& doc, bool strict) {
  if (!doc.is_object()) fail("document", "expected a JSON object");
  check_keys(doc, "document",
             {"schema_version", "name", "base_welded", "root_link",
              "root_euler_order", "joints", "links", "foot_links", "floor",
              "cameras", "total_mass", "dof_count"},
             strict);

  CharacterModel model;
  const json& version = require(doc, "schema_version", "document");
  if (!version.is_number_integer() || version.get<int>() != 1)
    fail("schema_version", "unsupported schema version");
  model.schema_version = 1;
  if (doc.contains("name")) model.name = doc["name"].get<std::string>();
  if (doc.contains("base_welded"))
    model.base_welded = doc["base_welded"].get<bool>();
  model.root_link = require(doc, "root_link", "document").get<std::string>();

  std::string order = "zyx";
  if (doc.contains("root_euler_order"))
    order = doc["root_euler_order"].get<std::string>();
  if (!model.base_welded) {
    if (order.size() != 3) fail("root_euler_order", "expected three letters");
    for (char c : order)
      model.root_axes.push_back(axis(json(std::string(1, c)), "root_euler_order"));
  }

  const json& joints = require(doc, "joints", "document");
  if (!joints.is_array()) fail("joints", "expected an array");
  for (size_t i = 0; i < joints.size(); ++i) {
    const std::string where = "joints[" + std::to_string(i) + "]";
    const json& jj = joints[i];
    check_keys(jj, where,
               {"name", "parent", "offset", "axes", "lower_limits",
                "upper_limits"},
               strict);
    JointSpec joint;
    joint.name = require(jj, "name", where).get<std::string>();
    joint.parent_link = require(jj, "parent", where).get<std::string>();
    joint.offset = vec3(require(jj, "offset", where), where + ".offset");
    if (jj.contains("axes")) {
      if (!jj["axes"].is_array()) fail(where + ".axes", "expected an array");
      for (const auto& a : jj["axes"])
        joint.axes.push_back(axis(a, where + ".axes"));
    }
    for (const char* key : {"lower_limits", "upper_limits"}) {
      if (!jj.contains(key)) continue;
      const json& lim = jj[key];
      if (!lim.is_array()) fail(where, std::string(key) + " must be an array");
      VecX values(lim.size());
      for (size_t k = 0; k < lim.size(); ++k)
        values[k] = number(lim[k], where + "." + key);
      if (std::string(key) == "lower_limits") joint.lower_limits = values;
      else joint.upper_limits = values;
    }
    model.joints.push_back(std::move(joint));
  }

  const json& links = require(doc, "links", "document");
  if (!links.is_array()) fail("links", "expected an array");
  for (size_t i = 0; i < links.size(); ++i) {
    const std::string where = "links[" + std::to_string(i) + "]";
    const json& lj = links[i];
    check_keys(lj, where, {"name", "mass", "com", "inertia", "proxy"}, strict);
    LinkSpec link;
    link.name = require(lj, "name", where).get<std::string>();
    link.mass = number(require(lj, "mass", where), where + ".mass");
    link.com = vec3(require(lj, "com", where), where + ".com");
    link.inertia =
        inertia_from_json(require(lj, "inertia", where), where + ".inertia");
    if (lj.contains("proxy"))
      link.proxy = proxy_from_json(lj["proxy"], where + ".proxy", strict);
    model.links.push_back(std::move(link));
  }

  const json& feet = require(doc, "foot_links", "document");
  check_keys(feet, "foot_links",
             {"left_heel", "left_forefoot", "right_heel", "right_forefoot"},
             strict);
  model.foot_links.left_heel =
      require(feet, "left_heel", "foot_links").get<std::string>();
  model.foot_links.left_forefoot =
      require(feet, "left_forefoot", "foot_links").get<std::string>();
  model.foot_links.right_heel =
      require(feet, "right_heel", "foot_links").get<std::string>();
  model.foot_links.right_forefoot =
      require(feet, "right_forefoot", "foot_links").get<std::string>();

  if (doc.contains("floor")) {
    const json& fl = doc["floor"];
    check_keys(fl, "floor", {"normal", "offset", "friction"}, strict);
    if (fl.contains("normal")) model.floor.normal = vec3(fl["normal"], "floor.normal");
    if (fl.contains("offset")) model.floor.offset = number(fl["offset"], "floor.offset");
    if (fl.contains("friction"))
      model.floor.friction = number(fl["friction"], "floor.friction");
  }

  if (doc.contains("cameras")) {
    const json& cams = doc["cameras"];
    if (!cams.is_array()) fail("cameras", "expected an array");
    for (size_t i = 0; i < cams.size(); ++i)
      model.cameras.push_back(camera_from_json(
          cams[i], "cameras[" + std::to_string(i) + "]", strict));
  }

  validate(model);

  if (doc.contains("dof_count")) {
    if (!doc["dof_count"].is_number_integer())
      fail("dof_count", "expected an integer");
    if (doc["dof_count"].get<int>() != model.dof_count())
      fail("dof_count", "declared " + doc["dof_count"].dump() +
                            " but model has " +
                            std::to_string(model.dof_count()));
  }
  if (doc.contains("total_mass")) {
    const double declared = number(doc["total_mass"], "total_mass");
    const double actual = model.total_mass();
    if (std::abs(declared - actual) > 1e-9 * std::max(1.0, std::abs(declared)))
      fail("total_mass", "declared mass does not match the link sum");
  }
  return model;
}

}  // namespace

CharacterModel load_character(const std::string& json_text, bool strict) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    // Covers syntax errors and numbers a double cannot represent.
    throw ValidationError(std::string("character config: invalid JSON: ") +
                          e.what());
  }
  try {
    return parse_character_document(doc, strict);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("character config: malformed value: ") +
                          e.what());
  }
}

CharacterModel load_character_file(const std::string& path, bool strict) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open character config '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return load_character(buffer.str(), strict);
}

std::string save_character(const CharacterModel& model) {
  json doc;
  doc["schema_version"] = model.schema_version;
  doc["name"] = model.name;
  if (model.base_welded) doc["base_welded"] = true;
  doc["root_link"] = model.root_link;
  if (!model.base_welded) {
    std::string order;
    for (const auto& a : model.root_axes) {
      const auto letter = axis_letter(a);
      if (!letter)
        throw ValidationError("only axis-aligned root axes can be saved");
      order += *letter;
    }
    doc["root_euler_order"] = order;
  }
  doc["dof_count"] = model.dof_count();
  doc["total_mass"] = model.total_mass();

  json joints = json::array();
  for (const auto& j : model.joints) {
    json jj{{"name", j.name},
            {"parent", j.parent_link},
            {"offset", vec3_to_json(j.offset)}};
    json axes = json::array();
    for (const auto& a : j.axes) {
      const auto letter = axis_letter(a);
      if (letter) axes.push_back(*letter);
      else axes.push_back(vec3_to_json(a));
    }
    jj["axes"] = axes;
    if (j.lower_limits) {
      json lim = json::array();
      for (int k = 0; k < j.lower_limits->size(); ++k)
        lim.push_back((*j.lower_limits)[k]);
      jj["lower_limits"] = lim;
    }
    if (j.upper_limits) {
      json lim = json::array();
      for (int k = 0; k < j.upper_limits->size(); ++k)
        lim.push_back((*j.upper_limits)[k]);
      jj["upper_limits"] = lim;
    }
    joints.push_back(jj);
  }
  doc["joints"] = joints;

  json links = json::array();
  for (const auto& l : model.links) {
    json lj{{"name", l.name},
            {"mass", l.mass},
            {"com", vec3_to_json(l.com)},
            {"inertia", inertia_to_json(l.inertia)}};
    if (l.proxy.kind == ProxyKind::Sphere)
      lj["proxy"] = json{{"type", "sphere"}, {"radius", l.proxy.radius}};
    else if (l.proxy.kind == ProxyKind::Box)
      lj["proxy"] = json{{"type", "box"},
                         {"half_extents", vec3_to_json(l.proxy.half_extents)}};
    links.push_back(lj);
  }
  doc["links"] = links;

  doc["foot_links"] = json{{"left_heel", model.foot_links.left_heel},
                           {"left_forefoot", model.foot_links.left_forefoot},
                           {"right_heel", model.foot_links.right_heel},
                           {"right_forefoot", model.foot_links.right_forefoot}};
  doc["floor"] = json{{"normal", vec3_to_json(model.floor.normal)},
                      {"offset", model.floor.offset},
                      {"friction", model.floor.friction}};
  if (!model.cameras.empty()) {
    json cams = json::array();
    for (const auto& cam : model.cameras) cams.push_back(camera_to_json(cam));
    doc["cameras"] = cams;
  }
  return doc.dump(2) + "\n";
}

void save_character_file(const CharacterModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write character config '" + path + "'");
  out << save_character(model);
}

}  // namespace physmo
