#include "physmo/motion.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace physmo {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ValidationError("motion file: " + where + ": " + what);
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

}  // namespace

std::vector<VecX> MotionSequence::poses() const {
  std::vector<VecX> out;
  out.reserve(frames.size());
  for (const auto& f : frames) out.push_back(f.q);
  return out;
}

namespace {

MotionSequence parse_motion_document(const json& doc, bool strict) {
  if (!doc.is_object()) fail("document", "expected a JSON object");
  check_keys(doc, "document",
             {"schema_version", "name", "fps", "dof_count", "joint_names",
              "frames"},
             strict);

  MotionSequence motion;
  const json& version = require(doc, "schema_version", "document");
  if (!version.is_number_integer() || version.get<int>() != 1)
    fail("schema_version", "unsupported schema version");
  if (doc.contains("name")) motion.name = doc["name"].get<std::string>();
  motion.fps = number(require(doc, "fps", "document"), "fps");
  if (!(motion.fps > 0.0)) fail("fps", "frame rate must be positive");

  if (doc.contains("joint_names")) {
    const json& names = doc["joint_names"];
    if (!names.is_array()) fail("joint_names", "expected an array");
    for (const auto& n : names)
      motion.joint_names.push_back(n.get<std::string>());
  }

  const json& frames = require(doc, "frames", "document");
  if (!frames.is_array()) fail("frames", "expected an array");
  for (size_t i = 0; i < frames.size(); ++i) {
    const std::string where = "frames[" + std::to_string(i) + "]";
    const json& fj = frames[i];
    check_keys(fj, where, {"time", "q", "joints3d"}, strict);
    MotionFrame frame;
    frame.time = number(require(fj, "time", where), where + ".time");
    const json& q = require(fj, "q", where);
    if (!q.is_array()) fail(where + ".q", "expected an array");
    frame.q.resize(q.size());
    for (size_t k = 0; k < q.size(); ++k)
      frame.q[k] = number(q[k], where + ".q");
    if (fj.contains("joints3d")) {
      const json& pts = fj["joints3d"];
      if (!pts.is_array()) fail(where + ".joints3d", "expected an array");
      for (const auto& p : pts) {
        if (!p.is_array() || p.size() != 3)
          fail(where + ".joints3d", "expected [x, y, z] triples");
        frame.joints3d.push_back({number(p[0], where), number(p[1], where),
                                  number(p[2], where)});
      }
    }
    motion.frames.push_back(std::move(frame));
  }

  for (size_t i = 0; i < motion.frames.size(); ++i) {
    if (motion.frames[i].q.size() != motion.frames[0].q.size())
      fail("frames", "frame " + std::to_string(i) +
                         " changes the coordinate count");
    if (!motion.joint_names.empty() && !motion.frames[i].joints3d.empty() &&
        motion.frames[i].joints3d.size() != motion.joint_names.size())
      fail("frames", "frame " + std::to_string(i) +
                         " has joints3d inconsistent with joint_names");
    if (!motion.frames[i].q.allFinite())
      fail("frames", "frame " + std::to_string(i) + " has non-finite values");
  }
  if (doc.contains("dof_count")) {
    if (!doc["dof_count"].is_number_integer())
      fail("dof_count", "expected an integer");
    if (doc["dof_count"].get<int>() != motion.dof_count())
      fail("dof_count", "declared " + doc["dof_count"].dump() +
                            " but frames carry " +
                            std::to_string(motion.dof_count()) +
                            " coordinates");
  }
  return motion;
}

}  // namespace

MotionSequence load_motion(const std::string& json_text, bool strict) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    // Covers syntax errors and numbers a double cannot represent.
    throw ValidationError(std::string("motion file: invalid JSON: ") +
                          e.what());
  }
  try {
    return parse_motion_document(doc, strict);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("motion file: malformed value: ") +
                          e.what());
  }
}

MotionSequence load_motion_file(const std::string& path, bool strict) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open motion file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return load_motion(buffer.str(), strict);
}

std::string save_motion(const MotionSequence& motion) {
  json doc;
  doc["schema_version"] = 1;
  doc["name"] = motion.name;
  doc["fps"] = motion.fps;
  doc["dof_count"] = motion.dof_count();
  if (!motion.joint_names.empty()) doc["joint_names"] = motion.joint_names;
  json frames = json::array();
  for (const auto& f : motion.frames) {
    json fj;
    fj["time"] = f.time;
    json q = json::array();
    for (int k = 0; k < f.q.size(); ++k) q.push_back(f.q[k]);
    fj["q"] = q;
    if (!f.joints3d.empty()) {
      json pts = json::array();
      for (const auto& p : f.joints3d)
        pts.push_back(json::array({p.x(), p.y(), p.z()}));
      fj["joints3d"] = pts;
    }
    frames.push_back(std::move(fj));
  }
  doc["frames"] = std::move(frames);
  return doc.dump(2) + "\n";
}

void save_motion_file(const MotionSequence& motion, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write motion file '" + path + "'");
  out << save_motion(motion);
}

namespace {
constexpr const char* kContactHeader =
    "frame,stationary,left_heel,left_forefoot,right_heel,right_forefoot";
}

std::string save_contact_csv(std::span<const ContactState> states) {
  std::ostringstream out;
  out << kContactHeader << "\n";
  for (size_t t = 0; t < states.size(); ++t) {
    out << t << ',' << (states[t].stationary ? 1 : 0);
    for (bool b : states[t].in_contact) out << ',' << (b ? 1 : 0);
    out << '\n';
  }
  return out.str();
}

void save_contact_csv_file(std::span<const ContactState> states,
                           const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write contact table '" + path + "'");
  out << save_contact_csv(states);
}

std::vector<ContactState> load_contact_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) ||
      line.substr(0, line.find_last_not_of("\r") + 1) != kContactHeader)
    throw ValidationError(
        "contact table: missing or unexpected header row (expected '" +
        std::string(kContactHeader) + "')");

  std::vector<ContactState> out;
  size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream cells(line);
    std::string cell;
    int values[6];
    for (int k = 0; k < 6; ++k) {
      if (!std::getline(cells, cell, ','))
        throw ValidationError("contact table: row " + std::to_string(row) +
                              " has fewer than 6 cells");
      try {
        values[k] = std::stoi(cell);
      } catch (const std::exception&) {
        throw ValidationError("contact table: row " + std::to_string(row) +
                              " has a non-numeric cell '" + cell + "'");
      }
      if (k > 0 && values[k] != 0 && values[k] != 1)
        throw ValidationError("contact table: row " + std::to_string(row) +
                              " has a flag outside {0, 1}");
    }
    if (std::getline(cells, cell, ','))
      throw ValidationError("contact table: row " + std::to_string(row) +
                            " has more than 6 cells");
    if (values[0] != static_cast<int>(row))
      throw ValidationError("contact table: row " + std::to_string(row) +
                            " has frame index " + std::to_string(values[0]));
    ContactState state;
    state.stationary = values[1] == 1;
    for (int k = 0; k < 4; ++k) state.in_contact[k] = values[2 + k] == 1;
    out.push_back(state);
    ++row;
  }
  return out;
}

std::vector<ContactState> load_contact_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open contact table '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return load_contact_csv(buffer.str());
}

}  // namespace physmo
