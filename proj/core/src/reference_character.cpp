#include <cstring>

#include "physmo/character.hpp"

namespace physmo {

namespace {

// Shape dimensions are fractions of stature; see docs/mass_fractions.md for
// the provenance of the fraction table.
struct ShapeDef {
  enum Kind { Sphere, CylinderZ, CylinderY, Box } kind;
  double a = 0.0, b = 0.0, c = 0.0;  // sphere r / cylinder r,L / box dx,dy,dz
};

struct LinkDef {
  const char* name;
  const char* parent;  // parent link; nullptr marks the root link
  Vec3 offset;         // joint origin in the parent link frame
  const char* axes;    // rotation axis letters in application order
  double fraction;     // of total body mass
  ShapeDef shape;
  Vec3 com;
  double proxy_radius;  // [m], absolute; 0 = no proxy
};

constexpr double kProxyRadius = 0.02;

const LinkDef kReferenceLinks[] = {
    {"pelvis", nullptr, {0, 0, 0}, "", 0.140,
     {ShapeDef::Box, 0.11, 0.17, 0.10}, {0, 0, 0.01}, 0.0},
    {"sacrum", "pelvis", {-0.0457, 0, 0}, "", 0.002,
     {ShapeDef::Sphere, 0.02}, {0, 0, 0}, 0.0},
    {"spine_1", "pelvis", {0, 0, 0.0686}, "y", 0.100,
     {ShapeDef::Box, 0.10, 0.15, 0.0686}, {0, 0, 0.0343}, 0.0},
    {"spine_2", "spine_1", {0, 0, 0.0686}, "zyx", 0.100,
     {ShapeDef::Box, 0.10, 0.15, 0.0686}, {0, 0, 0.0343}, 0.0},
    {"spine_3", "spine_2", {0, 0, 0.0686}, "y", 0.120,
     {ShapeDef::Box, 0.11, 0.16, 0.0914}, {0, 0, 0.045}, 0.0},
    {"sternum", "spine_3", {0.0571, 0, 0.02}, "", 0.005,
     {ShapeDef::Sphere, 0.015}, {0, 0, 0}, 0.0},
    {"neck", "spine_3", {0, 0, 0.0914}, "zyx", 0.017,
     {ShapeDef::CylinderZ, 0.025, 0.0457}, {0, 0, 0.0228}, 0.0},
    {"head", "neck", {0, 0, 0.0457}, "y", 0.060,
     {ShapeDef::Sphere, 0.0371}, {0, 0, 0.0343}, 0.0},
    {"head_top", "head", {0, 0, 0.0686}, "", 0.002,
     {ShapeDef::Sphere, 0.01}, {0, 0, 0}, 0.0},
    {"nose", "head", {0.0514, 0, 0.0171}, "", 0.001,
     {ShapeDef::Sphere, 0.01}, {0, 0, 0}, 0.0},
    {"l_ear", "head", {0, 0.04, 0.0114}, "", 0.0005,
     {ShapeDef::Sphere, 0.01}, {0, 0, 0}, 0.0},
    {"r_ear", "head", {0, -0.04, 0.0114}, "", 0.0005,
     {ShapeDef::Sphere, 0.01}, {0, 0, 0}, 0.0},

    {"l_clavicle", "spine_3", {0, 0.0229, 0.0743}, "x", 0.015,
     {ShapeDef::CylinderY, 0.012, 0.0914}, {0, 0.0457, 0}, 0.0},
    {"l_shoulder", "l_clavicle", {0, 0.0914, 0}, "zyx", 0.028,
     {ShapeDef::CylinderZ, 0.02, 0.1714}, {0, 0, -0.0857}, 0.0},
    {"l_elbow", "l_shoulder", {0, 0, -0.1714}, "y", 0.011,
     {ShapeDef::CylinderZ, 0.016, 0.08}, {0, 0, -0.04}, 0.0},
    {"l_forearm", "l_elbow", {0, 0, -0.08}, "z", 0.005,
     {ShapeDef::CylinderZ, 0.014, 0.0743}, {0, 0, -0.0371}, 0.0},
    {"l_wrist", "l_forearm", {0, 0, -0.0743}, "y", 0.005,
     {ShapeDef::Box, 0.02, 0.05, 0.0571}, {0, 0, -0.0286}, 0.0},
    {"l_hand_tip", "l_wrist", {0, 0, -0.0571}, "", 0.0006,
     {ShapeDef::Sphere, 0.008}, {0, 0, 0}, 0.0},
    {"l_thumb", "l_wrist", {0.0229, 0, -0.0286}, "", 0.0004,
     {ShapeDef::Sphere, 0.008}, {0, 0, 0}, 0.0},

    {"r_clavicle", "spine_3", {0, -0.0229, 0.0743}, "x", 0.015,
     {ShapeDef::CylinderY, 0.012, 0.0914}, {0, -0.0457, 0}, 0.0},
    {"r_shoulder", "r_clavicle", {0, -0.0914, 0}, "zyx", 0.028,
     {ShapeDef::CylinderZ, 0.02, 0.1714}, {0, 0, -0.0857}, 0.0},
    {"r_elbow", "r_shoulder", {0, 0, -0.1714}, "y", 0.011,
     {ShapeDef::CylinderZ, 0.016, 0.08}, {0, 0, -0.04}, 0.0},
    {"r_forearm", "r_elbow", {0, 0, -0.08}, "z", 0.005,
     {ShapeDef::CylinderZ, 0.014, 0.0743}, {0, 0, -0.0371}, 0.0},
    {"r_wrist", "r_forearm", {0, 0, -0.0743}, "y", 0.005,
     {ShapeDef::Box, 0.02, 0.05, 0.0571}, {0, 0, -0.0286}, 0.0},
    {"r_hand_tip", "r_wrist", {0, 0, -0.0571}, "", 0.0006,
     {ShapeDef::Sphere, 0.008}, {0, 0, 0}, 0.0},
    {"r_thumb", "r_wrist", {0.0229, 0, -0.0286}, "", 0.0004,
     {ShapeDef::Sphere, 0.008}, {0, 0, 0}, 0.0},

    {"l_hip", "pelvis", {0, 0.0514, -0.0286}, "zyx", 0.100,
     {ShapeDef::CylinderZ, 0.04, 0.245}, {0, 0, -0.1225}, 0.0},
    {"l_knee", "l_hip", {0, 0, -0.245}, "y", 0.0465,
     {ShapeDef::CylinderZ, 0.028, 0.246}, {0, 0, -0.123}, 0.0},
    {"l_ankle", "l_knee", {0, 0, -0.246}, "yx", 0.008,
     {ShapeDef::Box, 0.06, 0.04, 0.035}, {0.01, 0, -0.015}, 0.0},
    {"l_heel", "l_ankle", {-0.0286, 0, -0.0212}, "", 0.0025,
     {ShapeDef::Sphere, 0.0114}, {0, 0, 0}, kProxyRadius},
    {"l_toe", "l_ankle", {0.0686, 0, -0.0212}, "y", 0.0035,
     {ShapeDef::Box, 0.06, 0.045, 0.025}, {0.02, 0, 0}, kProxyRadius},
    {"l_toe_tip", "l_toe", {0.04, 0, 0}, "", 0.0005,
     {ShapeDef::Sphere, 0.008}, {0, 0, 0}, 0.0},

    {"r_hip", "pelvis", {0, -0.0514, -0.0286}, "zyx", 0.100,
     {ShapeDef::CylinderZ, 0.04, 0.245}, {0, 0, -0.1225}, 0.0},
    {"r_knee", "r_hip", {0, 0, -0.245}, "y", 0.0465,
     {ShapeDef::CylinderZ, 0.028, 0.246}, {0, 0, -0.123}, 0.0},
    {"r_ankle", "r_knee", {0, 0, -0.246}, "yx", 0.008,
     {ShapeDef::Box, 0.06, 0.04, 0.035}, {0.01, 0, -0.015}, 0.0},
    {"r_heel", "r_ankle", {-0.0286, 0, -0.0212}, "", 0.0025,
     {ShapeDef::Sphere, 0.0114}, {0, 0, 0}, kProxyRadius},
    {"r_toe", "r_ankle", {0.0686, 0, -0.0212}, "y", 0.0035,
     {ShapeDef::Box, 0.06, 0.045, 0.025}, {0.02, 0, 0}, kProxyRadius},
    {"r_toe_tip", "r_toe", {0.04, 0, 0}, "", 0.0005,
     {ShapeDef::Sphere, 0.008}, {0, 0, 0}, 0.0},
};

Mat3 shape_inertia(const ShapeDef& s, double mass, double h) {
  Mat3 inertia = Mat3::Zero();
  switch (s.kind) {
    case ShapeDef::Sphere: {
      const double r = s.a * h;
      inertia = Mat3::Identity() * (0.4 * mass * r * r);
      break;
    }
    case ShapeDef::CylinderZ: {
      const double r = s.a * h, length = s.b * h;
      const double side = mass * (3.0 * r * r + length * length) / 12.0;
      inertia.diagonal() << side, side, 0.5 * mass * r * r;
      break;
    }
    case ShapeDef::CylinderY: {
      const double r = s.a * h, length = s.b * h;
      const double side = mass * (3.0 * r * r + length * length) / 12.0;
      inertia.diagonal() << side, 0.5 * mass * r * r, side;
      break;
    }
    case ShapeDef::Box: {
      const double dx = s.a * h, dy = s.b * h, dz = s.c * h;
      inertia.diagonal() << mass * (dy * dy + dz * dz) / 12.0,
          mass * (dx * dx + dz * dz) / 12.0,
          mass * (dx * dx + dy * dy) / 12.0;
      break;
    }
  }
  return inertia;
}

Vec3 axis_from_letter(char c) {
  switch (c) {
    case 'x': return Vec3::UnitX();
    case 'y': return Vec3::UnitY();
    case 'z': return Vec3::UnitZ();
    default:
      throw ValidationError(std::string("unknown axis letter '") + c + "'");
  }
}

CameraModel make_camera(const std::string& name, const Vec3& position,
                        const Vec3& x_cam, const Vec3& y_cam,
                        const Vec3& z_cam) {
  CameraModel cam;
  cam.name = name;
  cam.fx = cam.fy = 1100.0;
  cam.cx = cam.cy = 512.0;
  cam.width = cam.height = 1024;
  cam.rotation.row(0) = x_cam;
  cam.rotation.row(1) = y_cam;
  cam.rotation.row(2) = z_cam;
  cam.translation = -(cam.rotation * position);
  return cam;
}

}  // namespace

double reference_mass_fraction(const std::string& link_name) {
  for (const auto& def : kReferenceLinks)
    if (link_name == def.name) return def.fraction;
  throw ValidationError("unknown reference link '" + link_name + "'");
}

std::map<std::string, LinkMassProperties> distribute_mass(double total_mass,
                                                          double height) {
  if (!(total_mass > 0.0)) throw ValidationError("total mass must be positive");
  if (!(height > 0.0)) throw ValidationError("height must be positive");
  std::map<std::string, LinkMassProperties> out;
  for (const auto& def : kReferenceLinks) {
    LinkMassProperties p;
    p.mass = def.fraction * total_mass;
    p.com = def.com * height;
    p.inertia = shape_inertia(def.shape, p.mass, height);
    out[def.name] = p;
  }
  return out;
}

CharacterModel reference_character(double total_mass, double height) {
  const auto mass_props = distribute_mass(total_mass, height);

  CharacterModel model;
  model.name = "human43";
  model.root_link = "pelvis";
  model.root_axes = {Vec3::UnitZ(), Vec3::UnitY(), Vec3::UnitX()};

  for (const auto& def : kReferenceLinks) {
    const auto& props = mass_props.at(def.name);
    LinkSpec link;
    link.name = def.name;
    link.mass = props.mass;
    link.com = props.com;
    link.inertia = props.inertia;
    if (def.proxy_radius > 0.0) {
      link.proxy.kind = ProxyKind::Sphere;
      link.proxy.radius = def.proxy_radius;
    }
    model.links.push_back(link);

    if (!def.parent) continue;
    JointSpec joint;
    joint.name = def.name;
    joint.parent_link = def.parent;
    joint.offset = def.offset * height;
    for (const char* c = def.axes; *c; ++c)
      joint.axes.push_back(axis_from_letter(*c));
    model.joints.push_back(joint);
  }

  model.foot_links = {"l_heel", "l_toe", "r_heel", "r_toe"};
  model.floor = FloorPlane{Vec3::UnitZ(), 0.0, 0.8};

  model.cameras.push_back(make_camera("front", {4.0, 0.0, 1.0}, {0, 1, 0},
                                      {0, 0, -1}, {-1, 0, 0}));
  model.cameras.push_back(make_camera("side", {0.0, 4.0, 1.0}, {-1, 0, 0},
                                      {0, 0, -1}, {0, -1, 0}));

  validate(model);
  return model;
}

}  // namespace physmo
