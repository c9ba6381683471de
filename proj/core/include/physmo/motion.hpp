#pragma once

#include <span>
#include <string>
#include <vector>

#include "physmo/contact.hpp"
#include "physmo/types.hpp"

namespace physmo {

struct MotionFrame {
  double time = 0.0;           // [s]
  VecX q;                      // generalized coordinates
  std::vector<Vec3> joints3d;  // optional world joint positions [m]
};

// On-disk motion document (schema version 1): a fixed-rate sequence of
// generalized-coordinate poses, optionally with world joint positions bound
// by name through joint_names.
struct MotionSequence {
  int schema_version = 1;
  std::string name;
  double fps = 0.0;
  std::vector<std::string> joint_names;
  std::vector<MotionFrame> frames;

  int frame_count() const { return static_cast<int>(frames.size()); }
  int dof_count() const {
    return frames.empty() ? 0 : static_cast<int>(frames.front().q.size());
  }
  std::vector<VecX> poses() const;
};

MotionSequence load_motion(const std::string& json_text, bool strict = false);
MotionSequence load_motion_file(const std::string& path, bool strict = false);
std::string save_motion(const MotionSequence& motion);
void save_motion_file(const MotionSequence& motion, const std::string& path);

// Contact label table as CSV with the fixed header
//   frame,stationary,left_heel,left_forefoot,right_heel,right_forefoot
// and 0/1 cells.
std::string save_contact_csv(std::span<const ContactState> states);
void save_contact_csv_file(std::span<const ContactState> states,
                           const std::string& path);
std::vector<ContactState> load_contact_csv(const std::string& text);
std::vector<ContactState> load_contact_csv_file(const std::string& path);

}  // namespace physmo
