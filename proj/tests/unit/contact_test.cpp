#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "physmo/contact.hpp"
#include "physmo/motion.hpp"
#include "physmo/pipeline.hpp"
#include "physmo/synthetic.hpp"

using namespace physmo;
using physmo::test::default_model;

namespace {

// Flat tracks: all four foot points resting at their calibrated height.
FootTracks resting_tracks(int frames, double fps) {
  FootTracks tracks;
  tracks.fps = fps;
  const Vec3 base[4] = {Vec3(0.0, 0.1, 0.0), Vec3(0.15, 0.1, 0.0),
                        Vec3(0.0, -0.1, 0.0), Vec3(0.15, -0.1, 0.0)};
  for (int t = 0; t < frames; ++t) {
    tracks.root.push_back(Vec3(0.0, 0.0, 1.0));
    for (int foot = 0; foot < 4; ++foot) tracks.foot[foot].push_back(base[foot]);
  }
  return tracks;
}

}  // namespace

TEST_SUITE("contact") {

TEST_CASE("resting feet are labeled in contact on every frame") {
  const FootTracks tracks = resting_tracks(30, 25.0);
  const auto labels = label_contacts(tracks, FloorPlane{}, ContactThresholds{});
  REQUIRE(labels.size() == 30);
  for (const ContactState& state : labels) {
    CHECK(state.stationary);
    CHECK(state.contact_count() == 4);
  }
}

TEST_CASE("a fast sweep along the floor is not a contact") {
  FootTracks tracks = resting_tracks(30, 25.0);
  // Foot 1 slides at 0.5 m/s from frame 10 on, staying at floor height.
  for (int t = 10; t < 30; ++t)
    tracks.foot[1][t] += Vec3(0.5 * (t - 10) / 25.0, 0.0, 0.0);
  const auto labels = label_contacts(tracks, FloorPlane{}, ContactThresholds{});
  for (int t = 12; t < 28; ++t) {
    CHECK_FALSE(labels[t].in_contact[1]);
    CHECK(labels[t].in_contact[0]);  // the others stay put
  }
}

TEST_CASE("a foot lifted above its calibrated height loses the label") {
  FootTracks tracks = resting_tracks(60, 25.0);
  // Slow rise (0.0375 m/s, under the speed threshold) past the 0.05 m
  // height margin, which is crossed between frames 53 and 54.
  for (int t = 20; t < 60; ++t)
    tracks.foot[2][t] += Vec3(0.0, 0.0, 0.0015 * (t - 20));
  const auto labels = label_contacts(tracks, FloorPlane{}, ContactThresholds{});
  for (int t = 0; t < 15; ++t) CHECK(labels[t].in_contact[2]);
  for (int t = 55; t < 60; ++t) CHECK_FALSE(labels[t].in_contact[2]);
}

TEST_CASE("a moving root clears the stationary flag") {
  FootTracks tracks = resting_tracks(30, 25.0);
  for (int t = 0; t < 30; ++t) tracks.root[t] += Vec3(0.5 * t / 25.0, 0.0, 0.0);
  const auto labels = label_contacts(tracks, FloorPlane{}, ContactThresholds{});
  for (int t = 2; t < 28; ++t) CHECK_FALSE(labels[t].stationary);
}

TEST_CASE("labeling validates its inputs") {
  FootTracks tracks = resting_tracks(10, 25.0);
  tracks.foot[3].pop_back();
  CHECK_THROWS_AS(label_contacts(tracks, FloorPlane{}, ContactThresholds{}),
                  ValidationError);
  FootTracks no_rate = resting_tracks(10, 25.0);
  no_rate.fps = 0.0;
  CHECK_THROWS_AS(label_contacts(no_rate, FloorPlane{}, ContactThresholds{}),
                  ValidationError);
}

TEST_CASE("labels recover the walk generator's ground truth") {
  const CompiledModel& model = default_model();
  SyntheticOptions options;
  options.frames = 150;
  const SyntheticMotion walk = generate_walk(model, options);
  const FootTracks tracks =
      reference_foot_tracks(model, walk.poses, walk.fps);
  const auto labels = label_contacts(tracks, model.model().floor,
                                     ContactThresholds{});
  REQUIRE(labels.size() == walk.contacts.size());
  long agree = 0, total = 0;
  for (size_t t = 0; t < labels.size(); ++t)
    for (int foot = 0; foot < 4; ++foot) {
      agree += labels[t].in_contact[foot] == walk.contacts[t].in_contact[foot];
      ++total;
    }
  CHECK(100.0 * agree / total >= 95.0);
}

TEST_CASE("floor collision reports the support point gap") {
  const CompiledModel& model = default_model();
  const VecX standing = standing_pose(model);

  // The standing pose grounds the lowest of the four foot proxies; that
  // link sits at exact tangency, which still counts as a collision.
  Kinematics kin = model.forward_kinematics(standing);
  int heel = model.model().foot_link_indices()[0];
  for (const int link : model.model().foot_link_indices())
    if (check_floor_collision(model, kin, link).signed_gap <
        check_floor_collision(model, kin, heel).signed_gap)
      heel = link;
  const FloorContact touching = check_floor_collision(model, kin, heel);
  CHECK(touching.colliding);
  CHECK(touching.signed_gap == doctest::Approx(0.0).epsilon(1e-12));

  VecX raised = standing;
  raised[2] += 0.01;
  kin = model.forward_kinematics(raised);
  const FloorContact above = check_floor_collision(model, kin, heel);
  CHECK_FALSE(above.colliding);
  CHECK(above.signed_gap == doctest::Approx(0.01));

  VecX sunk = standing;
  sunk[2] -= 0.03;
  kin = model.forward_kinematics(sunk);
  const FloorContact below = check_floor_collision(model, kin, heel);
  CHECK(below.colliding);
  CHECK(below.signed_gap == doctest::Approx(-0.03));
}

TEST_CASE("refinement drops labels far from the floor") {
  const CompiledModel& model = default_model();
  VecX raised = standing_pose(model);
  raised[2] += 0.2;
  const Kinematics kin = model.forward_kinematics(raised);
  ContactState labeled;
  labeled.stationary = true;
  labeled.in_contact = {true, true, true, true};
  const ContactState refined =
      refine_contacts(model, kin, labeled, ContactThresholds{});
  CHECK(refined.contact_count() == 0);
  CHECK(refined.stationary);  // refinement only touches the foot labels
}

TEST_CASE("refinement re-adds penetrating feet regardless of labels") {
  const CompiledModel& model = default_model();
  VecX sunk = standing_pose(model);
  sunk[2] -= 0.02;
  const Kinematics kin = model.forward_kinematics(sunk);
  const ContactState refined =
      refine_contacts(model, kin, ContactState{}, ContactThresholds{});
  CHECK(refined.contact_count() == 4);
}

TEST_CASE("a hair above the floor still counts as touching") {
  const CompiledModel& model = default_model();
  VecX hovering = standing_pose(model);
  hovering[2] += 0.5e-4;  // within the touch tolerance
  const ContactState refined = refine_contacts(
      model, model.forward_kinematics(hovering), ContactState{},
      ContactThresholds{});
  CHECK(refined.contact_count() == 4);

  VecX clear = standing_pose(model);
  clear[2] += 5e-3;  // past it
  const ContactState off = refine_contacts(
      model, model.forward_kinematics(clear), ContactState{},
      ContactThresholds{});
  CHECK(off.contact_count() == 0);
}

TEST_CASE("contact labels survive a csv round trip") {
  std::mt19937 rng(9);
  std::vector<ContactState> labels(25);
  for (ContactState& state : labels) {
    state.stationary = rng() & 1;
    for (int foot = 0; foot < 4; ++foot) state.in_contact[foot] = rng() & 1;
  }
  const auto back = load_contact_csv(save_contact_csv(labels));
  REQUIRE(back.size() == labels.size());
  for (size_t t = 0; t < labels.size(); ++t) {
    CHECK(back[t].stationary == labels[t].stationary);
    CHECK(back[t].in_contact == labels[t].in_contact);
  }
}

TEST_CASE("csv parsing rejects malformed rows") {
  CHECK_THROWS_AS(load_contact_csv("frame,stationary\n0,1\n"),
                  ValidationError);
  CHECK_THROWS_AS(load_contact_csv(""), ValidationError);
}

}  // TEST_SUITE
