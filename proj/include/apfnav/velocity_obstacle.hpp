#pragma once

#include <span>

#include "apfnav/apf.hpp"
#include "apfnav/frames.hpp"
#include "apfnav/mmg.hpp"

namespace apfnav {

struct VOParams {
  double cone_radius = 2.5;  // collision threshold 2L plus 0.5L margin
  double heading_resolution = deg2rad(1.0);
  double max_course_change = deg2rad(90.0);
  double R_safe = 15.0;
  void validate() const;
};

/// Linear velocity obstacle of one target: the set of own velocities w with
/// (w - apex) inside the cone around `axis_angle`.
struct CollisionCone {
  Vec2 apex;               // target velocity
  double axis_angle = 0.0; // bearing of target from own ship
  double half_angle = 0.0;
  bool whole_plane = false;  // already inside the combined disc

  bool forbids(const Vec2& own_velocity) const;
};

CollisionCone collision_cone(const Vec2& own_pos, const Vec2& target_pos, const Vec2& target_vel,
                             double cone_radius);

/// Constant-speed course search around the goal bearing. Candidates are
/// enumerated 0, +res, -res, +2res, ... (starboard first) and the first one
/// clear of every cone wins; otherwise the one violating the fewest cones.
double vo_desired_heading(const DynamicState& own, const Vec2& goal,
                          std::span<const ObstacleView> targets, const VOParams& p);

}  // namespace apfnav
