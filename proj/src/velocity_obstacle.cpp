#include "apfnav/velocity_obstacle.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace apfnav {

void VOParams::validate() const {
  if (!(heading_resolution > 0.0)) throw std::invalid_argument("vo.heading_resolution must be positive");
  if (!(cone_radius > 0.0)) throw std::invalid_argument("vo.cone_radius must be positive");
  if (!(max_course_change >= 0.0)) throw std::invalid_argument("vo.max_course_change must be non-negative");
  if (!(R_safe > 0.0)) throw std::invalid_argument("vo.r_safe must be positive");
}

bool CollisionCone::forbids(const Vec2& own_velocity) const {
  if (whole_plane) return true;
  const Vec2 rel = own_velocity - apex;
  if (rel.norm() == 0.0) return false;
  return std::abs(wrap_angle(rel.angle() - axis_angle)) <= half_angle;
}

CollisionCone collision_cone(const Vec2& own_pos, const Vec2& target_pos, const Vec2& target_vel,
                             double cone_radius) {
  CollisionCone cone;
  cone.apex = target_vel;
  const Vec2 axis = target_pos - own_pos;
  const double sep = axis.norm();
  if (sep <= cone_radius) {
    cone.whole_plane = true;
    return cone;
  }
  cone.axis_angle = axis.angle();
  cone.half_angle = std::asin(cone_radius / sep);
  return cone;
}

double vo_desired_heading(const DynamicState& own, const Vec2& goal,
                          std::span<const ObstacleView> targets, const VOParams& p) {
  const Vec2 pos = own.pose.position();
  const double goal_bearing = (goal - pos).angle();
  const double speed = ground_velocity(own.pose.psi, own.nu).norm();
  if (!(speed > 0.0)) throw std::invalid_argument("vo_desired_heading: own speed must be positive");

  std::vector<CollisionCone> cones;
  cones.reserve(targets.size());
  for (const auto& t : targets) {
    if (distance(pos, t.position) > p.R_safe) continue;
    cones.push_back(collision_cone(pos, t.position, t.velocity, p.cone_radius + t.radius));
  }
  if (cones.empty()) return goal_bearing;

  const int steps = static_cast<int>(std::floor(p.max_course_change / p.heading_resolution + 1e-9));
  double best_heading = goal_bearing;
  std::size_t best_violations = std::numeric_limits<std::size_t>::max();

  for (int i = 0; i <= steps; ++i) {
    for (int side : {+1, -1}) {
      if (i == 0 && side < 0) continue;
      const double heading = wrap_angle(goal_bearing + side * i * p.heading_resolution);
      const Vec2 w{speed * std::cos(heading), speed * std::sin(heading)};
      std::size_t violations = 0;
      for (const auto& c : cones) {
        if (c.forbids(w)) ++violations;
      }
      if (violations == 0) return heading;
      if (violations < best_violations) {
        best_violations = violations;
        best_heading = heading;
      }
    }
  }
  return best_heading;
}

}  // namespace apfnav
