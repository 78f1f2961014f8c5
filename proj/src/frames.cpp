#include "apfnav/frames.hpp"

namespace apfnav {

Matrix3 rotation_matrix(double psi) {
  const double c = std::cos(psi);
  const double s = std::sin(psi);
  return {{{c, -s, 0.0}, {s, c, 0.0}, {0.0, 0.0, 1.0}}};
}

double wrap_angle(double a) {
  double w = std::remainder(a, 2.0 * kPi);
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

Vec2 rotate(const Vec2& v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

GlobalRates body_to_global(const Pose& pose, const BodyVelocity& nu) {
  const Vec2 g = ground_velocity(pose.psi, nu);
  return {g.x, g.y, nu.r};
}

}  // namespace apfnav
