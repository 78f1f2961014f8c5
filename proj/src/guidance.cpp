#include "apfnav/guidance.hpp"

#include <algorithm>
#include <stdexcept>

namespace apfnav {

WaypointPath::WaypointPath(std::vector<Vec2> pts) : points(std::move(pts)) { validate(); }

void WaypointPath::validate() const {
  if (points.size() < 2) throw std::invalid_argument("waypoint path needs at least 2 points");
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    if (points[i] == points[i + 1]) {
      throw std::invalid_argument("waypoint path has coincident consecutive waypoints");
    }
  }
  if (k + 1 >= points.size()) throw std::invalid_argument("waypoint path: active segment out of range");
}

void ILOSParams::validate() const {
  if (!(Delta > 0.0)) throw std::invalid_argument("ilos.delta must be positive");
  if (!(R_tol > 0.0)) throw std::invalid_argument("ilos.r_tol must be positive");
  if (!std::isfinite(k_factor)) throw std::invalid_argument("ilos.k_factor must be finite");
}

void PDGains::validate() const {
  if (!(Kp > 0.0)) throw std::invalid_argument("pd.kp must be positive");
  if (!(Kd > 0.0)) throw std::invalid_argument("pd.kd must be positive");
}

double path_tangential_angle(const Vec2& wp_k, const Vec2& wp_k1) {
  if (wp_k == wp_k1) throw GeometryError("path_tangential_angle: coincident waypoints");
  return std::atan2(wp_k1.y - wp_k.y, wp_k1.x - wp_k.x);
}

TrackErrors track_errors(const Vec2& pos, const Vec2& wp_k, const Vec2& wp_k1) {
  const double pi_p = path_tangential_angle(wp_k, wp_k1);
  const Vec2 r = rotate(pos - wp_k, -pi_p);
  return {r.x, r.y};
}

double ilos_desired_heading(double pi_p, double y_e, double y_int, const ILOSParams& p) {
  return wrap_angle(pi_p - std::atan(p.kp() * y_e + p.ki() * y_int));
}

double ilos_integrator_derivative(double y_e, double y_int, const ILOSParams& p) {
  const double s = y_e + p.k_factor * y_int;
  return p.Delta * y_e / (p.Delta * p.Delta + s * s);
}

bool should_switch_waypoint(const Vec2& pos, const Vec2& wp_k1, double R_tol) {
  return distance(pos, wp_k1) <= R_tol;
}

double pd_rudder_command(double psi, double psi_d, double r, const PDGains& g,
                         const ActuatorLimits& limits) {
  const double e = wrap_angle(psi - psi_d);
  const double cmd = -g.Kp * e - g.Kd * r;
  return std::clamp(cmd, -limits.delta_max, limits.delta_max);
}

}  // namespace apfnav
