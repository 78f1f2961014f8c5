#pragma once

#include <cstddef>
#include <vector>

#include "apfnav/frames.hpp"
#include "apfnav/mmg.hpp"

namespace apfnav {

/// Ordered waypoints in ship lengths; `k` indexes the start of the active
/// segment (k -> k+1).
struct WaypointPath {
  std::vector<Vec2> points;
  std::size_t k = 0;

  WaypointPath() = default;
  explicit WaypointPath(std::vector<Vec2> pts);

  const Vec2& from() const { return points[k]; }
  const Vec2& to() const { return points[k + 1]; }
  bool on_final_segment() const { return k + 2 == points.size(); }
  void validate() const;
};

struct ILOSParams {
  double Delta = 2.0;      // look-ahead distance, L
  double k_factor = 0.05;  // Ki = k_factor * Kp
  double R_tol = 3.0;      // waypoint acceptance radius, L

  double kp() const { return 1.0 / Delta; }
  double ki() const { return k_factor / Delta; }
  void validate() const;
};

struct ILOSState {
  double y_int = 0.0;
};

struct PDGains {
  double Kp = 3.5;
  double Kd = 4.0;
  void validate() const;
};

struct TrackErrors {
  double along = 0.0;  // x_e
  double cross = 0.0;  // y_e, positive to starboard of the path direction
};

double path_tangential_angle(const Vec2& wp_k, const Vec2& wp_k1);

TrackErrors track_errors(const Vec2& pos, const Vec2& wp_k, const Vec2& wp_k1);

double ilos_desired_heading(double pi_p, double y_e, double y_int, const ILOSParams& p);

double ilos_integrator_derivative(double y_e, double y_int, const ILOSParams& p);

bool should_switch_waypoint(const Vec2& pos, const Vec2& wp_k1, double R_tol);

/// PD heading law with psi_d_dot taken as zero, clamped to the rudder limit.
double pd_rudder_command(double psi, double psi_d, double r, const PDGains& g,
                         const ActuatorLimits& limits);

}  // namespace apfnav
