#pragma once

#include <array>
#include <optional>
#include <span>

#include "apfnav/frames.hpp"
#include "apfnav/mmg.hpp"

namespace apfnav {

struct StaticObstacle {
  Vec2 center;
  double R_obs = 0.5;
  void validate() const;
};

/// What one vessel knows about another vessel or a fixed disc at an instant.
/// `radius` is zero for vessels and R_obs for static discs.
struct ObstacleView {
  Vec2 position;
  Vec2 velocity;  // global frame, zero for static discs
  bool is_dynamic = false;
  double radius = 0.0;

  static ObstacleView from_static(const StaticObstacle& o) { return {o.center, {}, false, o.R_obs}; }
  static ObstacleView from_vessel(const DynamicState& s) {
    return {s.pose.position(), ground_velocity(s.pose.psi, s.nu), true, 0.0};
  }
};

struct InverseSquareParams {
  double k_att = 50.0;
  double k_rep = 200000.0;
  double d0 = 15.0;
  void validate() const;
};

struct HarmonicParams {
  double Lambda_sink = -100.0;
  double K_vor0 = -10.0;
  double R_safe = 15.0;
  double R_tol_vortex = 3.0;
  void validate() const;
};

struct Segment {
  Vec2 a;
  Vec2 b;
};

/// Two straight walls modelled as line sources that only act within
/// `activation_distance` of the wall.
struct ChannelBoundary {
  std::array<Segment, 2> walls;
  double activation_distance = 2.0;
  double Lambda_src = 10.0;

  void validate() const;
  /// Signed perpendicular distance of `pos` from wall `i`, positive on the
  /// channel side.
  double inside_distance(const Vec2& pos, std::size_t i) const;
  /// Unit normal of wall `i` pointing into the channel.
  Vec2 inward_normal(std::size_t i) const;
};

enum class HarmonicVariant { sink_vortex, modified_vortex };

/// Center distance minus R_obs. Throws GeometryError when not positive.
double obstacle_clearance(const Vec2& pos, const StaticObstacle& obs);

/// -grad(phi) of the inverse-square field (attractive goal well plus
/// repulsion from every obstacle within d0 clearance). Returns nullopt at a
/// stagnation point. Throws GeometryError if any clearance is non-positive.
std::optional<Vec2> inverse_square_gradient(const Vec2& pos, const Vec2& goal,
                                            std::span<const ObstacleView> obstacles,
                                            const InverseSquareParams& p);

Vec2 sink_velocity(const Vec2& pos, const Vec2& goal, double Lambda);
Vec2 vortex_velocity(const Vec2& pos, const Vec2& center, double K);

/// Bearing of `obs_pos` relative to the bow, wrapped to (-pi, pi].
double bearing_gamma(const Pose& own, const Vec2& obs_pos);

/// Velocity of the obstacle relative to own ship, global frame.
Vec2 relative_velocity(const DynamicState& own, const ObstacleView& obs);

struct RadialTangential {
  double v_r = 0.0;      // along the line of sight, negative when closing
  double v_theta = 0.0;  // perpendicular, positive clockwise (starboard side)
};

RadialTangential radial_tangential(const Vec2& V_rel, double gamma, double own_psi);

double vortex_scale_factor(double separation, double v_r, double R_safe);

/// Collision-risk gated vortex strength. Zero for overtaking geometry
/// (|gamma| > 5pi/8) and for obstacles already passing clear.
double modified_vortex_strength(const DynamicState& own, const ObstacleView& obs,
                                const HarmonicParams& p);

Vec2 boundary_source_velocity(const Vec2& pos, const ChannelBoundary& ch);

struct HarmonicField {
  Vec2 velocity;
  double max_abs_vortex = 0.0;  // largest |K| applied to any obstacle
};

/// Sum of sink, obstacle vortices and wall sources seen by `own`.
HarmonicField harmonic_field(const DynamicState& own, const Vec2& goal,
                             std::span<const ObstacleView> obstacles,
                             const ChannelBoundary* channel, const HarmonicParams& p,
                             HarmonicVariant variant);

struct HeadingDecision {
  std::optional<double> psi_d;  // nullopt: hold the previous setpoint
  double max_abs_vortex = 0.0;
};

HeadingDecision desired_heading_harmonic(const DynamicState& own, const Vec2& goal,
                                         std::span<const ObstacleView> obstacles,
                                         const ChannelBoundary* channel,
                                         const HarmonicParams& p, HarmonicVariant variant);

std::optional<double> desired_heading_inverse_square(const DynamicState& own, const Vec2& goal,
                                                     std::span<const ObstacleView> obstacles,
                                                     const InverseSquareParams& p);

/// True iff any obstacle center lies within R_safe.
bool reactive_active(const Vec2& own_pos, std::span<const ObstacleView> obstacles, double R_safe);

}  // namespace apfnav
