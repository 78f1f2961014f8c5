#include "apfnav/apf.hpp"

#include <algorithm>
#include <stdexcept>

namespace apfnav {

namespace {
constexpr double kOvertakingBearing = 5.0 * kPi / 8.0;
}

void StaticObstacle::validate() const {
  if (!(R_obs > 0.0)) throw std::invalid_argument("static obstacle radius must be positive");
  if (!center.finite()) throw std::invalid_argument("static obstacle center must be finite");
}

void InverseSquareParams::validate() const {
  if (!(k_att > 0.0)) throw std::invalid_argument("inverse_square.k_att must be positive");
  if (!(k_rep > 0.0)) throw std::invalid_argument("inverse_square.k_rep must be positive");
  if (!(d0 > 0.0)) throw std::invalid_argument("inverse_square.d0 must be positive");
}

void HarmonicParams::validate() const {
  if (!(Lambda_sink < 0.0)) throw std::invalid_argument("harmonic.lambda_sink must be negative");
  if (!(R_safe > 0.0)) throw std::invalid_argument("harmonic.r_safe must be positive");
  if (!(R_tol_vortex > 0.0)) throw std::invalid_argument("harmonic.r_tol_vortex must be positive");
  if (!std::isfinite(K_vor0)) throw std::invalid_argument("harmonic.k_vor0 must be finite");
}

void ChannelBoundary::validate() const {
  if (!(activation_distance > 0.0)) {
    throw std::invalid_argument("channel.activation_distance must be positive");
  }
  if (!(Lambda_src > 0.0)) throw std::invalid_argument("channel.lambda_src must be positive");
  for (const auto& w : walls) {
    if (w.a == w.b) throw std::invalid_argument("channel wall has zero length");
  }
}

double ChannelBoundary::inside_distance(const Vec2& pos, std::size_t i) const {
  return (pos - walls[i].a).dot(inward_normal(i));
}

Vec2 ChannelBoundary::inward_normal(std::size_t i) const {
  const Segment& w = walls[i];
  const Vec2 dir = (w.b - w.a) * (1.0 / (w.b - w.a).norm());
  Vec2 n{-dir.y, dir.x};
  const Segment& other = walls[1 - i];
  const Vec2 mid = (other.a + other.b) * 0.5;
  if ((mid - w.a).dot(n) < 0.0) n = -n;
  return n;
}

double obstacle_clearance(const Vec2& pos, const StaticObstacle& obs) {
  const double rho = distance(pos, obs.center) - obs.R_obs;
  if (!(rho > 0.0)) throw GeometryError("obstacle_clearance: position inside obstacle");
  return rho;
}

std::optional<Vec2> inverse_square_gradient(const Vec2& pos, const Vec2& goal,
                                            std::span<const ObstacleView> obstacles,
                                            const InverseSquareParams& p) {
  Vec2 g = (pos - goal) * (-p.k_att);
  for (const auto& o : obstacles) {
    const Vec2 d = pos - o.position;
    const double center = d.norm();
    const double rho = center - o.radius;
    if (!(rho > 0.0)) throw GeometryError("inverse_square_gradient: position inside obstacle");
    if (rho > p.d0) continue;
    const double gain = 2.0 * p.k_rep / (rho * rho * center) * (1.0 / rho - 1.0 / p.d0);
    g += d * gain;
  }
  if (!(g.norm() > 0.0)) return std::nullopt;
  return g;
}

Vec2 sink_velocity(const Vec2& pos, const Vec2& goal, double Lambda) {
  const Vec2 d = pos - goal;
  const double r2 = d.dot(d);
  if (!(r2 > 0.0)) throw GeometryError("sink_velocity: position at the sink");
  return d * (Lambda / (2.0 * kPi * r2));
}

Vec2 vortex_velocity(const Vec2& pos, const Vec2& center, double K) {
  const Vec2 d = pos - center;
  const double r2 = d.dot(d);
  if (!(r2 > 0.0)) throw GeometryError("vortex_velocity: position at the vortex center");
  return Vec2{-d.y, d.x} * (K / (2.0 * kPi * r2));
}

double bearing_gamma(const Pose& own, const Vec2& obs_pos) {
  const Vec2 d = obs_pos - own.position();
  if (d.x == 0.0 && d.y == 0.0) throw GeometryError("bearing_gamma: coincident positions");
  return wrap_angle(d.angle() - own.psi);
}

Vec2 relative_velocity(const DynamicState& own, const ObstacleView& obs) {
  const Vec2 own_v = ground_velocity(own.pose.psi, own.nu);
  if (!obs.is_dynamic) return -own_v;
  return obs.velocity - own_v;
}

RadialTangential radial_tangential(const Vec2& V_rel, double gamma, double own_psi) {
  const Vec2 b = rotate(V_rel, -own_psi);
  const double c = std::cos(gamma);
  const double s = std::sin(gamma);
  return {c * b.x + s * b.y, -s * b.x + c * b.y};
}

double vortex_scale_factor(double separation, double v_r, double R_safe) {
  if (!(separation > 0.0)) throw std::invalid_argument("vortex_scale_factor: separation must be positive");
  return std::max(1.0, 2.0 - separation / R_safe - v_r);
}

double modified_vortex_strength(const DynamicState& own, const ObstacleView& obs,
                                const HarmonicParams& p) {
  const double separation = distance(own.pose.position(), obs.position);
  const double gamma = bearing_gamma(own.pose, obs.position);
  if (std::abs(gamma) > kOvertakingBearing) return 0.0;

  const auto rt = radial_tangential(relative_velocity(own, obs), gamma, own.pose.psi);
  const double threshold = -2.0 * p.R_tol_vortex / separation * rt.v_r;
  if (rt.v_theta > threshold) return 0.0;

  return vortex_scale_factor(separation, rt.v_r, p.R_safe) * p.K_vor0;
}

Vec2 boundary_source_velocity(const Vec2& pos, const ChannelBoundary& ch) {
  Vec2 v;
  for (std::size_t i = 0; i < 2; ++i) {
    const double dist = ch.inside_distance(pos, i);
    if (!(dist > 0.0)) throw GeometryError("boundary_source_velocity: position outside channel");
    if (dist > ch.activation_distance) continue;
    v += ch.inward_normal(i) * (ch.Lambda_src / (2.0 * kPi * dist));
  }
  return v;
}

HarmonicField harmonic_field(const DynamicState& own, const Vec2& goal,
                             std::span<const ObstacleView> obstacles,
                             const ChannelBoundary* channel, const HarmonicParams& p,
                             HarmonicVariant variant) {
  const Vec2 pos = own.pose.position();
  HarmonicField out;
  out.velocity = sink_velocity(pos, goal, p.Lambda_sink);
  for (const auto& o : obstacles) {
    if (distance(pos, o.position) > p.R_safe) continue;
    const double K = variant == HarmonicVariant::modified_vortex ? modified_vortex_strength(own, o, p)
                                                                 : p.K_vor0;
    out.max_abs_vortex = std::max(out.max_abs_vortex, std::abs(K));
    if (K != 0.0) out.velocity += vortex_velocity(pos, o.position, K);
  }
  if (channel != nullptr) out.velocity += boundary_source_velocity(pos, *channel);
  return out;
}

HeadingDecision desired_heading_harmonic(const DynamicState& own, const Vec2& goal,
                                         std::span<const ObstacleView> obstacles,
                                         const ChannelBoundary* channel,
                                         const HarmonicParams& p, HarmonicVariant variant) {
  const HarmonicField f = harmonic_field(own, goal, obstacles, channel, p, variant);
  HeadingDecision d;
  d.max_abs_vortex = f.max_abs_vortex;
  if (f.velocity.norm() > 0.0) d.psi_d = f.velocity.angle();
  return d;
}

std::optional<double> desired_heading_inverse_square(const DynamicState& own, const Vec2& goal,
                                                     std::span<const ObstacleView> obstacles,
                                                     const InverseSquareParams& p) {
  const auto g = inverse_square_gradient(own.pose.position(), goal, obstacles, p);
  if (!g) return std::nullopt;
  return g->angle();
}

bool reactive_active(const Vec2& own_pos, std::span<const ObstacleView> obstacles, double R_safe) {
  return std::any_of(obstacles.begin(), obstacles.end(),
                     [&](const ObstacleView& o) { return distance(own_pos, o.position) <= R_safe; });
}

}  // namespace apfnav
