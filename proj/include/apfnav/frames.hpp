#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>

namespace apfnav {

inline constexpr double kPi = std::numbers::pi;

inline constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Raised when an integrator or model evaluation produces NaN/Inf.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised for degenerate geometry (coincident points, positions inside discs).
class GeometryError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Planar vector. Whether it lives in the global or a body frame is up to the
/// caller; every function documents which one it expects.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr bool operator==(const Vec2&) const = default;

  double norm() const { return std::hypot(x, y); }
  constexpr double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  constexpr double cross(const Vec2& o) const { return x * o.y - y * o.x; }
  double angle() const { return std::atan2(y, x); }
  bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

inline constexpr Vec2 operator*(double s, const Vec2& v) { return v * s; }

inline double distance(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

/// Position in ship lengths and heading in radians from the global x-axis.
/// The global frame is z-down, so positive heading turns are to starboard.
struct Pose {
  double x = 0.0;
  double y = 0.0;
  double psi = 0.0;

  Vec2 position() const { return {x, y}; }
  bool operator==(const Pose&) const = default;
};

/// Surge, sway and yaw rate, nondimensional (prime-II).
struct BodyVelocity {
  double u = 0.0;
  double v = 0.0;
  double r = 0.0;

  bool operator==(const BodyVelocity&) const = default;
};

using Matrix3 = std::array<std::array<double, 3>, 3>;

/// Rotation taking body-frame vectors to the global frame.
Matrix3 rotation_matrix(double psi);

/// Maps any finite angle to (-pi, pi].
double wrap_angle(double a);

/// Rotates a planar vector counter-clockwise (in the x-y axes sense) by `angle`.
Vec2 rotate(const Vec2& v, double angle);

struct GlobalRates {
  double x_dot = 0.0;
  double y_dot = 0.0;
  double psi_dot = 0.0;
};

GlobalRates body_to_global(const Pose& pose, const BodyVelocity& nu);

/// Global-frame velocity over ground of a body moving with `nu` at heading `psi`.
inline Vec2 ground_velocity(double psi, const BodyVelocity& nu) {
  const double c = std::cos(psi);
  const double s = std::sin(psi);
  return {c * nu.u - s * nu.v, s * nu.u + c * nu.v};
}

/// One classical Runge-Kutta step of s' = f(s). `f` is called as
/// `f(const std::array<double, N>&) -> std::array<double, N>`.
template <std::size_t N, class F>
std::array<double, N> rk4_step(F&& f, const std::array<double, N>& s, double dt) {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("rk4_step: dt must be positive");
  }
  auto checked = [&](const std::array<double, N>& x) {
    std::array<double, N> d = f(x);
    for (double di : d) {
      if (!std::isfinite(di)) {
        throw NumericalError("rk4_step: non-finite derivative");
      }
    }
    return d;
  };
  auto axpy = [](const std::array<double, N>& x, const std::array<double, N>& k, double h) {
    std::array<double, N> out{};
    for (std::size_t i = 0; i < N; ++i) out[i] = x[i] + h * k[i];
    return out;
  };

  const auto k1 = checked(s);
  const auto k2 = checked(axpy(s, k1, 0.5 * dt));
  const auto k3 = checked(axpy(s, k2, 0.5 * dt));
  const auto k4 = checked(axpy(s, k3, dt));

  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    out[i] = s[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return out;
}

}  // namespace apfnav
