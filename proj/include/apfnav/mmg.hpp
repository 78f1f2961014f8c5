#pragma once

#include <array>
#include <filesystem>
#include <string>

#include "json.hpp"

#include "apfnav/frames.hpp"

namespace apfnav {

/// Full-scale particulars. Only used at the I/O boundary and to derive
/// nondimensional limits; the simulation itself runs in prime-II units.
struct ShipParams {
  double L = 230.0;            // m, length between perpendiculars
  double B = 32.2;             // m
  double d_em = 10.8;          // m, draft
  double U_des = 12.347;       // m/s
  double x_G = -3.408 / 230.0; // nondimensional LCG
  double rho_w = 1025.0;       // kg/m^3
  double displacement = 52030.0;  // m^3

  void validate() const;
};

/// Nondimensional rigid-body and added-mass terms (prime-II).
struct MassParams {
  double m = 0.182280;
  double m_x = 0.006269;
  double m_y = 0.155164;
  double I_zz = 0.011432;
  double J_zz = 0.009268;
  double x_G = -3.408 / 230.0;

  /// Determinant of the coupled sway-yaw inertia matrix.
  double sway_yaw_determinant() const {
    return (m + m_y) * (I_zz + J_zz) - (m * x_G) * (m * x_G);
  }
  void validate() const;
};

/// Hull polynomial, propeller open-water fit and rudder interaction
/// coefficients. All forces are normalized by 0.5*rho*U_des^2*L*d and moments
/// by 0.5*rho*U_des^2*L^2*d; velocities by U_des and lengths by L.
struct HydroCoeffs {
  std::string schema_version = "kcs-mmg/1";

  // Hull: X_H = -R0*u|u| + X_vv v^2 + X_vr v r + X_rr r^2 + X_vvvv v^4
  //       Y_H = Y_v u v + Y_r u r + Y_vvv v^3 + Y_vvr v^2 r + Y_vrr v r^2 + Y_rrr r^3
  //       N_H likewise with N_* coefficients.
  double R0 = 0.0142;
  double X_vv = -0.040;
  double X_vr = 0.002;
  double X_rr = 0.011;
  double X_vvvv = 0.771;
  double Y_v = -0.315;
  double Y_r = 0.083;
  double Y_vvv = -1.607;
  double Y_vvr = 0.379;
  double Y_vrr = -0.391;
  double Y_rrr = 0.008;
  double N_v = -0.137;
  double N_r = -0.049;
  double N_vvv = -0.030;
  double N_vvr = -0.294;
  double N_vrr = 0.055;
  double N_rrr = -0.013;

  // Propeller: K_T(J) = k0 + k1 J + k2 J^2, J = u_P / (n D_p)
  double D_p = 7.9 / 230.0;   // propeller diameter / L
  double draft = 10.8 / 230.0;  // d / L
  double t_P = 0.15;
  double w_P0 = 0.30;
  double k0 = 0.5453;
  double k1 = -0.4399;
  double k2 = -0.0379;

  // Rudder (standard MMG normal-force model)
  double A_R = 54.45 / (230.0 * 10.8);  // rudder area / (L d)
  double aspect_ratio = 1.827;
  double t_R = 0.387;
  double a_H = 0.312;
  double x_H = -0.464;
  double x_R = -0.5;
  double gamma_R = 0.5;
  double l_R = -0.755;
  double epsilon = 1.09;
  double kappa = 0.5;
  double eta = 7.9 / 9.86;  // D_p / rudder span

  void validate() const;
  bool operator==(const HydroCoeffs&) const = default;
};

void to_json(nlohmann::json& j, const HydroCoeffs& c);
void from_json(const nlohmann::json& j, HydroCoeffs& c);

struct ActuatorLimits {
  double delta_max = deg2rad(35.0);
  double delta_rate_max = 0.0;  // rad per unit nondimensional time
  double T_delta = 1.0;

  /// 35 deg saturation, 5 deg/s full-scale rate and unit time constant.
  static ActuatorLimits from_ship(const ShipParams& ship);
  void validate() const;
};

struct DynamicState {
  Pose pose;
  BodyVelocity nu;
  double delta = 0.0;   // actual rudder angle, rad
  double n_prop = 0.0;  // propeller revolutions, nondimensional n*L/U_des
};

struct Forces {
  double X = 0.0;
  double Y = 0.0;
  double N = 0.0;
};

Forces hull_forces(const BodyVelocity& nu, const HydroCoeffs& c);
double propeller_force(double u, double n_prop, const HydroCoeffs& c);
Forces rudder_forces(const BodyVelocity& nu, double delta, double n_prop, const HydroCoeffs& c);
Forces total_forces(const DynamicState& s, const HydroCoeffs& c);

struct Accelerations {
  double u_dot = 0.0;
  double v_dot = 0.0;
  double r_dot = 0.0;
};

/// Solves the surge equation and the coupled sway-yaw 2x2 system for given
/// external forces.
Accelerations rigid_body_accelerations(const BodyVelocity& nu, const Forces& f, const MassParams& m);

/// d/dt of (x, y, psi, u, v, r).
std::array<double, 6> state_derivative(const DynamicState& s, const HydroCoeffs& c,
                                       const MassParams& m);

/// First-order rudder servo with rate saturation.
double rudder_rate(double delta, double delta_c, const ActuatorLimits& lim);

/// Propeller revolutions that balance hull resistance on a straight run at
/// `target_u`. Bisection to 1e-8.
double self_propulsion_rpm(double target_u, const HydroCoeffs& c);

/// Everything needed to integrate one vessel. Immutable once built.
struct ShipModel {
  ShipParams ship;
  MassParams mass;
  HydroCoeffs coeffs;
  ActuatorLimits limits;

  static ShipModel kcs();
  static ShipModel load(const std::filesystem::path& coeff_file);
};

nlohmann::json ship_model_to_json(const ShipModel& model);
ShipModel ship_model_from_json(const nlohmann::json& j);

}  // namespace apfnav
