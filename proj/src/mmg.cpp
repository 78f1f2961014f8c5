#include "apfnav/mmg.hpp"

#include <fstream>
#include <stdexcept>

namespace apfnav {

namespace {

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw std::invalid_argument(std::string(name) + " must be positive and finite");
  }
}

// n^2 * K_T(J) written so that it stays finite at n = 0.
double thrust_n2kt(double u_p, double n_prop, const HydroCoeffs& c) {
  return c.k0 * n_prop * n_prop + c.k1 * n_prop * u_p / c.D_p + c.k2 * u_p * u_p / (c.D_p * c.D_p);
}

double rudder_lift_slope(const HydroCoeffs& c) { return 6.13 * c.aspect_ratio / (c.aspect_ratio + 2.25); }

}  // namespace

void ShipParams::validate() const {
  require_positive(L, "ship.L");
  require_positive(B, "ship.B");
  require_positive(d_em, "ship.d_em");
  require_positive(U_des, "ship.U_des");
  require_positive(rho_w, "ship.rho_w");
  require_positive(displacement, "ship.displacement");
  if (!std::isfinite(x_G)) throw std::invalid_argument("ship.x_G must be finite");
}

void MassParams::validate() const {
  require_positive(m, "mass.m");
  require_positive(m_x, "mass.m_x");
  require_positive(m_y, "mass.m_y");
  require_positive(I_zz, "mass.I_zz");
  require_positive(J_zz, "mass.J_zz");
  if (!(sway_yaw_determinant() > 0.0)) {
    throw std::invalid_argument("mass: sway-yaw inertia matrix is singular");
  }
}

void HydroCoeffs::validate() const {
  if (schema_version.empty()) throw std::invalid_argument("coefficients: missing schema_version");
  const double all[] = {R0,  X_vv,   X_vr,  X_rr,  X_vvvv, Y_v,   Y_r,   Y_vvv, Y_vvr, Y_vrr,
                        Y_rrr, N_v,  N_r,   N_vvv, N_vvr,  N_vrr, N_rrr, D_p,   draft, t_P,
                        w_P0, k0,   k1,    k2,    A_R,    aspect_ratio, t_R, a_H, x_H, x_R,
                        gamma_R, l_R, epsilon, kappa, eta};
  for (double v : all) {
    if (!std::isfinite(v)) throw std::invalid_argument("coefficients: non-finite entry");
  }
  require_positive(D_p, "propeller.D_p");
  require_positive(draft, "propeller.draft");
  require_positive(A_R, "rudder.A_R");
  require_positive(aspect_ratio, "rudder.aspect_ratio");
}

void to_json(nlohmann::json& j, const HydroCoeffs& c) {
  j = nlohmann::json{
      {"schema_version", c.schema_version},
      {"hull",
       {{"R0", c.R0},       {"X_vv", c.X_vv},   {"X_vr", c.X_vr},   {"X_rr", c.X_rr},
        {"X_vvvv", c.X_vvvv}, {"Y_v", c.Y_v},     {"Y_r", c.Y_r},     {"Y_vvv", c.Y_vvv},
        {"Y_vvr", c.Y_vvr}, {"Y_vrr", c.Y_vrr}, {"Y_rrr", c.Y_rrr}, {"N_v", c.N_v},
        {"N_r", c.N_r},     {"N_vvv", c.N_vvv}, {"N_vvr", c.N_vvr}, {"N_vrr", c.N_vrr},
        {"N_rrr", c.N_rrr}}},
      {"propeller",
       {{"D_p", c.D_p}, {"draft", c.draft}, {"t_P", c.t_P}, {"w_P0", c.w_P0},
        {"k0", c.k0}, {"k1", c.k1}, {"k2", c.k2}}},
      {"rudder",
       {{"A_R", c.A_R}, {"aspect_ratio", c.aspect_ratio}, {"t_R", c.t_R}, {"a_H", c.a_H},
        {"x_H", c.x_H}, {"x_R", c.x_R}, {"gamma_R", c.gamma_R}, {"l_R", c.l_R},
        {"epsilon", c.epsilon}, {"kappa", c.kappa}, {"eta", c.eta}}}};
}

void from_json(const nlohmann::json& j, HydroCoeffs& c) {
  j.at("schema_version").get_to(c.schema_version);
  const auto& h = j.at("hull");
  h.at("R0").get_to(c.R0);
  h.at("X_vv").get_to(c.X_vv);
  h.at("X_vr").get_to(c.X_vr);
  h.at("X_rr").get_to(c.X_rr);
  h.at("X_vvvv").get_to(c.X_vvvv);
  h.at("Y_v").get_to(c.Y_v);
  h.at("Y_r").get_to(c.Y_r);
  h.at("Y_vvv").get_to(c.Y_vvv);
  h.at("Y_vvr").get_to(c.Y_vvr);
  h.at("Y_vrr").get_to(c.Y_vrr);
  h.at("Y_rrr").get_to(c.Y_rrr);
  h.at("N_v").get_to(c.N_v);
  h.at("N_r").get_to(c.N_r);
  h.at("N_vvv").get_to(c.N_vvv);
  h.at("N_vvr").get_to(c.N_vvr);
  h.at("N_vrr").get_to(c.N_vrr);
  h.at("N_rrr").get_to(c.N_rrr);
  const auto& p = j.at("propeller");
  p.at("D_p").get_to(c.D_p);
  p.at("draft").get_to(c.draft);
  p.at("t_P").get_to(c.t_P);
  p.at("w_P0").get_to(c.w_P0);
  p.at("k0").get_to(c.k0);
  p.at("k1").get_to(c.k1);
  p.at("k2").get_to(c.k2);
  const auto& r = j.at("rudder");
  r.at("A_R").get_to(c.A_R);
  r.at("aspect_ratio").get_to(c.aspect_ratio);
  r.at("t_R").get_to(c.t_R);
  r.at("a_H").get_to(c.a_H);
  r.at("x_H").get_to(c.x_H);
  r.at("x_R").get_to(c.x_R);
  r.at("gamma_R").get_to(c.gamma_R);
  r.at("l_R").get_to(c.l_R);
  r.at("epsilon").get_to(c.epsilon);
  r.at("kappa").get_to(c.kappa);
  r.at("eta").get_to(c.eta);
}

ActuatorLimits ActuatorLimits::from_ship(const ShipParams& ship) {
  ActuatorLimits lim;
  lim.delta_max = deg2rad(35.0);
  // 5 deg/s full scale, time scaled by L / U_des
  lim.delta_rate_max = deg2rad(5.0) * ship.L / ship.U_des;
  lim.T_delta = 1.0;
  return lim;
}

void ActuatorLimits::validate() const {
  require_positive(delta_max, "limits.delta_max");
  require_positive(delta_rate_max, "limits.delta_rate_max");
  require_positive(T_delta, "limits.T_delta");
}

Forces hull_forces(const BodyVelocity& nu, const HydroCoeffs& c) {
  const double u = nu.u, v = nu.v, r = nu.r;
  const double v2 = v * v, r2 = r * r;
  Forces f;
  f.X = -c.R0 * u * std::abs(u) + c.X_vv * v2 + c.X_vr * v * r + c.X_rr * r2 + c.X_vvvv * v2 * v2;
  f.Y = c.Y_v * u * v + c.Y_r * u * r + c.Y_vvv * v2 * v + c.Y_vvr * v2 * r + c.Y_vrr * v * r2 +
        c.Y_rrr * r2 * r;
  f.N = c.N_v * u * v + c.N_r * u * r + c.N_vvv * v2 * v + c.N_vvr * v2 * r + c.N_vrr * v * r2 +
        c.N_rrr * r2 * r;
  return f;
}

double propeller_force(double u, double n_prop, const HydroCoeffs& c) {
  const double u_p = (1.0 - c.w_P0) * u;
  const double d4 = c.D_p * c.D_p * c.D_p * c.D_p;
  return 2.0 * (1.0 - c.t_P) * d4 / c.draft * thrust_n2kt(u_p, n_prop, c);
}

Forces rudder_forces(const BodyVelocity& nu, double delta, double n_prop, const HydroCoeffs& c) {
  const double u_p = (1.0 - c.w_P0) * nu.u;

  // Propeller slipstream acceleration of the rudder inflow.
  double slip = 0.0;
  if (u_p > 1e-9) {
    slip = 8.0 * thrust_n2kt(u_p, n_prop, c) * c.D_p * c.D_p / (kPi * u_p * u_p);
  }
  const double root = std::sqrt(std::max(0.0, 1.0 + slip));
  const double a = 1.0 + c.kappa * (root - 1.0);
  const double u_r = c.epsilon * u_p * std::sqrt(c.eta * a * a + (1.0 - c.eta));
  const double v_r = c.gamma_R * (-nu.v - c.l_R * nu.r);

  const double alpha = delta - std::atan2(v_r, u_r);
  const double f_n = c.A_R * rudder_lift_slope(c) * (u_r * u_r + v_r * v_r) * std::sin(alpha);

  Forces f;
  f.X = -(1.0 - c.t_R) * f_n * std::sin(delta);
  f.Y = -(1.0 + c.a_H) * f_n * std::cos(delta);
  f.N = -(c.x_R + c.a_H * c.x_H) * f_n * std::cos(delta);
  return f;
}

Forces total_forces(const DynamicState& s, const HydroCoeffs& c) {
  const Forces h = hull_forces(s.nu, c);
  const Forces r = rudder_forces(s.nu, s.delta, s.n_prop, c);
  const double x_p = propeller_force(s.nu.u, s.n_prop, c);
  return {h.X + r.X + x_p, h.Y + r.Y, h.N + r.N};
}

Accelerations rigid_body_accelerations(const BodyVelocity& nu, const Forces& f, const MassParams& m) {
  const double mx_g = m.m * m.x_G;
  Accelerations a;
  a.u_dot = (f.X + m.m * nu.v * nu.r + mx_g * nu.r * nu.r) / (m.m + m.m_x);

  // [[m+m_y, m x_G], [m x_G, I_zz+J_zz]] [v_dot, r_dot]^T = rhs
  const double a11 = m.m + m.m_y;
  const double a12 = mx_g;
  const double a22 = m.I_zz + m.J_zz;
  const double det = a11 * a22 - a12 * a12;
  if (!(std::abs(det) > 0.0)) {
    throw NumericalError("rigid_body_accelerations: singular sway-yaw matrix");
  }
  const double b1 = f.Y - m.m * nu.u * nu.r;
  const double b2 = f.N - mx_g * nu.u * nu.r;
  a.v_dot = (a22 * b1 - a12 * b2) / det;
  a.r_dot = (a11 * b2 - a12 * b1) / det;
  return a;
}

std::array<double, 6> state_derivative(const DynamicState& s, const HydroCoeffs& c,
                                       const MassParams& m) {
  const GlobalRates g = body_to_global(s.pose, s.nu);
  const Accelerations a = rigid_body_accelerations(s.nu, total_forces(s, c), m);
  return {g.x_dot, g.y_dot, g.psi_dot, a.u_dot, a.v_dot, a.r_dot};
}

double rudder_rate(double delta, double delta_c, const ActuatorLimits& lim) {
  const double rate = (delta_c - delta) / lim.T_delta;
  if (std::abs(rate) <= lim.delta_rate_max) return rate;
  return std::copysign(lim.delta_rate_max, rate);
}

double self_propulsion_rpm(double target_u, const HydroCoeffs& c) {
  if (!(target_u > 0.0 && target_u <= 1.2)) {
    throw std::invalid_argument("self_propulsion_rpm: target speed outside (0, 1.2]");
  }
  auto residual = [&](double n) {
    return propeller_force(target_u, n, c) + hull_forces({target_u, 0.0, 0.0}, c).X;
  };

  double lo = 0.0;
  double hi = 1.0;
  if (residual(lo) >= 0.0) {
    throw std::runtime_error("self_propulsion_rpm: no sign change (thrust exceeds resistance at n = 0)");
  }
  int expansions = 0;
  while (residual(hi) <= 0.0) {
    hi *= 2.0;
    if (++expansions > 60) {
      throw std::runtime_error("self_propulsion_rpm: no sign change in bracket");
    }
  }
  while (hi - lo > 1e-8 * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    if (residual(mid) > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

ShipModel ShipModel::kcs() {
  ShipModel model;
  model.mass.x_G = model.ship.x_G;
  model.limits = ActuatorLimits::from_ship(model.ship);
  return model;
}

nlohmann::json ship_model_to_json(const ShipModel& model) {
  nlohmann::json j = model.coeffs;
  const auto& s = model.ship;
  j["ship"] = {{"L", s.L},         {"B", s.B},           {"d_em", s.d_em},
               {"U_des", s.U_des}, {"x_G", s.x_G},       {"rho_w", s.rho_w},
               {"displacement", s.displacement}};
  const auto& m = model.mass;
  j["mass"] = {{"m", m.m}, {"m_x", m.m_x}, {"m_y", m.m_y}, {"I_zz", m.I_zz}, {"J_zz", m.J_zz}};
  return j;
}

ShipModel ship_model_from_json(const nlohmann::json& j) {
  ShipModel model;
  j.get_to(model.coeffs);
  const auto& s = j.at("ship");
  s.at("L").get_to(model.ship.L);
  s.at("B").get_to(model.ship.B);
  s.at("d_em").get_to(model.ship.d_em);
  s.at("U_des").get_to(model.ship.U_des);
  s.at("x_G").get_to(model.ship.x_G);
  s.at("rho_w").get_to(model.ship.rho_w);
  s.at("displacement").get_to(model.ship.displacement);
  const auto& m = j.at("mass");
  m.at("m").get_to(model.mass.m);
  m.at("m_x").get_to(model.mass.m_x);
  m.at("m_y").get_to(model.mass.m_y);
  m.at("I_zz").get_to(model.mass.I_zz);
  m.at("J_zz").get_to(model.mass.J_zz);
  model.mass.x_G = model.ship.x_G;
  model.limits = ActuatorLimits::from_ship(model.ship);

  model.ship.validate();
  model.mass.validate();
  model.coeffs.validate();
  model.limits.validate();
  return model;
}

ShipModel ShipModel::load(const std::filesystem::path& coeff_file) {
  std::ifstream in(coeff_file);
  if (!in) throw std::runtime_error("cannot open coefficient file: " + coeff_file.string());
  return ship_model_from_json(nlohmann::json::parse(in));
}

}  // namespace apfnav
