#include "apfnav/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <tuple>

namespace apfnav {

namespace {

constexpr double kSpeedCap = 2.0;

struct PairKey {
  int a;
  int b;
  bool b_is_static;
};

double trapezoid(const std::vector<Sample>& s, double (*value)(const Sample&)) {
  double acc = 0.0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    acc += 0.5 * (value(s[i - 1]) + value(s[i])) * (s[i].t - s[i - 1].t);
  }
  return acc;
}

}  // namespace

std::string_view to_string(Method m) {
  switch (m) {
    case Method::apf_mvortex: return "mvortex";
    case Method::apf_sinkvortex: return "sinkvortex";
    case Method::apf_inverse: return "inverse";
    case Method::velocity_obstacle: return "vo";
  }
  return "unknown";
}

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::success: return "success";
    case Outcome::collision: return "collision";
    case Outcome::timeout: return "timeout";
  }
  return "unknown";
}

Method method_from_string(std::string_view s) {
  if (s == "mvortex") return Method::apf_mvortex;
  if (s == "sinkvortex") return Method::apf_sinkvortex;
  if (s == "inverse") return Method::apf_inverse;
  if (s == "vo") return Method::velocity_obstacle;
  throw std::invalid_argument("unknown method '" + std::string(s) +
                              "' (expected mvortex, sinkvortex, inverse or vo)");
}

Outcome outcome_from_string(std::string_view s) {
  if (s == "success") return Outcome::success;
  if (s == "collision") return Outcome::collision;
  if (s == "timeout") return Outcome::timeout;
  throw std::invalid_argument("unknown outcome '" + std::string(s) + "'");
}

void GuidanceConfig::validate() const {
  ilos.validate();
  pd.validate();
  inverse.validate();
  harmonic.validate();
  vo.validate();
}

void SimConfig::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("sim.dt must be positive");
  if (!(max_time > dt)) throw std::invalid_argument("sim.max_time must exceed sim.dt");
  if (!(collision_threshold > 0.0)) throw std::invalid_argument("sim.collision_threshold must be positive");
  if (!(R_safe > 0.0)) throw std::invalid_argument("sim.r_safe must be positive");
}

void Scenario::validate() const {
  if (agents.empty()) throw std::invalid_argument("scenario has no agents");
  if (!ship) throw std::invalid_argument("scenario has no ship model");
  config.validate();
  guidance.validate();
  std::vector<int> ids;
  for (const auto& a : agents) {
    if (!(a.speed > 0.0 && a.speed <= 1.0)) {
      throw std::invalid_argument("agent " + std::to_string(a.id) + ": speed must be in (0, 1]");
    }
    if (a.waypoints.empty()) {
      throw std::invalid_argument("agent " + std::to_string(a.id) + ": needs at least one waypoint");
    }
    std::vector<Vec2> pts{a.start.position()};
    pts.insert(pts.end(), a.waypoints.begin(), a.waypoints.end());
    WaypointPath(std::move(pts));
    ids.push_back(a.id);
  }
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    throw std::invalid_argument("agent ids must be unique");
  }
  for (const auto& o : obstacles) o.validate();
  if (channel) channel->validate();
}

Scenario Scenario::with_method(Method m) const {
  Scenario s = *this;
  for (auto& a : s.agents) a.method = m;
  return s;
}

std::size_t SimResult::index_of(int agent_id) const {
  const auto it = std::find(agent_ids.begin(), agent_ids.end(), agent_id);
  if (it == agent_ids.end()) throw std::out_of_range("no agent with id " + std::to_string(agent_id));
  return static_cast<std::size_t>(it - agent_ids.begin());
}

World make_world(const Scenario& scenario) {
  scenario.validate();
  World w;
  w.obstacles = scenario.obstacles;
  w.channel = scenario.channel;
  for (const auto& spec : scenario.agents) {
    Agent a;
    a.id = spec.id;
    a.method = spec.method;
    a.speed = spec.speed;
    std::vector<Vec2> pts{spec.start.position()};
    pts.insert(pts.end(), spec.waypoints.begin(), spec.waypoints.end());
    a.path = WaypointPath(std::move(pts));
    a.state.pose = {spec.start.x, spec.start.y, wrap_angle(spec.start.psi)};
    a.state.nu = {spec.speed, 0.0, 0.0};
    a.state.n_prop = self_propulsion_rpm(spec.speed, scenario.ship->coeffs);
    a.psi_d = a.state.pose.psi;
    w.agents.push_back(std::move(a));
  }
  std::sort(w.agents.begin(), w.agents.end(), [](const Agent& l, const Agent& r) { return l.id < r.id; });
  return w;
}

std::optional<CollisionEvent> detect_collision(const World& world, double threshold) {
  const auto all = detect_collisions(world, threshold);
  if (all.empty()) return std::nullopt;
  return all.front();
}

std::vector<CollisionEvent> detect_collisions(const World& world, double threshold) {
  std::vector<CollisionEvent> out;
  const auto& ag = world.agents;
  for (std::size_t i = 0; i < ag.size(); ++i) {
    if (!ag[i].active) continue;
    const Vec2 pi = ag[i].state.pose.position();
    for (std::size_t j = i + 1; j < ag.size(); ++j) {
      if (!ag[j].active) continue;
      const double d = distance(pi, ag[j].state.pose.position());
      if (d < threshold) out.push_back(CollisionEvent{world.t, ag[i].id, ag[j].id, false, d});
    }
    for (std::size_t k = 0; k < world.obstacles.size(); ++k) {
      const auto& o = world.obstacles[k];
      const double d = distance(pi, o.center);
      if (d < threshold + o.R_obs) out.push_back(CollisionEvent{world.t, ag[i].id, static_cast<int>(k), true, d});
    }
  }
  return out;
}

double controller_effort(const Trajectory& traj, double delta_max) {
  if (traj.samples.empty()) throw std::invalid_argument("controller_effort: empty trajectory");
  const double T = traj.samples.back().t - traj.samples.front().t;
  if (!(T > 0.0)) return 0.0;
  return trapezoid(traj.samples, [](const Sample& s) { return std::abs(s.state.delta); }) /
         (delta_max * T);
}

double mean_cross_track_error(const Trajectory& traj) {
  if (traj.samples.empty()) throw std::invalid_argument("mean_cross_track_error: empty trajectory");
  const double T = traj.samples.back().t - traj.samples.front().t;
  if (!(T > 0.0)) return 0.0;
  return trapezoid(traj.samples, [](const Sample& s) { return std::abs(s.y_e); }) / T;
}

std::vector<Outcome> classify_outcome(const SimResult& result, const World& world) {
  std::vector<Outcome> out;
  out.reserve(world.agents.size());
  for (const auto& a : world.agents) {
    bool involved = a.collided;
    if (result.collision && !involved) {
      involved = result.collision->a == a.id || (!result.collision->b_is_static && result.collision->b == a.id);
    }
    if (involved) {
      out.push_back(Outcome::collision);
    } else if (a.finished_at) {
      out.push_back(Outcome::success);
    } else {
      out.push_back(Outcome::timeout);
    }
  }
  return out;
}

Simulator::Simulator(Scenario scenario) : scenario_(std::move(scenario)), world_(make_world(scenario_)) {
  const std::size_t n = world_.agents.size();
  metrics_.assign(n, AgentMetrics{});
  effort_integral_.assign(n, 0.0);
  cross_track_integral_.assign(n, 0.0);
  prev_abs_delta_.assign(n, 0.0);
  prev_abs_ye_.assign(n, 0.0);
  first_t_.assign(n, -1.0);
  last_t_.assign(n, -1.0);
}

std::vector<ObstacleView> Simulator::obstacles_seen_by(std::size_t agent_index) const {
  std::vector<ObstacleView> views;
  views.reserve(world_.obstacles.size() + world_.agents.size());
  for (const auto& o : world_.obstacles) views.push_back(ObstacleView::from_static(o));
  const std::size_t first_dynamic = views.size();
  for (std::size_t j = 0; j < world_.agents.size(); ++j) {
    if (j == agent_index || !world_.agents[j].active) continue;
    views.push_back(ObstacleView::from_vessel(world_.agents[j].state));
  }
  // Position order keeps floating-point sums independent of id assignment.
  std::sort(views.begin() + static_cast<std::ptrdiff_t>(first_dynamic), views.end(),
            [](const ObstacleView& l, const ObstacleView& r) {
              return std::tie(l.position.x, l.position.y) < std::tie(r.position.x, r.position.y);
            });
  return views;
}

void Simulator::update_guidance() {
  const auto& g = scenario_.guidance;
  const auto& cfg = scenario_.config;
  const ShipModel& ship = *scenario_.ship;

  // Waypoint bookkeeping first so every agent sees the same active set.
  for (auto& a : world_.agents) {
    if (!a.active) continue;
    const Vec2 pos = a.state.pose.position();
    while (should_switch_waypoint(pos, a.path.to(), g.ilos.R_tol)) {
      ++a.waypoints_reached;
      if (a.path.on_final_segment()) {
        a.active = false;
        a.finished_at = world_.t;
        break;
      }
      ++a.path.k;
      a.ilos.y_int = 0.0;
    }
  }

  for (std::size_t i = 0; i < world_.agents.size(); ++i) {
    Agent& a = world_.agents[i];
    if (!a.active) continue;
    const Vec2 pos = a.state.pose.position();
    const Vec2 goal = a.path.to();
    const double pi_p = path_tangential_angle(a.path.from(), goal);
    a.y_e = track_errors(pos, a.path.from(), goal).cross;

    const auto obstacles = obstacles_seen_by(i);
    const bool harmonic = a.method == Method::apf_mvortex || a.method == Method::apf_sinkvortex;
    const ChannelBoundary* channel = harmonic && world_.channel ? &*world_.channel : nullptr;

    bool reactive = reactive_active(pos, obstacles, cfg.R_safe);
    if (channel != nullptr) {
      for (std::size_t w = 0; w < 2; ++w) {
        reactive = reactive || channel->inside_distance(pos, w) <= channel->activation_distance;
      }
    }
    // Goal capture within R_tol of the active waypoint is already handled by
    // the switch above, so the sink singularity is never evaluated.
    a.mode = reactive ? GuidanceMode::reactive : GuidanceMode::path_following;
    a.max_abs_vortex = 0.0;

    if (a.mode == GuidanceMode::path_following) {
      a.psi_d = ilos_desired_heading(pi_p, a.y_e, a.ilos.y_int, g.ilos);
    } else {
      const auto t0 = std::chrono::steady_clock::now();
      std::optional<double> psi_d;
      switch (a.method) {
        case Method::apf_mvortex:
        case Method::apf_sinkvortex: {
          const auto variant = a.method == Method::apf_mvortex ? HarmonicVariant::modified_vortex
                                                               : HarmonicVariant::sink_vortex;
          const auto d = desired_heading_harmonic(a.state, goal, obstacles, channel, g.harmonic, variant);
          psi_d = d.psi_d;
          a.max_abs_vortex = d.max_abs_vortex;
          break;
        }
        case Method::apf_inverse:
          psi_d = desired_heading_inverse_square(a.state, goal, obstacles, g.inverse);
          break;
        case Method::velocity_obstacle:
          psi_d = vo_desired_heading(a.state, goal, obstacles, g.vo);
          break;
      }
      const auto t1 = std::chrono::steady_clock::now();
      metrics_[i].guidance_calls += 1;
      metrics_[i].guidance_seconds += std::chrono::duration<double>(t1 - t0).count();
      if (psi_d) a.psi_d = *psi_d;
    }
    a.delta_c = pd_rudder_command(a.state.pose.psi, a.psi_d, a.state.nu.r, g.pd, ship.limits);
  }
}

void Simulator::integrate() {
  const ShipModel& ship = *scenario_.ship;
  const double dt = scenario_.config.dt;

  for (auto& a : world_.agents) {
    if (!a.active) continue;
    const double n_prop = a.state.n_prop;
    const double delta_c = a.delta_c;
    auto f = [&](const std::array<double, 7>& x) {
      DynamicState s;
      s.pose = {x[0], x[1], x[2]};
      s.nu = {x[3], x[4], x[5]};
      s.delta = x[6];
      s.n_prop = n_prop;
      const auto d = state_derivative(s, ship.coeffs, ship.mass);
      return std::array<double, 7>{d[0], d[1], d[2], d[3], d[4], d[5],
                                   rudder_rate(x[6], delta_c, ship.limits)};
    };
    const auto& s = a.state;
    const std::array<double, 7> x0{s.pose.x, s.pose.y, s.pose.psi, s.nu.u, s.nu.v, s.nu.r, s.delta};
    const auto x1 = rk4_step(f, x0, dt);
    if (std::abs(x1[3]) > kSpeedCap) {
      throw NumericalError("agent " + std::to_string(a.id) + ": surge speed exceeded the physical cap at t=" +
                           std::to_string(world_.t));
    }
    a.state.pose = {x1[0], x1[1], wrap_angle(x1[2])};
    a.state.nu = {x1[3], x1[4], x1[5]};
    a.state.delta = std::clamp(x1[6], -ship.limits.delta_max, ship.limits.delta_max);

    if (a.mode == GuidanceMode::path_following) {
      a.ilos.y_int += dt * ilos_integrator_derivative(a.y_e, a.ilos.y_int, scenario_.guidance.ilos);
    }
  }
  ++world_.step_index;
  world_.t = static_cast<double>(world_.step_index) * dt;
}

void Simulator::step() {
  update_guidance();
  integrate();
}

void Simulator::record(SimResult& result) {
  const double t = world_.t;
  const double R_safe = scenario_.config.R_safe;
  auto& ag = world_.agents;

  for (std::size_t i = 0; i < ag.size(); ++i) {
    const Agent& a = ag[i];
    if (!a.active) continue;
    const double abs_delta = std::abs(a.state.delta);
    const double abs_ye = std::abs(a.y_e);
    if (first_t_[i] < 0.0) {
      first_t_[i] = t;
    } else {
      effort_integral_[i] += 0.5 * (prev_abs_delta_[i] + abs_delta) * (t - last_t_[i]);
      cross_track_integral_[i] += 0.5 * (prev_abs_ye_[i] + abs_ye) * (t - last_t_[i]);
    }
    prev_abs_delta_[i] = abs_delta;
    prev_abs_ye_[i] = abs_ye;
    last_t_[i] = t;

    if (scenario_.config.record_trajectories) {
      result.trajectories[i].samples.push_back(
          Sample{t, a.state, a.delta_c, a.psi_d, a.mode, a.y_e, a.max_abs_vortex});
    }
  }

  auto series_for = [&](const PairKey& key) -> PairSeries& {
    for (auto& p : result.pairs) {
      if (p.a == key.a && p.b == key.b && p.b_is_static == key.b_is_static) return p;
    }
    result.pairs.push_back(PairSeries{key.a, key.b, key.b_is_static, std::numeric_limits<double>::infinity(), {}});
    return result.pairs.back();
  };

  for (std::size_t i = 0; i < ag.size(); ++i) {
    if (!ag[i].active) continue;
    const Vec2 pi = ag[i].state.pose.position();
    for (std::size_t j = i + 1; j < ag.size(); ++j) {
      if (!ag[j].active) continue;
      const double d = distance(pi, ag[j].state.pose.position());
      metrics_[i].min_agent_distance = std::min(metrics_[i].min_agent_distance, d);
      metrics_[j].min_agent_distance = std::min(metrics_[j].min_agent_distance, d);
      if (d <= R_safe) {
        auto& p = series_for({ag[i].id, ag[j].id, false});
        p.series.emplace_back(t, d);
        p.min_distance = std::min(p.min_distance, d);
      }
    }
    for (std::size_t k = 0; k < world_.obstacles.size(); ++k) {
      const auto& o = world_.obstacles[k];
      const double d = distance(pi, o.center);
      metrics_[i].min_obstacle_clearance = std::min(metrics_[i].min_obstacle_clearance, d - o.R_obs);
      if (d <= R_safe) {
        auto& p = series_for({ag[i].id, static_cast<int>(k), true});
        p.series.emplace_back(t, d);
        p.min_distance = std::min(p.min_distance, d);
      }
    }
  }
}

SimResult Simulator::run() {
  SimResult result;
  const std::size_t n = world_.agents.size();
  for (const auto& a : world_.agents) {
    result.agent_ids.push_back(a.id);
    if (scenario_.config.record_trajectories) result.trajectories.push_back(Trajectory{a.id, {}});
  }

  const double max_time = scenario_.config.max_time;
  for (;;) {
    update_guidance();
    record(result);
    const bool any_active =
        std::any_of(world_.agents.begin(), world_.agents.end(), [](const Agent& a) { return a.active; });
    if (!any_active || world_.t >= max_time - 1e-9) break;

    integrate();
    const auto hits = detect_collisions(world_, scenario_.config.collision_threshold);
    if (hits.empty()) continue;
    if (!result.collision) result.collision = hits.front();
    for (const auto& c : hits) {
      result.collisions.push_back(c);
      for (auto& a : world_.agents) {
        if (a.id == c.a || (!c.b_is_static && a.id == c.b)) a.collided = true;
      }
    }
    if (scenario_.config.stop_on_collision) {
      record(result);
      break;
    }
    // Wrecks leave the scene; the others carry on from this step.
    for (auto& a : world_.agents) {
      if (a.collided) a.active = false;
    }
  }

  result.end_time = world_.t;
  result.outcomes = classify_outcome(result, world_);
  result.metrics = metrics_;
  const double delta_max = scenario_.ship->limits.delta_max;
  for (std::size_t i = 0; i < n; ++i) {
    const double T = last_t_[i] - first_t_[i];
    auto& m = result.metrics[i];
    m.ce = T > 0.0 ? effort_integral_[i] / (delta_max * T) : 0.0;
    m.mcte = T > 0.0 ? cross_track_integral_[i] / T : 0.0;
    m.time_to_goal = world_.agents[i].finished_at;
    m.waypoints_reached = world_.agents[i].waypoints_reached;
  }

  if (result.collision) {
    result.run_outcome = Outcome::collision;
  } else if (std::all_of(result.outcomes.begin(), result.outcomes.end(),
                         [](Outcome o) { return o == Outcome::success; })) {
    result.run_outcome = Outcome::success;
  } else {
    result.run_outcome = Outcome::timeout;
  }
  return result;
}

SimResult run(const Scenario& scenario) { return Simulator(scenario).run(); }

}  // namespace apfnav
