#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "apfnav/apf.hpp"
#include "apfnav/guidance.hpp"
#include "apfnav/mmg.hpp"
#include "apfnav/velocity_obstacle.hpp"

namespace apfnav {

enum class Method { apf_mvortex, apf_sinkvortex, apf_inverse, velocity_obstacle };
enum class GuidanceMode { path_following, reactive };
enum class Outcome { success, collision, timeout };

/// Short names used on the command line and in files: mvortex, sinkvortex,
/// inverse, vo.
std::string_view to_string(Method m);
std::string_view to_string(Outcome o);
Method method_from_string(std::string_view s);
Outcome outcome_from_string(std::string_view s);

struct GuidanceConfig {
  ILOSParams ilos;
  PDGains pd;
  InverseSquareParams inverse;
  HarmonicParams harmonic;
  VOParams vo;
  void validate() const;
};

struct SimConfig {
  double dt = 0.1;
  double max_time = 400.0;
  double collision_threshold = 2.0;
  double R_safe = 15.0;
  std::uint64_t seed = 0;
  bool record_trajectories = true;
  /// When false, colliding vessels are removed and the rest keep going.
  bool stop_on_collision = true;
  void validate() const;
};

/// Initial condition and mission of one vessel. The path starts at the start
/// position and visits `waypoints` in order.
struct AgentSpec {
  int id = 0;
  Pose start;
  double speed = 1.0;  // nondimensional, sets the constant propeller rpm
  std::vector<Vec2> waypoints;
  Method method = Method::apf_mvortex;
};

struct Scenario {
  std::string name;
  std::vector<AgentSpec> agents;
  std::vector<StaticObstacle> obstacles;
  std::optional<ChannelBoundary> channel;
  GuidanceConfig guidance;
  SimConfig config;
  std::shared_ptr<const ShipModel> ship;

  void validate() const;
  /// Every agent switched to `m`.
  Scenario with_method(Method m) const;
};

struct Sample {
  double t = 0.0;
  DynamicState state;
  double delta_c = 0.0;
  double psi_d = 0.0;
  GuidanceMode mode = GuidanceMode::path_following;
  double y_e = 0.0;
  double max_abs_vortex = 0.0;
};

struct Trajectory {
  int agent_id = 0;
  std::vector<Sample> samples;
};

struct AgentMetrics {
  double ce = 0.0;
  double mcte = 0.0;
  std::optional<double> time_to_goal;
  double min_agent_distance = std::numeric_limits<double>::infinity();
  double min_obstacle_clearance = std::numeric_limits<double>::infinity();
  std::size_t waypoints_reached = 0;
  std::uint64_t guidance_calls = 0;   // reactive guidance evaluations
  double guidance_seconds = 0.0;      // wall time spent in them
};

/// Separation history of one pair, sampled only while within R_safe.
struct PairSeries {
  int a = 0;
  int b = 0;               // agent id, or obstacle index when b_is_static
  bool b_is_static = false;
  double min_distance = std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, double>> series;
};

struct CollisionEvent {
  double t = 0.0;
  int a = 0;
  int b = 0;
  bool b_is_static = false;
  double distance = 0.0;
};

struct SimResult {
  std::vector<int> agent_ids;
  std::vector<Trajectory> trajectories;  // empty unless recording
  std::vector<Outcome> outcomes;
  std::vector<AgentMetrics> metrics;
  std::vector<PairSeries> pairs;
  std::optional<CollisionEvent> collision;  // first one
  std::vector<CollisionEvent> collisions;
  double end_time = 0.0;
  Outcome run_outcome = Outcome::timeout;

  std::size_t index_of(int agent_id) const;
};

/// Runtime state of one vessel.
struct Agent {
  int id = 0;
  Method method = Method::apf_mvortex;
  double speed = 1.0;
  DynamicState state;
  WaypointPath path;
  ILOSState ilos;
  GuidanceMode mode = GuidanceMode::path_following;
  double psi_d = 0.0;
  double delta_c = 0.0;
  double y_e = 0.0;
  double max_abs_vortex = 0.0;
  bool active = true;
  bool collided = false;
  std::optional<double> finished_at;
  std::size_t waypoints_reached = 0;
};

struct World {
  std::size_t step_index = 0;
  double t = 0.0;
  std::vector<Agent> agents;  // sorted by id
  std::vector<StaticObstacle> obstacles;
  std::optional<ChannelBoundary> channel;
};

World make_world(const Scenario& scenario);

/// Lowest-id colliding pair among active agents, vessel-vessel pairs tested
/// against `threshold` and vessel-disc pairs against threshold + R_obs.
std::optional<CollisionEvent> detect_collision(const World& world, double threshold);
/// Every colliding pair at this instant, in the same order.
std::vector<CollisionEvent> detect_collisions(const World& world, double threshold);

/// Normalized mean |delta| (trapezoidal) over the trajectory.
double controller_effort(const Trajectory& traj, double delta_max);
/// Mean |y_e| in ship lengths (trapezoidal) over the trajectory.
double mean_cross_track_error(const Trajectory& traj);

/// Per-agent outcome: success when the final waypoint was reached without a
/// collision, collision when involved in one, timeout otherwise.
std::vector<Outcome> classify_outcome(const SimResult& result, const World& world);

class Simulator {
 public:
  explicit Simulator(Scenario scenario);

  const World& world() const { return world_; }
  const Scenario& scenario() const { return scenario_; }

  /// Waypoint switching, mode arbitration and rudder commands for every
  /// active agent, all from the current snapshot.
  void update_guidance();
  /// Actuator and vessel integration over one dt with the held commands.
  void integrate();
  /// update_guidance() followed by integrate().
  void step();

  SimResult run();

 private:
  void record(SimResult& result);
  std::vector<ObstacleView> obstacles_seen_by(std::size_t agent_index) const;

  Scenario scenario_;
  World world_;
  std::vector<AgentMetrics> metrics_;
  std::vector<double> effort_integral_;
  std::vector<double> cross_track_integral_;
  std::vector<double> prev_abs_delta_;
  std::vector<double> prev_abs_ye_;
  std::vector<double> first_t_;
  std::vector<double> last_t_;
};

SimResult run(const Scenario& scenario);

}  // namespace apfnav
