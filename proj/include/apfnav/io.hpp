#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "apfnav/monte_carlo.hpp"
#include "apfnav/sim.hpp"

namespace apfnav {

/// Every problem found in a scenario document, each prefixed with its JSON
/// path (e.g. "agents[1].speed: must be in (0, 1]").
class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(std::vector<std::string> issues);
  const std::vector<std::string>& issues() const { return issues_; }

 private:
  std::vector<std::string> issues_;
};

/// Parses and validates a scenario document. Omitted parameter blocks keep
/// their defaults; unknown keys are errors. A relative "ship" path is
/// resolved against `base_dir`; without one the built-in KCS model is used.
Scenario scenario_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
Scenario load_scenario(const std::filesystem::path& path);
/// Full document with every parameter spelled out. The ship model is
/// embedded only when `embed_ship` is set, otherwise the "ship" key is left
/// out and the built-in model is implied.
nlohmann::json scenario_to_json(const Scenario& s, bool embed_ship = false);

inline constexpr const char* kTrajectoryHeader =
    "t_prime,agent_id,x_L,y_L,psi_rad,u_nd,v_nd,r_nd,delta_rad,delta_c_rad,psi_d_rad,mode,y_e_L";

/// One row per agent per recorded step, ordered by time then agent id.
void write_trajectory_csv(std::ostream& os, const SimResult& r);

struct TrajectoryRow {
  double t = 0.0;
  int agent_id = 0;
  double x = 0.0, y = 0.0, psi = 0.0, u = 0.0, v = 0.0, r = 0.0;
  double delta = 0.0, delta_c = 0.0, psi_d = 0.0;
  GuidanceMode mode = GuidanceMode::path_following;
  double y_e = 0.0;
};
std::vector<TrajectoryRow> read_trajectory_csv(std::istream& is);

std::string_view to_string(GuidanceMode m);  // "ilos" or "reactive"

/// Deterministic summary: wall-clock timings are left out on purpose.
nlohmann::json result_to_json(const Scenario& s, const SimResult& r);

nlohmann::json run_record_to_json(const RunRecord& r);
nlohmann::json aggregate_to_json(const AggregateStats& st);
nlohmann::json env_to_json(const EnvSpec& env);
nlohmann::json batch_summary_json(const BatchSpec& spec, const std::vector<RunRecord>& records,
                                  const AggregateStats& st);
nlohmann::json comparison_json(const MethodComparison& cmp, std::size_t n_runs, std::uint64_t master_seed);

/// Writes `j` as pretty JSON followed by a newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

// ---- plots ---------------------------------------------------------------

enum class PlotKind { path, rudder, heading, distance, crosstrack };
PlotKind plot_kind_from_string(std::string_view s);

struct SeriesPoint {
  double t;
  double value;
};

/// Separation of every agent pair, kept only while within `R_safe`.
struct DistanceSeries {
  int a = 0;
  int b = 0;
  std::vector<SeriesPoint> points;
};
std::vector<DistanceSeries> distance_series(const std::vector<TrajectoryRow>& rows, double R_safe);

/// Self-contained SVG. `scenario` supplies waypoints, obstacles and walls
/// for path plots and may be null for the time-history kinds.
std::string plot_trajectory_svg(const std::vector<TrajectoryRow>& rows, PlotKind kind,
                                const Scenario* scenario);

struct FieldArrow {
  Vec2 at;
  Vec2 dir;  // unit vector
};

/// Normalized guidance field on a grid around a single obstacle at (25, 0)
/// with the goal at (50, 0). For the modified vortex the sampled vessel
/// heads straight for the goal at design speed.
std::vector<FieldArrow> guidance_field(Method method, const GuidanceConfig& g, int n = 25);
std::string plot_field_svg(Method method, const GuidanceConfig& g);

}  // namespace apfnav
