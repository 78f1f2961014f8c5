#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "apfnav/io.hpp"

namespace apfnav {

using nlohmann::json;

namespace {

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json optional_or_null(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string hex64(std::uint64_t v) { return fmt::format("{:016x}", v); }

json collision_json(const CollisionEvent& c) {
  return {{"t", c.t}, {"a", c.a}, {"b", c.b}, {"b_is_static", c.b_is_static}, {"distance", c.distance}};
}

json mean_ci_json(const MeanCI& m) {
  if (m.n == 0) return nullptr;
  return {{"mean", m.mean}, {"ci95", m.half_width}, {"n", m.n}};
}

}  // namespace

std::string_view to_string(GuidanceMode m) { return m == GuidanceMode::reactive ? "reactive" : "ilos"; }

void write_trajectory_csv(std::ostream& os, const SimResult& r) {
  struct Row {
    double t;
    int id;
    const Sample* s;
  };
  std::vector<Row> rows;
  for (const auto& tr : r.trajectories) {
    for (const auto& s : tr.samples) rows.push_back({s.t, tr.agent_id, &s});
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.t < b.t || (a.t == b.t && a.id < b.id); });
  auto z = [](double v) { return v == 0.0 ? 0.0 : v; };  // no "-0" cells
  os << kTrajectoryHeader << '\n';
  for (const auto& row : rows) {
    const Sample& s = *row.s;
    os << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}\n", z(s.t), row.id, z(s.state.pose.x),
                      z(s.state.pose.y), z(s.state.pose.psi), z(s.state.nu.u), z(s.state.nu.v), z(s.state.nu.r),
                      z(s.state.delta), z(s.delta_c), z(s.psi_d), to_string(s.mode), z(s.y_e));
  }
}

std::vector<TrajectoryRow> read_trajectory_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("trajectory CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTrajectoryHeader) throw std::runtime_error("trajectory CSV header does not match the expected columns");
  std::vector<TrajectoryRow> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 13) throw std::runtime_error("trajectory CSV line " + std::to_string(lineno) + ": expected 13 fields");
    try {
      TrajectoryRow r;
      r.t = std::stod(f[0]);
      r.agent_id = std::stoi(f[1]);
      r.x = std::stod(f[2]);
      r.y = std::stod(f[3]);
      r.psi = std::stod(f[4]);
      r.u = std::stod(f[5]);
      r.v = std::stod(f[6]);
      r.r = std::stod(f[7]);
      r.delta = std::stod(f[8]);
      r.delta_c = std::stod(f[9]);
      r.psi_d = std::stod(f[10]);
      if (f[11] == "reactive") {
        r.mode = GuidanceMode::reactive;
      } else if (f[11] == "ilos") {
        r.mode = GuidanceMode::path_following;
      } else {
        throw std::invalid_argument("mode");
      }
      r.y_e = std::stod(f[12]);
      rows.push_back(r);
    } catch (const std::logic_error&) {
      throw std::runtime_error("trajectory CSV line " + std::to_string(lineno) + ": malformed field");
    }
  }
  return rows;
}

json result_to_json(const Scenario& s, const SimResult& r) {
  json j;
  j["schema"] = "apfnav-result/1";
  j["scenario"] = s.name;
  j["outcome"] = std::string(to_string(r.run_outcome));
  j["end_time"] = r.end_time;
  j["dt"] = s.config.dt;
  j["collision"] = r.collision ? collision_json(*r.collision) : json(nullptr);
  json cols = json::array();
  for (const auto& c : r.collisions) cols.push_back(collision_json(c));
  j["collisions"] = cols;

  json agents = json::array();
  for (std::size_t i = 0; i < r.agent_ids.size(); ++i) {
    const auto& m = r.metrics[i];
    const auto spec = std::find_if(s.agents.begin(), s.agents.end(),
                                   [&](const AgentSpec& a) { return a.id == r.agent_ids[i]; });
    agents.push_back({{"id", r.agent_ids[i]},
                      {"method", std::string(to_string(spec->method))},
                      {"outcome", std::string(to_string(r.outcomes[i]))},
                      {"ce", m.ce},
                      {"mcte", m.mcte},
                      {"time_to_goal", optional_or_null(m.time_to_goal)},
                      {"min_agent_distance", finite_or_null(m.min_agent_distance)},
                      {"min_obstacle_clearance", finite_or_null(m.min_obstacle_clearance)},
                      {"waypoints_reached", m.waypoints_reached},
                      {"waypoints_total", spec->waypoints.size()},
                      {"reactive_steps", m.guidance_calls}});
  }
  j["agents"] = agents;

  json pairs = json::array();
  for (const auto& p : r.pairs) {
    json series = json::array();
    for (const auto& [t, d] : p.series) series.push_back(json::array({t, d}));
    pairs.push_back({{"a", p.a},
                     {"b", p.b},
                     {"b_is_static", p.b_is_static},
                     {"min_distance", finite_or_null(p.min_distance)},
                     {"series", series}});
  }
  j["pairs"] = pairs;
  return j;
}

json run_record_to_json(const RunRecord& r) {
  return {{"index", r.index},
          {"seed", r.seed},
          {"scenario_hash", hex64(r.scenario_hash)},
          {"success", r.success},
          {"own_outcome", r.error ? json(nullptr) : json(std::string(to_string(r.own_outcome)))},
          {"run_outcome", r.error ? json(nullptr) : json(std::string(to_string(r.run_outcome)))},
          {"end_time", r.end_time},
          {"ce", r.own.ce},
          {"mcte", r.own.mcte},
          {"time_to_goal", optional_or_null(r.own.time_to_goal)},
          {"min_agent_distance", finite_or_null(r.own.min_agent_distance)},
          {"min_obstacle_clearance", finite_or_null(r.own.min_obstacle_clearance)},
          {"error", r.error ? json(*r.error) : json(nullptr)}};
}

json aggregate_to_json(const AggregateStats& st) {
  return {{"n_runs", st.n_runs},
          {"n_success", st.n_success},
          {"n_collision", st.n_collision},
          {"n_timeout", st.n_timeout},
          {"n_error", st.n_error},
          {"success_rate", st.success_rate.mean},
          {"success_rate_ci95", st.success_rate.half_width},
          {"ce", mean_ci_json(st.ce)},
          {"mcte", mean_ci_json(st.mcte)},
          {"time_to_goal", mean_ci_json(st.time_to_goal)}};
}

json env_to_json(const EnvSpec& e) {
  return {{"id", e.id},
          {"n_static", e.n_static},
          {"n_dynamic", e.n_dynamic},
          {"arena", e.arena},
          {"min_spawn_separation", e.min_spawn_separation},
          {"min_goal_distance", e.min_goal_distance},
          {"static_radius", e.static_radius},
          {"dynamic_speed_min", e.dynamic_speed_min},
          {"dynamic_speed_max", e.dynamic_speed_max},
          {"own_speed", e.own_speed}};
}

json batch_summary_json(const BatchSpec& spec, const std::vector<RunRecord>& records, const AggregateStats& st) {
  json runs = json::array();
  for (const auto& r : records) runs.push_back(run_record_to_json(r));
  return {{"schema", "apfnav-batch/1"},
          {"env", env_to_json(spec.env)},
          {"method", std::string(to_string(spec.tmpl.method))},
          {"n_runs", spec.n_runs},
          {"master_seed", spec.master_seed},
          {"aggregate", aggregate_to_json(st)},
          {"runs", runs}};
}

json comparison_json(const MethodComparison& cmp, std::size_t n_runs, std::uint64_t master_seed) {
  json methods = json::array();
  for (std::size_t k = 0; k < cmp.methods.size(); ++k) {
    json runs = json::array();
    for (const auto& r : cmp.records[k]) runs.push_back(run_record_to_json(r));
    methods.push_back({{"method", std::string(to_string(cmp.methods[k]))},
                       {"aggregate", aggregate_to_json(cmp.stats[k])},
                       {"runs", runs}});
  }
  json delta = json::object();
  for (std::size_t i = 0; i < cmp.methods.size(); ++i) {
    for (std::size_t j = 0; j < cmp.methods.size(); ++j) {
      if (i == j) continue;
      delta[std::string(to_string(cmp.methods[i])) + "-" + std::string(to_string(cmp.methods[j]))] =
          cmp.success_delta[i][j];
    }
  }
  return {{"schema", "apfnav-compare/1"},
          {"env", env_to_json(cmp.env)},
          {"n_runs", n_runs},
          {"master_seed", master_seed},
          {"methods", methods},
          {"success_rate_delta", delta}};
}

}  // namespace apfnav
