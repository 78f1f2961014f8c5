#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "doctest.h"

#include "apfnav/io.hpp"

using namespace apfnav;
using nlohmann::json;
using doctest::Approx;

namespace {

const std::filesystem::path kScenarios = APFNAV_SCENARIO_DIR;

std::size_t count(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
  return n;
}

bool has_issue(const ScenarioError& e, const std::string& path_prefix) {
  for (const auto& i : e.issues()) {
    if (i.rfind(path_prefix, 0) == 0) return true;
  }
  return false;
}

ScenarioError parse_error(const json& j) {
  try {
    scenario_from_json(j);
  } catch (const ScenarioError& e) {
    return e;
  }
  FAIL("scenario was accepted");
  return ScenarioError({});
}

json minimal() {
  return json::parse(R"({"agents": [{"id": 0, "start": {"x": 0, "y": 0, "psi": 0}, "waypoints": [[30, 0]]}]})");
}

std::vector<TrajectoryRow> rows_of(const SimResult& r) {
  std::stringstream ss;
  write_trajectory_csv(ss, r);
  return read_trajectory_csv(ss);
}

}  // namespace

TEST_CASE("trajectory CSV header is frozen") {
  const Scenario s = scenario_from_json(minimal());
  const SimResult r = run(s);
  std::stringstream ss;
  write_trajectory_csv(ss, r);
  std::string header;
  std::getline(ss, header);
  CHECK(header == "t_prime,agent_id,x_L,y_L,psi_rad,u_nd,v_nd,r_nd,delta_rad,delta_c_rad,psi_d_rad,mode,y_e_L");
}

TEST_CASE("trajectory CSV round trip is exact") {
  const Scenario s = load_scenario(kScenarios / "crossing.json");
  const SimResult r = run(s);
  const auto rows = rows_of(r);
  std::size_t total = 0;
  for (const auto& t : r.trajectories) total += t.samples.size();
  REQUIRE(rows.size() == total);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const bool ordered = rows[i - 1].t < rows[i].t || (rows[i - 1].t == rows[i].t && rows[i - 1].agent_id < rows[i].agent_id);
    CHECK(ordered);
  }
  const auto& tr = r.trajectories[r.index_of(1)].samples;
  std::size_t k = 0;
  for (const auto& row : rows) {
    if (row.agent_id != 1) continue;
    const Sample& smp = tr[k++];
    CHECK(row.t == smp.t);
    CHECK(row.x == smp.state.pose.x);
    CHECK(row.y == smp.state.pose.y);
    CHECK(row.psi == smp.state.pose.psi);
    CHECK(row.r == smp.state.nu.r);
    CHECK(row.delta == smp.state.delta);
    CHECK(row.delta_c == smp.delta_c);
    CHECK(row.psi_d == smp.psi_d);
    CHECK(row.mode == smp.mode);
    CHECK(row.y_e == smp.y_e);
  }
  CHECK(k == tr.size());

  std::stringstream bad("t_prime,agent_id\n1,2\n");
  CHECK_THROWS(read_trajectory_csv(bad));
}

TEST_CASE("shipped scenarios parse") {
  for (const auto& entry : std::filesystem::directory_iterator(kScenarios)) {
    CAPTURE(entry.path().string());
    const Scenario s = load_scenario(entry.path());
    CHECK_NOTHROW(s.validate());
    CHECK(s.ship->coeffs == ShipModel::kcs().coeffs);
  }
  CHECK_THROWS(load_scenario(kScenarios / "does_not_exist.json"));
}

TEST_CASE("minimal scenario gets the default parameters") {
  const Scenario s = scenario_from_json(minimal());
  const auto& g = s.guidance;
  CHECK(g.ilos.Delta == 2.0);
  CHECK(g.ilos.k_factor == 0.05);
  CHECK(g.ilos.R_tol == 3.0);
  CHECK(g.pd.Kp == 3.5);
  CHECK(g.pd.Kd == 4.0);
  CHECK(g.inverse.k_att == 50.0);
  CHECK(g.inverse.k_rep == 200000.0);
  CHECK(g.inverse.d0 == 15.0);
  CHECK(g.harmonic.Lambda_sink == -100.0);
  CHECK(g.harmonic.K_vor0 == -10.0);
  CHECK(g.harmonic.R_safe == 15.0);
  CHECK(g.harmonic.R_tol_vortex == 3.0);
  CHECK(g.vo.cone_radius == 2.5);
  CHECK(s.config.dt == 0.1);
  CHECK(s.config.max_time == 400.0);
  CHECK(s.config.collision_threshold == 2.0);
  CHECK(s.config.R_safe == 15.0);
  CHECK(s.agents[0].speed == 1.0);
  CHECK(s.agents[0].method == Method::apf_mvortex);
  CHECK_FALSE(s.channel);
  CHECK(s.obstacles.empty());
}

TEST_CASE("validation errors name the offending field") {
  json j = minimal();
  j["sim"] = {{"r_safe", -5.0}};
  CHECK(has_issue(parse_error(j), "sim.r_safe"));

  j = minimal();
  j["colour"] = "red";
  CHECK(has_issue(parse_error(j), "colour"));

  j = minimal();
  j["agents"][0]["speed"] = 1.5;
  CHECK(has_issue(parse_error(j), "agents[0].speed"));

  j = minimal();
  j["guidance"] = {{"harmonic", {{"k_vor", -10}}}};
  CHECK(has_issue(parse_error(j), "guidance.harmonic.k_vor"));

  j = minimal();
  j["agents"][0]["waypoints"] = json::array({json::array({1, 2, 3})});
  CHECK(has_issue(parse_error(j), "agents[0].waypoints[0]"));

  j = minimal();
  j["agents"].push_back(j["agents"][0]);
  const auto e = parse_error(j);
  CHECK_FALSE(e.issues().empty());

  j = minimal();
  j["obstacles"] = json::array({{{"center", {1, 2}}, {"radius", 0}}});
  CHECK(has_issue(parse_error(j), "obstacles[0].radius"));

  // several problems are reported together
  j = minimal();
  j["sim"] = {{"dt", -1.0}, {"r_safe", 0}};
  j["extra"] = 1;
  CHECK(parse_error(j).issues().size() >= 3);
}

TEST_CASE("r_safe propagates unless overridden") {
  json j = minimal();
  j["sim"] = {{"r_safe", 12.0}};
  Scenario s = scenario_from_json(j);
  CHECK(s.config.R_safe == 12.0);
  CHECK(s.guidance.harmonic.R_safe == 12.0);
  CHECK(s.guidance.vo.R_safe == 12.0);
  j["guidance"] = {{"harmonic", {{"r_safe", 20.0}}}};
  s = scenario_from_json(j);
  CHECK(s.guidance.harmonic.R_safe == 20.0);
  CHECK(s.guidance.vo.R_safe == 12.0);
}

TEST_CASE("scenario round trip") {
  for (const char* name : {"narrow_channel.json", "static_obstacle.json", "three_ship.json"}) {
    CAPTURE(name);
    const Scenario a = load_scenario(kScenarios / name);
    for (bool embed : {false, true}) {
      const json ja = scenario_to_json(a, embed);
      const Scenario b = scenario_from_json(ja);
      CHECK(scenario_to_json(b, embed) == ja);
      CHECK(b.agents.size() == a.agents.size());
      CHECK(b.channel.has_value() == a.channel.has_value());
      CHECK(b.ship->coeffs == a.ship->coeffs);
    }
  }
}

TEST_CASE("result JSON summary") {
  const Scenario s = load_scenario(kScenarios / "head_on.json");
  const SimResult r = run(s);
  const json j = result_to_json(s, r);
  CHECK(j["schema"] == "apfnav-result/1");
  CHECK(j["outcome"] == "success");
  CHECK(j["collision"].is_null());
  CHECK(j["agents"].size() == 2);
  CHECK(j["agents"][0]["waypoints_total"] == 1);
  CHECK(j["pairs"][0]["min_distance"].get<double>() == r.pairs[0].min_distance);
  CHECK_FALSE(j.contains("timing"));
  CHECK(j.dump() == result_to_json(s, run(s)).dump());
}

TEST_CASE("path plot draws the mission") {
  const Scenario s = load_scenario(kScenarios / "square.json");
  const std::string svg = plot_trajectory_svg(rows_of(run(s)), PlotKind::path, &s);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(count(svg, "class=\"waypoint\"") == 4);
  CHECK(count(svg, "class=\"rtol\"") == 4);
  CHECK(count(svg, "class=\"trajectory\"") == 1);

  const Scenario o = load_scenario(kScenarios / "static_obstacle.json");
  const std::string svg2 = plot_trajectory_svg(rows_of(run(o)), PlotKind::path, &o);
  CHECK(count(svg2, "class=\"obstacle\"") == 1);
  const Scenario ch = load_scenario(kScenarios / "narrow_channel.json");
  const std::string svg3 = plot_trajectory_svg(rows_of(run(ch)), PlotKind::path, &ch);
  CHECK(count(svg3, "class=\"wall\"") == 2);
  CHECK(count(svg3, "class=\"trajectory\"") == 2);
}

TEST_CASE("time-history plots") {
  const Scenario s = load_scenario(kScenarios / "head_on.json");
  const SimResult r = run(s);
  const auto rows = rows_of(r);
  for (auto kind : {PlotKind::rudder, PlotKind::heading, PlotKind::crosstrack, PlotKind::distance}) {
    const std::string svg = plot_trajectory_svg(rows, kind, nullptr);
    CHECK(svg.find("class=\"series\"") != std::string::npos);
  }
  CHECK_THROWS(plot_kind_from_string("spiral"));

  // the plotted distance series bottoms out at the simulator's minimum
  const auto series = distance_series(rows, s.config.R_safe);
  REQUIRE(series.size() == 1);
  double lo = 1e9;
  for (const auto& p : series[0].points) lo = std::min(lo, p.value);
  CHECK(lo == Approx(r.metrics[0].min_agent_distance).epsilon(1e-12));
  const std::string svg = plot_trajectory_svg(rows, PlotKind::distance, &s);
  CHECK(svg.find("class=\"threshold\"") != std::string::npos);
}

TEST_CASE("modified vortex field steers clear on the starboard approach") {
  const GuidanceConfig g;
  const auto arrows = guidance_field(Method::apf_mvortex, g);
  const Vec2 obstacle{25, 0};
  int checked = 0;
  for (const auto& a : arrows) {
    const Vec2 to_obs = obstacle - a.at;
    const double d = to_obs.norm();
    // approaching side, starboard half, within the detection radius and
    // outside the disc the cone is drawn around
    if (a.at.x >= obstacle.x || a.at.y <= 0.0 || d > 15.0 || d < 3.0) continue;
    const double off = std::abs(wrap_angle(a.dir.angle() - to_obs.angle()));
    CHECK(off > std::asin(std::min(1.0, 2.5 / d)));
    ++checked;
  }
  CHECK(checked > 20);

  const std::string svg = plot_field_svg(Method::apf_mvortex, g);
  CHECK(count(svg, "class=\"arrow\"") == arrows.size());
  CHECK_THROWS(guidance_field(Method::velocity_obstacle, g));
}
