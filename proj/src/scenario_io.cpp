#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "apfnav/io.hpp"

namespace apfnav {

using nlohmann::json;

namespace {

class Issues {
 public:
  void add(const std::string& path, const std::string& msg) { list_.push_back(path + ": " + msg); }
  bool empty() const { return list_.empty(); }
  std::vector<std::string> take() { return std::move(list_); }

 private:
  std::vector<std::string> list_;
};

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

bool expect_object(const json& j, const std::string& path, Issues& issues) {
  if (j.is_object()) return true;
  issues.add(path.empty() ? "(root)" : path, "expected an object");
  return false;
}

void reject_unknown(const json& j, const std::string& path, std::initializer_list<const char*> allowed,
                    Issues& issues) {
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!ok.contains(key)) issues.add(join(path, key), "unknown field");
  }
}

void read_number(const json& j, const char* key, double& out, const std::string& path, Issues& issues) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_number()) {
    issues.add(join(path, key), "expected a number");
    return;
  }
  out = v.get<double>();
}

template <class Int>
void read_integer(const json& j, const char* key, Int& out, const std::string& path, Issues& issues) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_number_integer()) {
    issues.add(join(path, key), "expected an integer");
    return;
  }
  if constexpr (std::is_unsigned_v<Int>) {
    if (v.is_number_unsigned() || v.get<std::int64_t>() >= 0) {
      out = v.get<Int>();
    } else {
      issues.add(join(path, key), "must be non-negative");
    }
  } else {
    out = v.get<Int>();
  }
}

void read_bool(const json& j, const char* key, bool& out, const std::string& path, Issues& issues) {
  if (!j.contains(key)) return;
  if (!j.at(key).is_boolean()) {
    issues.add(join(path, key), "expected true or false");
    return;
  }
  out = j.at(key).get<bool>();
}

bool read_vec2(const json& j, Vec2& out, const std::string& path, Issues& issues) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    issues.add(path, "expected [x, y]");
    return false;
  }
  out = {j[0].get<double>(), j[1].get<double>()};
  if (!out.finite()) {
    issues.add(path, "must be finite");
    return false;
  }
  return true;
}

void positive(double v, const std::string& path, Issues& issues) {
  if (!(v > 0.0) || !std::isfinite(v)) issues.add(path, "must be positive");
}

void parse_sim(const json& j, SimConfig& c, const std::string& path, Issues& issues) {
  if (!expect_object(j, path, issues)) return;
  reject_unknown(j, path, {"dt", "max_time", "collision_threshold", "r_safe", "seed", "stop_on_collision"}, issues);
  read_number(j, "dt", c.dt, path, issues);
  read_number(j, "max_time", c.max_time, path, issues);
  read_number(j, "collision_threshold", c.collision_threshold, path, issues);
  read_number(j, "r_safe", c.R_safe, path, issues);
  read_integer(j, "seed", c.seed, path, issues);
  read_bool(j, "stop_on_collision", c.stop_on_collision, path, issues);
  positive(c.dt, join(path, "dt"), issues);
  positive(c.collision_threshold, join(path, "collision_threshold"), issues);
  positive(c.R_safe, join(path, "r_safe"), issues);
  if (!(c.max_time > c.dt)) issues.add(join(path, "max_time"), "must exceed dt");
}

void parse_guidance(const json& j, GuidanceConfig& g, bool& harmonic_r_safe, bool& vo_r_safe,
                    const std::string& path, Issues& issues) {
  if (!expect_object(j, path, issues)) return;
  reject_unknown(j, path, {"ilos", "pd", "inverse_square", "harmonic", "vo"}, issues);

  if (j.contains("ilos")) {
    const std::string p = join(path, "ilos");
    const json& b = j.at("ilos");
    if (expect_object(b, p, issues)) {
      reject_unknown(b, p, {"delta", "k_factor", "r_tol"}, issues);
      read_number(b, "delta", g.ilos.Delta, p, issues);
      read_number(b, "k_factor", g.ilos.k_factor, p, issues);
      read_number(b, "r_tol", g.ilos.R_tol, p, issues);
      positive(g.ilos.Delta, join(p, "delta"), issues);
      positive(g.ilos.R_tol, join(p, "r_tol"), issues);
      if (!(g.ilos.k_factor >= 0.0)) issues.add(join(p, "k_factor"), "must be non-negative");
    }
  }
  if (j.contains("pd")) {
    const std::string p = join(path, "pd");
    const json& b = j.at("pd");
    if (expect_object(b, p, issues)) {
      reject_unknown(b, p, {"kp", "kd"}, issues);
      read_number(b, "kp", g.pd.Kp, p, issues);
      read_number(b, "kd", g.pd.Kd, p, issues);
      positive(g.pd.Kp, join(p, "kp"), issues);
      if (!(g.pd.Kd >= 0.0)) issues.add(join(p, "kd"), "must be non-negative");
    }
  }
  if (j.contains("inverse_square")) {
    const std::string p = join(path, "inverse_square");
    const json& b = j.at("inverse_square");
    if (expect_object(b, p, issues)) {
      reject_unknown(b, p, {"k_att", "k_rep", "d0"}, issues);
      read_number(b, "k_att", g.inverse.k_att, p, issues);
      read_number(b, "k_rep", g.inverse.k_rep, p, issues);
      read_number(b, "d0", g.inverse.d0, p, issues);
      positive(g.inverse.k_att, join(p, "k_att"), issues);
      positive(g.inverse.k_rep, join(p, "k_rep"), issues);
      positive(g.inverse.d0, join(p, "d0"), issues);
    }
  }
  if (j.contains("harmonic")) {
    const std::string p = join(path, "harmonic");
    const json& b = j.at("harmonic");
    if (expect_object(b, p, issues)) {
      reject_unknown(b, p, {"lambda_sink", "k_vor0", "r_safe", "r_tol_vortex"}, issues);
      read_number(b, "lambda_sink", g.harmonic.Lambda_sink, p, issues);
      read_number(b, "k_vor0", g.harmonic.K_vor0, p, issues);
      read_number(b, "r_safe", g.harmonic.R_safe, p, issues);
      read_number(b, "r_tol_vortex", g.harmonic.R_tol_vortex, p, issues);
      harmonic_r_safe = b.contains("r_safe");
      if (!(g.harmonic.Lambda_sink < 0.0)) issues.add(join(p, "lambda_sink"), "must be negative");
      positive(g.harmonic.R_safe, join(p, "r_safe"), issues);
      positive(g.harmonic.R_tol_vortex, join(p, "r_tol_vortex"), issues);
    }
  }
  if (j.contains("vo")) {
    const std::string p = join(path, "vo");
    const json& b = j.at("vo");
    if (expect_object(b, p, issues)) {
      reject_unknown(b, p, {"cone_radius", "heading_resolution_rad", "max_course_change_rad", "r_safe"}, issues);
      read_number(b, "cone_radius", g.vo.cone_radius, p, issues);
      read_number(b, "heading_resolution_rad", g.vo.heading_resolution, p, issues);
      read_number(b, "max_course_change_rad", g.vo.max_course_change, p, issues);
      read_number(b, "r_safe", g.vo.R_safe, p, issues);
      vo_r_safe = b.contains("r_safe");
      positive(g.vo.cone_radius, join(p, "cone_radius"), issues);
      positive(g.vo.heading_resolution, join(p, "heading_resolution_rad"), issues);
      positive(g.vo.R_safe, join(p, "r_safe"), issues);
      if (!(g.vo.max_course_change >= 0.0)) issues.add(join(p, "max_course_change_rad"), "must be non-negative");
    }
  }
}

void parse_agent(const json& j, AgentSpec& a, const std::string& path, Issues& issues) {
  if (!expect_object(j, path, issues)) return;
  reject_unknown(j, path, {"id", "start", "speed", "waypoints", "method"}, issues);
  if (!j.contains("id")) issues.add(join(path, "id"), "required");
  read_integer(j, "id", a.id, path, issues);

  if (!j.contains("start")) {
    issues.add(join(path, "start"), "required");
  } else {
    const std::string p = join(path, "start");
    const json& s = j.at("start");
    if (expect_object(s, p, issues)) {
      reject_unknown(s, p, {"x", "y", "psi"}, issues);
      for (const char* k : {"x", "y"}) {
        if (!s.contains(k)) issues.add(join(p, k), "required");
      }
      read_number(s, "x", a.start.x, p, issues);
      read_number(s, "y", a.start.y, p, issues);
      read_number(s, "psi", a.start.psi, p, issues);
    }
  }
  read_number(j, "speed", a.speed, path, issues);
  if (!(a.speed > 0.0 && a.speed <= 1.0)) issues.add(join(path, "speed"), "must be in (0, 1]");

  if (!j.contains("waypoints")) {
    issues.add(join(path, "waypoints"), "required");
  } else if (!j.at("waypoints").is_array() || j.at("waypoints").empty()) {
    issues.add(join(path, "waypoints"), "expected a non-empty array of [x, y]");
  } else {
    const json& w = j.at("waypoints");
    for (std::size_t i = 0; i < w.size(); ++i) {
      Vec2 p;
      if (read_vec2(w[i], p, index(join(path, "waypoints"), i), issues)) a.waypoints.push_back(p);
    }
    Vec2 prev = a.start.position();
    for (std::size_t i = 0; i < a.waypoints.size(); ++i) {
      if (a.waypoints[i] == prev) {
        issues.add(index(join(path, "waypoints"), i), "coincides with the previous point");
      }
      prev = a.waypoints[i];
    }
  }
  if (j.contains("method")) {
    if (!j.at("method").is_string()) {
      issues.add(join(path, "method"), "expected a string");
    } else {
      try {
        a.method = method_from_string(j.at("method").get<std::string>());
      } catch (const std::invalid_argument& e) {
        issues.add(join(path, "method"), e.what());
      }
    }
  }
}

void parse_obstacle(const json& j, StaticObstacle& o, const std::string& path, Issues& issues) {
  if (!expect_object(j, path, issues)) return;
  reject_unknown(j, path, {"center", "radius"}, issues);
  if (!j.contains("center")) {
    issues.add(join(path, "center"), "required");
  } else {
    read_vec2(j.at("center"), o.center, join(path, "center"), issues);
  }
  read_number(j, "radius", o.R_obs, path, issues);
  positive(o.R_obs, join(path, "radius"), issues);
}

void parse_channel(const json& j, ChannelBoundary& c, const std::string& path, Issues& issues) {
  if (!expect_object(j, path, issues)) return;
  reject_unknown(j, path, {"walls", "activation_distance", "lambda_src"}, issues);
  const std::string wp = join(path, "walls");
  if (!j.contains("walls") || !j.at("walls").is_array() || j.at("walls").size() != 2) {
    issues.add(wp, "expected two walls, each [[x, y], [x, y]]");
  } else {
    for (std::size_t i = 0; i < 2; ++i) {
      const json& w = j.at("walls")[i];
      const std::string p = index(wp, i);
      if (!w.is_array() || w.size() != 2) {
        issues.add(p, "expected [[x, y], [x, y]]");
        continue;
      }
      const bool ok = read_vec2(w[0], c.walls[i].a, index(p, 0), issues) &&
                      read_vec2(w[1], c.walls[i].b, index(p, 1), issues);
      if (ok && c.walls[i].a == c.walls[i].b) issues.add(p, "wall has zero length");
    }
  }
  read_number(j, "activation_distance", c.activation_distance, path, issues);
  read_number(j, "lambda_src", c.Lambda_src, path, issues);
  positive(c.activation_distance, join(path, "activation_distance"), issues);
  positive(c.Lambda_src, join(path, "lambda_src"), issues);
}

json vec(const Vec2& v) { return json::array({v.x, v.y}); }

}  // namespace

ScenarioError::ScenarioError(std::vector<std::string> issues)
    : std::runtime_error([&] {
        std::string msg = "invalid scenario:";
        for (const auto& s : issues) msg += "\n  " + s;
        return msg;
      }()),
      issues_(std::move(issues)) {}

Scenario scenario_from_json(const json& j, const std::filesystem::path& base_dir) {
  Issues issues;
  Scenario s;
  if (!expect_object(j, "", issues)) throw ScenarioError(issues.take());
  reject_unknown(j, "", {"name", "ship", "sim", "guidance", "agents", "obstacles", "channel"}, issues);

  if (j.contains("name")) {
    if (j.at("name").is_string()) {
      s.name = j.at("name").get<std::string>();
    } else {
      issues.add("name", "expected a string");
    }
  }

  if (!j.contains("ship")) {
    s.ship = std::make_shared<const ShipModel>(ShipModel::kcs());
  } else if (j.at("ship").is_string()) {
    std::filesystem::path p = j.at("ship").get<std::string>();
    if (p.is_relative()) p = base_dir / p;
    try {
      s.ship = std::make_shared<const ShipModel>(ShipModel::load(p));
    } catch (const std::exception& e) {
      issues.add("ship", e.what());
    }
  } else if (j.at("ship").is_object()) {
    try {
      s.ship = std::make_shared<const ShipModel>(ship_model_from_json(j.at("ship")));
    } catch (const std::exception& e) {
      issues.add("ship", e.what());
    }
  } else {
    issues.add("ship", "expected a file path or an embedded model object");
  }

  if (j.contains("sim")) parse_sim(j.at("sim"), s.config, "sim", issues);

  bool harmonic_r_safe = false;
  bool vo_r_safe = false;
  if (j.contains("guidance")) parse_guidance(j.at("guidance"), s.guidance, harmonic_r_safe, vo_r_safe, "guidance", issues);
  // One detection radius unless a block overrides it.
  if (!harmonic_r_safe) s.guidance.harmonic.R_safe = s.config.R_safe;
  if (!vo_r_safe) s.guidance.vo.R_safe = s.config.R_safe;

  if (!j.contains("agents")) {
    issues.add("agents", "required");
  } else if (!j.at("agents").is_array() || j.at("agents").empty()) {
    issues.add("agents", "expected a non-empty array");
  } else {
    const json& arr = j.at("agents");
    std::set<int> ids;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      AgentSpec a;
      a.id = static_cast<int>(i);
      parse_agent(arr[i], a, index("agents", i), issues);
      if (!ids.insert(a.id).second) issues.add(index("agents", i) + ".id", "duplicate id");
      s.agents.push_back(std::move(a));
    }
  }

  if (j.contains("obstacles")) {
    if (!j.at("obstacles").is_array()) {
      issues.add("obstacles", "expected an array");
    } else {
      const json& arr = j.at("obstacles");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        StaticObstacle o;
        parse_obstacle(arr[i], o, index("obstacles", i), issues);
        s.obstacles.push_back(o);
      }
    }
  }

  if (j.contains("channel") && !j.at("channel").is_null()) {
    ChannelBoundary c;
    parse_channel(j.at("channel"), c, "channel", issues);
    s.channel = c;
  }

  if (!issues.empty()) throw ScenarioError(issues.take());
  try {
    s.validate();
  } catch (const std::exception& e) {
    throw ScenarioError({e.what()});
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file: " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
  return scenario_from_json(j, path.parent_path());
}

json scenario_to_json(const Scenario& s, bool embed_ship) {
  json j;
  j["name"] = s.name;
  if (embed_ship && s.ship) j["ship"] = ship_model_to_json(*s.ship);
  const auto& c = s.config;
  j["sim"] = {{"dt", c.dt},
              {"max_time", c.max_time},
              {"collision_threshold", c.collision_threshold},
              {"r_safe", c.R_safe},
              {"seed", c.seed},
              {"stop_on_collision", c.stop_on_collision}};
  const auto& g = s.guidance;
  j["guidance"] = {
      {"ilos", {{"delta", g.ilos.Delta}, {"k_factor", g.ilos.k_factor}, {"r_tol", g.ilos.R_tol}}},
      {"pd", {{"kp", g.pd.Kp}, {"kd", g.pd.Kd}}},
      {"inverse_square", {{"k_att", g.inverse.k_att}, {"k_rep", g.inverse.k_rep}, {"d0", g.inverse.d0}}},
      {"harmonic",
       {{"lambda_sink", g.harmonic.Lambda_sink},
        {"k_vor0", g.harmonic.K_vor0},
        {"r_safe", g.harmonic.R_safe},
        {"r_tol_vortex", g.harmonic.R_tol_vortex}}},
      {"vo",
       {{"cone_radius", g.vo.cone_radius},
        {"heading_resolution_rad", g.vo.heading_resolution},
        {"max_course_change_rad", g.vo.max_course_change},
        {"r_safe", g.vo.R_safe}}}};
  json agents = json::array();
  for (const auto& a : s.agents) {
    json w = json::array();
    for (const auto& p : a.waypoints) w.push_back(vec(p));
    agents.push_back({{"id", a.id},
                      {"start", {{"x", a.start.x}, {"y", a.start.y}, {"psi", a.start.psi}}},
                      {"speed", a.speed},
                      {"waypoints", w},
                      {"method", std::string(to_string(a.method))}});
  }
  j["agents"] = agents;
  json obstacles = json::array();
  for (const auto& o : s.obstacles) obstacles.push_back({{"center", vec(o.center)}, {"radius", o.R_obs}});
  j["obstacles"] = obstacles;
  if (s.channel) {
    const auto& ch = *s.channel;
    j["channel"] = {{"walls",
                     json::array({json::array({vec(ch.walls[0].a), vec(ch.walls[0].b)}),
                                  json::array({vec(ch.walls[1].a), vec(ch.walls[1].b)})})},
                    {"activation_distance", ch.activation_distance},
                    {"lambda_src", ch.Lambda_src}};
  }
  return j;
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace apfnav
