#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "apfnav/io.hpp"

namespace fs = std::filesystem;
using namespace apfnav;

namespace {

constexpr int kExitSuccess = 0;
constexpr int kExitError = 1;
constexpr int kExitCollision = 2;
constexpr int kExitTimeout = 3;

int exit_code(Outcome o) {
  switch (o) {
    case Outcome::success: return kExitSuccess;
    case Outcome::collision: return kExitCollision;
    case Outcome::timeout: return kExitTimeout;
  }
  return kExitError;
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt::format("{:.2f}", *v) : "-"; }

ScenarioTemplate default_template(Method m) {
  ScenarioTemplate t;
  t.method = m;
  t.ship = std::make_shared<const ShipModel>(ShipModel::kcs());
  return t;
}

void print_aggregate(std::string_view method, const AggregateStats& st) {
  fmt::print("{:<11} success {:.3f} ± {:.3f}  collision {}  timeout {}  error {}  CE {:.4f}  MCTE {:.3f}  "
             "guidance {:.2f} us/call\n",
             method, st.success_rate.mean, st.success_rate.half_width, st.n_collision, st.n_timeout, st.n_error,
             st.ce.mean, st.mcte.mean, st.mean_guidance_us);
}

struct SimulateArgs {
  std::string scenario;
  std::string out;
  std::string method;
  double dt = 0.0;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

int cmd_simulate(const SimulateArgs& a) {
  Scenario s = load_scenario(a.scenario);
  if (!a.method.empty()) s = s.with_method(method_from_string(a.method));
  if (a.dt > 0.0) s.config.dt = a.dt;
  if (a.seed_set) s.config.seed = a.seed;
  s.config.record_trajectories = true;
  s.validate();

  const SimResult r = run(s);
  fs::create_directories(a.out);
  {
    std::ofstream csv(fs::path(a.out) / "trajectory.csv");
    if (!csv) throw std::runtime_error("cannot write trajectory.csv in " + a.out);
    write_trajectory_csv(csv, r);
  }
  write_json(fs::path(a.out) / "result.json", result_to_json(s, r));

  fmt::print("scenario {}: {} at t'={:.1f}\n", s.name, to_string(r.run_outcome), r.end_time);
  if (r.collision) {
    fmt::print("first collision: agent {} with {} {} at distance {:.3f}L\n", r.collision->a,
               r.collision->b_is_static ? "obstacle" : "agent", r.collision->b, r.collision->distance);
  }
  for (std::size_t i = 0; i < r.agent_ids.size(); ++i) {
    const auto& m = r.metrics[i];
    const double per_call = m.guidance_calls ? 1e6 * m.guidance_seconds / static_cast<double>(m.guidance_calls) : 0.0;
    fmt::print("agent {}: {}  CE {:.4f}  MCTE {:.4f}L  goal t' {}  min sep {}  min clearance {}  "
               "guidance {:.2f} us/call\n",
               r.agent_ids[i], to_string(r.outcomes[i]), m.ce, m.mcte, fmt_opt(m.time_to_goal),
               std::isfinite(m.min_agent_distance) ? fmt::format("{:.2f}L", m.min_agent_distance) : "-",
               std::isfinite(m.min_obstacle_clearance) ? fmt::format("{:.2f}L", m.min_obstacle_clearance) : "-",
               per_call);
  }
  return exit_code(r.run_outcome);
}

struct BatchArgs {
  int env = 1;
  std::string method = "mvortex";
  std::string methods = "mvortex,inverse,vo";
  std::size_t runs = 200;
  std::uint64_t seed = 1;
  unsigned jobs = 1;
  std::string out;
};

int cmd_batch(const BatchArgs& a) {
  BatchSpec spec;
  spec.env = EnvSpec::env(a.env);
  spec.tmpl = default_template(method_from_string(a.method));
  spec.n_runs = a.runs;
  spec.master_seed = a.seed;
  spec.jobs = a.jobs;
  const auto records = run_batch(spec);
  const auto st = aggregate(records);
  fs::create_directories(a.out);
  write_json(fs::path(a.out) / "batch_summary.json", batch_summary_json(spec, records, st));
  write_json(fs::path(a.out) / "timing.json",
             {{"method", a.method}, {"env", a.env}, {"mean_guidance_us_per_call", st.mean_guidance_us}});
  fmt::print("env {} ({} static, {} dynamic), {} runs, seed {}\n", spec.env.id, spec.env.n_static,
             spec.env.n_dynamic, spec.n_runs, spec.master_seed);
  print_aggregate(a.method, st);
  return kExitSuccess;
}

std::vector<Method> parse_methods(const std::string& list) {
  std::vector<Method> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    const auto end = list.find(',', start);
    const auto item = list.substr(start, end == std::string::npos ? std::string::npos : end - start);
    if (!item.empty()) out.push_back(method_from_string(item));
    if (end == std::string::npos) break;
    start = end + 1;
  }
  if (out.empty()) throw std::invalid_argument("no methods given");
  return out;
}

int cmd_compare(const BatchArgs& a) {
  const auto methods = parse_methods(a.methods);
  const auto cmp = compare_methods(EnvSpec::env(a.env), methods, default_template(methods.front()), a.runs,
                                   a.seed, a.jobs);
  fs::create_directories(a.out);
  write_json(fs::path(a.out) / "comparison.json", comparison_json(cmp, a.runs, a.seed));
  nlohmann::json timing = nlohmann::json::object();
  for (std::size_t k = 0; k < methods.size(); ++k) {
    timing[std::string(to_string(methods[k]))] = cmp.stats[k].mean_guidance_us;
  }
  write_json(fs::path(a.out) / "timing.json", {{"env", a.env}, {"mean_guidance_us_per_call", timing}});
  fmt::print("env {}, {} runs per method, seed {}\n", a.env, a.runs, a.seed);
  for (std::size_t k = 0; k < methods.size(); ++k) print_aggregate(to_string(methods[k]), cmp.stats[k]);
  return kExitSuccess;
}

struct PlotArgs {
  std::string traj;
  std::string kind;
  std::string field;
  std::string scenario;
  std::string out;
};

int cmd_plot(const PlotArgs& a) {
  std::string svg;
  if (!a.field.empty()) {
    GuidanceConfig g;
    if (!a.scenario.empty()) g = load_scenario(a.scenario).guidance;
    svg = plot_field_svg(method_from_string(a.field), g);
  } else {
    if (a.traj.empty() || a.kind.empty()) throw std::invalid_argument("plot needs --traj and --kind, or --field");
    const PlotKind kind = plot_kind_from_string(a.kind);
    std::ifstream in(a.traj);
    if (!in) throw std::runtime_error("cannot open " + a.traj);
    const auto rows = read_trajectory_csv(in);
    std::optional<Scenario> s;
    if (!a.scenario.empty()) s = load_scenario(a.scenario);
    svg = plot_trajectory_svg(rows, kind, s ? &*s : nullptr);
  }
  if (const auto parent = fs::path(a.out).parent_path(); !parent.empty()) fs::create_directories(parent);
  std::ofstream out(a.out);
  if (!out) throw std::runtime_error("cannot write " + a.out);
  out << svg;
  return kExitSuccess;
}

int cmd_validate(const std::string& path) {
  try {
    const Scenario s = load_scenario(path);
    fmt::print("{}: ok ({} agents, {} obstacles{})\n", path, s.agents.size(), s.obstacles.size(),
               s.channel ? ", channel" : "");
    return kExitSuccess;
  } catch (const ScenarioError& e) {
    std::cerr << path << ": " << e.what() << '\n';
    return kExitError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-vessel collision avoidance simulator"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run one scenario file");
  simulate->add_option("--scenario", sim.scenario, "Scenario JSON")->required();
  simulate->add_option("--out", sim.out, "Output directory")->required();
  simulate->add_option("--method", sim.method, "Override every agent's method: mvortex, sinkvortex, inverse, vo");
  simulate->add_option("--dt", sim.dt, "Override the time step (nondimensional)")->check(CLI::PositiveNumber);
  auto* seed_opt = simulate->add_option("--seed", sim.seed, "Override the scenario seed");

  BatchArgs batch;
  auto* batch_cmd = app.add_subcommand("batch", "Monte Carlo runs in one standard environment");
  batch_cmd->add_option("--env", batch.env, "Environment 1..5")->required();
  batch_cmd->add_option("--method", batch.method, "mvortex, sinkvortex, inverse or vo");
  batch_cmd->add_option("--runs", batch.runs, "Number of runs")->check(CLI::PositiveNumber);
  batch_cmd->add_option("--seed", batch.seed, "Master seed");
  batch_cmd->add_option("--jobs", batch.jobs, "Worker threads")->check(CLI::PositiveNumber);
  batch_cmd->add_option("--out", batch.out, "Output directory")->required();

  BatchArgs cmp;
  auto* compare = app.add_subcommand("compare", "Paired Monte Carlo comparison of several methods");
  compare->add_option("--env", cmp.env, "Environment 1..5")->required();
  compare->add_option("--methods", cmp.methods, "Comma-separated methods");
  compare->add_option("--runs", cmp.runs, "Runs per method")->check(CLI::PositiveNumber);
  compare->add_option("--seed", cmp.seed, "Master seed");
  compare->add_option("--jobs", cmp.jobs, "Worker threads")->check(CLI::PositiveNumber);
  compare->add_option("--out", cmp.out, "Output directory")->required();

  PlotArgs plot;
  auto* plot_cmd = app.add_subcommand("plot", "Render a trajectory CSV or a guidance field as SVG");
  plot_cmd->add_option("--traj", plot.traj, "Trajectory CSV from simulate");
  plot_cmd->add_option("--kind", plot.kind, "path, rudder, heading, distance or crosstrack");
  plot_cmd->add_option("--field", plot.field, "Vector field of inverse, sinkvortex or mvortex");
  plot_cmd->add_option("--scenario", plot.scenario, "Scenario JSON for waypoints, obstacles and walls");
  plot_cmd->add_option("--out", plot.out, "Output SVG")->required();

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Check a scenario file");
  validate->add_option("--scenario", validate_path, "Scenario JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitSuccess : kExitError;
  }

  try {
    if (*simulate) {
      sim.seed_set = seed_opt->count() > 0;
      return cmd_simulate(sim);
    }
    if (*batch_cmd) return cmd_batch(batch);
    if (*compare) return cmd_compare(cmp);
    if (*plot_cmd) return cmd_plot(plot);
    if (*validate) return cmd_validate(validate_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
