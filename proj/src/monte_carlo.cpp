#include "apfnav/monte_carlo.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace apfnav {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
constexpr int kMaxAttempts = 10000;
constexpr double kZ95 = 1.96;

struct Fnv1a {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  void bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= c[i];
      h *= 0x100000001b3ULL;
    }
  }
  void f64(double v) {
    const auto u = std::bit_cast<std::uint64_t>(v);
    bytes(&u, sizeof u);
  }
  void i64(std::int64_t v) { bytes(&v, sizeof v); }
};

Vec2 draw_point(RngStream& rng, double arena) { return {rng.uniform(0.0, arena), rng.uniform(0.0, arena)}; }

Vec2 draw_clear_point(RngStream& rng, const EnvSpec& env, const std::vector<Vec2>& placed) {
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    const Vec2 p = draw_point(rng, env.arena);
    const bool clear = std::all_of(placed.begin(), placed.end(), [&](const Vec2& q) {
      return distance(p, q) >= env.min_spawn_separation;
    });
    if (clear) return p;
  }
  throw std::runtime_error("sample_scenario: no start position found after " +
                           std::to_string(kMaxAttempts) + " attempts");
}

Vec2 draw_goal(RngStream& rng, const EnvSpec& env, const Vec2& start) {
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    const Vec2 g = draw_point(rng, env.arena);
    if (distance(g, start) >= env.min_goal_distance) return g;
  }
  throw std::runtime_error("sample_scenario: no goal found after " + std::to_string(kMaxAttempts) +
                           " attempts");
}

RunRecord run_one(const BatchSpec& spec, std::size_t i) {
  RunRecord rec;
  rec.index = i;
  rec.seed = child_seed(spec.master_seed, i);
  try {
    RngStream rng(rec.seed);
    Scenario s = sample_scenario(spec.env, rng, spec.tmpl);
    rec.scenario_hash = scenario_hash(s);
    s.config.record_trajectories = false;
    s.config.stop_on_collision = false;
    s.config.seed = rec.seed;
    const SimResult r = run(s);
    const std::size_t own = r.index_of(0);
    rec.own_outcome = r.outcomes[own];
    rec.run_outcome = r.run_outcome;
    rec.own = r.metrics[own];
    rec.end_time = r.end_time;
    rec.success = rec.own_outcome == Outcome::success;
  } catch (const std::exception& e) {
    rec.error = e.what();
    rec.success = false;
  }
  return rec;
}

}  // namespace

EnvSpec EnvSpec::env(int id) {
  static constexpr int kCounts[5][2] = {{1, 2}, {2, 3}, {2, 5}, {3, 7}, {4, 9}};
  if (id < 1 || id > 5) throw std::invalid_argument("environment id must be in 1..5");
  EnvSpec e;
  e.id = id;
  e.n_static = kCounts[id - 1][0];
  e.n_dynamic = kCounts[id - 1][1];
  return e;
}

void EnvSpec::validate() const {
  if (n_static < 0 || n_dynamic < 0) throw std::invalid_argument("env counts must be non-negative");
  if (!(arena > 0.0)) throw std::invalid_argument("env arena must be positive");
  if (!(min_spawn_separation >= 0.0)) throw std::invalid_argument("env min_spawn_separation must be >= 0");
  if (!(min_goal_distance >= 0.0)) throw std::invalid_argument("env min_goal_distance must be >= 0");
  if (!(static_radius > 0.0)) throw std::invalid_argument("env static_radius must be positive");
  if (!(dynamic_speed_min > 0.0 && dynamic_speed_min <= dynamic_speed_max && dynamic_speed_max <= 1.0)) {
    throw std::invalid_argument("env dynamic speed range must satisfy 0 < min <= max <= 1");
  }
  if (!(own_speed > 0.0 && own_speed <= 1.0)) throw std::invalid_argument("env own_speed must be in (0, 1]");
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t child_seed(std::uint64_t master, std::uint64_t i) { return splitmix64(master + i * kGolden); }

double RngStream::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double RngStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double RngStream::heading() { return kPi - 2.0 * kPi * uniform(); }

Scenario sample_scenario(const EnvSpec& env, RngStream& rng, const ScenarioTemplate& tmpl) {
  env.validate();
  if (!tmpl.ship) throw std::invalid_argument("sample_scenario: template has no ship model");

  std::vector<Vec2> placed;
  const int n_vessels = 1 + env.n_dynamic;
  for (int k = 0; k < n_vessels + env.n_static; ++k) placed.push_back(draw_clear_point(rng, env, placed));

  Scenario s;
  s.name = "env" + std::to_string(env.id);
  s.guidance = tmpl.guidance;
  s.config = tmpl.config;
  s.ship = tmpl.ship;
  for (int k = 0; k < n_vessels; ++k) {
    AgentSpec a;
    a.id = k;
    a.method = tmpl.method;
    a.start = {placed[k].x, placed[k].y, rng.heading()};
    a.speed = k == 0 ? env.own_speed : rng.uniform(env.dynamic_speed_min, env.dynamic_speed_max);
    s.agents.push_back(a);
  }
  for (auto& a : s.agents) a.waypoints = {draw_goal(rng, env, a.start.position())};
  for (int k = 0; k < env.n_static; ++k) {
    s.obstacles.push_back(StaticObstacle{placed[n_vessels + k], env.static_radius});
  }
  return s;
}

std::uint64_t scenario_hash(const Scenario& s) {
  Fnv1a h;
  h.i64(static_cast<std::int64_t>(s.agents.size()));
  for (const auto& a : s.agents) {
    h.i64(a.id);
    h.f64(a.start.x);
    h.f64(a.start.y);
    h.f64(a.start.psi);
    h.f64(a.speed);
    h.i64(static_cast<std::int64_t>(a.waypoints.size()));
    for (const auto& w : a.waypoints) {
      h.f64(w.x);
      h.f64(w.y);
    }
  }
  h.i64(static_cast<std::int64_t>(s.obstacles.size()));
  for (const auto& o : s.obstacles) {
    h.f64(o.center.x);
    h.f64(o.center.y);
    h.f64(o.R_obs);
  }
  return h.h;
}

void BatchSpec::validate() const {
  env.validate();
  if (n_runs < 1) throw std::invalid_argument("batch needs at least one run");
  if (jobs < 1) throw std::invalid_argument("batch needs at least one job");
  if (!tmpl.ship) throw std::invalid_argument("batch template has no ship model");
}

std::vector<RunRecord> run_batch(const BatchSpec& spec) {
  spec.validate();
  std::vector<RunRecord> records(spec.n_runs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < spec.n_runs; i = next.fetch_add(1)) {
      records[i] = run_one(spec, i);
    }
  };
  const unsigned n_threads = static_cast<unsigned>(std::min<std::size_t>(spec.jobs, spec.n_runs));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  return records;
}

MeanCI mean_ci(std::vector<double> values) {
  MeanCI out;
  out.n = values.size();
  if (values.empty()) return out;
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) return out;
  std::vector<double> sq;
  sq.reserve(values.size());
  for (double v : values) sq.push_back((v - out.mean) * (v - out.mean));
  std::sort(sq.begin(), sq.end());
  double ss = 0.0;
  for (double v : sq) ss += v;
  const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  out.half_width = kZ95 * sd / std::sqrt(static_cast<double>(values.size()));
  return out;
}

MeanCI proportion_ci(std::size_t successes, std::size_t n) {
  if (n == 0) throw std::invalid_argument("proportion_ci: no samples");
  if (successes > n) throw std::invalid_argument("proportion_ci: successes exceed samples");
  const double p = static_cast<double>(successes) / static_cast<double>(n);
  return {p, kZ95 * std::sqrt(p * (1.0 - p) / static_cast<double>(n)), n};
}

AggregateStats aggregate(const std::vector<RunRecord>& records) {
  if (records.empty()) throw std::invalid_argument("aggregate: no records");
  AggregateStats st;
  st.n_runs = records.size();
  std::vector<double> ce, mcte, ttg, per_call_us;
  for (const auto& r : records) {
    if (r.error) {
      ++st.n_error;
      continue;
    }
    if (r.success) ++st.n_success;
    if (r.own_outcome == Outcome::collision) ++st.n_collision;
    if (r.own_outcome == Outcome::timeout) ++st.n_timeout;
    ce.push_back(r.own.ce);
    mcte.push_back(r.own.mcte);
    if (r.success && r.own.time_to_goal) ttg.push_back(*r.own.time_to_goal);
    if (r.own.guidance_calls > 0) {
      per_call_us.push_back(1e6 * r.own.guidance_seconds / static_cast<double>(r.own.guidance_calls));
    }
  }
  st.success_rate = proportion_ci(st.n_success, st.n_runs);
  st.ce = mean_ci(std::move(ce));
  st.mcte = mean_ci(std::move(mcte));
  st.time_to_goal = mean_ci(std::move(ttg));
  st.mean_guidance_us = mean_ci(std::move(per_call_us)).mean;
  return st;
}

MethodComparison compare_methods(const EnvSpec& env, const std::vector<Method>& methods,
                                 const ScenarioTemplate& tmpl, std::size_t n_runs,
                                 std::uint64_t master_seed, unsigned jobs) {
  if (methods.empty()) throw std::invalid_argument("compare_methods: no methods");
  MethodComparison cmp;
  cmp.env = env;
  cmp.methods = methods;
  for (Method m : methods) {
    BatchSpec spec;
    spec.env = env;
    spec.tmpl = tmpl;
    spec.tmpl.method = m;
    spec.n_runs = n_runs;
    spec.master_seed = master_seed;
    spec.jobs = jobs;
    cmp.records.push_back(run_batch(spec));
    cmp.stats.push_back(aggregate(cmp.records.back()));
  }
  for (std::size_t k = 1; k < cmp.records.size(); ++k) {
    for (std::size_t i = 0; i < n_runs; ++i) {
      const auto& a = cmp.records[0][i];
      const auto& b = cmp.records[k][i];
      if (!a.error && !b.error && a.scenario_hash != b.scenario_hash) {
        throw std::logic_error("compare_methods: run " + std::to_string(i) +
                               " sampled different scenarios across methods");
      }
    }
  }
  const std::size_t n = methods.size();
  cmp.success_delta.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      cmp.success_delta[i][j] = cmp.stats[i].success_rate.mean - cmp.stats[j].success_rate.mean;
    }
  }
  return cmp;
}

}  // namespace apfnav
