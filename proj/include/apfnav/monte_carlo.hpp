#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "apfnav/sim.hpp"

namespace apfnav {

/// Random traffic environment. Table of the five standard setups via env().
struct EnvSpec {
  int id = 0;
  int n_static = 0;
  int n_dynamic = 0;
  double arena = 100.0;
  double min_spawn_separation = 10.0;
  double min_goal_distance = 50.0;
  double static_radius = 0.5;
  double dynamic_speed_min = 0.5;
  double dynamic_speed_max = 1.0;
  double own_speed = 1.0;

  static EnvSpec env(int id);  // 1..5, throws std::invalid_argument otherwise
  void validate() const;
};

std::uint64_t splitmix64(std::uint64_t x);
/// Seed of run i in a batch: splitmix64 of the master seed advanced i+1 times
/// by the golden-ratio increment.
std::uint64_t child_seed(std::uint64_t master, std::uint64_t i);

/// mt19937_64 with explicit 53-bit conversions so draws do not depend on the
/// standard library's distribution implementations.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t next() { return engine_(); }
  double uniform();                       // [0, 1)
  double uniform(double lo, double hi);   // [lo, hi)
  double heading();                       // (-pi, pi]

 private:
  std::mt19937_64 engine_;
};

/// Everything except the per-run geometry: method, parameters and ship.
struct ScenarioTemplate {
  Method method = Method::apf_mvortex;
  GuidanceConfig guidance;
  SimConfig config;
  std::shared_ptr<const ShipModel> ship;
};

/// Own ship is agent 0; dynamic vessels are agents 1..n_dynamic. Starts are
/// placed in the order own, dynamic, static and a point that is too close to
/// any earlier one is redrawn on its own.
Scenario sample_scenario(const EnvSpec& env, RngStream& rng, const ScenarioTemplate& tmpl);

/// FNV-1a over the sampled geometry (starts, speeds, goals, obstacles). The
/// method and parameters are excluded so paired runs compare equal.
std::uint64_t scenario_hash(const Scenario& s);

struct RunRecord {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  std::uint64_t scenario_hash = 0;
  bool success = false;  // own ship outcome is success
  Outcome own_outcome = Outcome::timeout;
  Outcome run_outcome = Outcome::timeout;
  double end_time = 0.0;
  AgentMetrics own;
  std::optional<std::string> error;  // set when the run threw
};

struct BatchSpec {
  EnvSpec env;
  ScenarioTemplate tmpl;
  std::size_t n_runs = 200;
  std::uint64_t master_seed = 0;
  unsigned jobs = 1;
  void validate() const;
};

/// Records ordered by run index whatever the number of worker threads.
std::vector<RunRecord> run_batch(const BatchSpec& spec);

struct MeanCI {
  double mean = 0.0;
  double half_width = 0.0;
  std::size_t n = 0;
};

struct AggregateStats {
  std::size_t n_runs = 0;
  std::size_t n_success = 0;
  std::size_t n_collision = 0;
  std::size_t n_timeout = 0;
  std::size_t n_error = 0;
  MeanCI success_rate;
  MeanCI ce;             // own ship, runs without error
  MeanCI mcte;
  MeanCI time_to_goal;   // successful runs only
  double mean_guidance_us = 0.0;  // wall clock, not deterministic
};

/// Normal-approximation 95% intervals. Values are sorted before summation so
/// the result is independent of record order.
AggregateStats aggregate(const std::vector<RunRecord>& records);
MeanCI mean_ci(std::vector<double> values);
MeanCI proportion_ci(std::size_t successes, std::size_t n);

struct MethodComparison {
  EnvSpec env;
  std::vector<Method> methods;
  std::vector<std::vector<RunRecord>> records;  // per method
  std::vector<AggregateStats> stats;            // per method
  /// success_delta[i][j] = rate(methods[i]) - rate(methods[j])
  std::vector<std::vector<double>> success_delta;
};

/// Replays the same sampled scenarios for every method. Throws if the
/// scenario hashes of a run differ between methods.
MethodComparison compare_methods(const EnvSpec& env, const std::vector<Method>& methods,
                                 const ScenarioTemplate& tmpl, std::size_t n_runs,
                                 std::uint64_t master_seed, unsigned jobs);

}  // namespace apfnav
