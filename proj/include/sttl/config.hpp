#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sttl {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat key=value configuration for every CLI verb. Parsing is strict:
// unknown keys are rejected and rng_seed is mandatory.
struct Config {
  // Scenario.
  int num_files = 20;
  int num_sbs = 4;
  double comm_range = 0.7071067811865476;
  double cache_capacity = 4.0;
  double zipf_alpha = 0.7;
  double weibull_shape = 0.6;
  double aggregate_rate = 100.0;
  bool zeta_uniform = true;  // zeta = "uniform"
  double zeta = 0.0;
  std::optional<std::uint64_t> rng_seed;

  // Caching policy shape and load weights.
  int num_slots = 2;          // K: policy has K+1 slot values
  double update_period = 0.5; // T
  double cost_sbs = 0.0;      // c_SBS, kept 0 so the SBS link is free
  double cost_update = 0.05;  // c_C

  // Learner.
  int hidden_units = 64;
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  double discount = 0.99;
  double polyak = 0.999;
  double noise_variance = 0.01;
  std::size_t buffer_capacity = 1000000;
  int batch_size = 64;

  // Training and evaluation schedule.
  int episodes = 5000;
  int anneal_episodes = 1000;
  int episode_requests = 500;
  int eval_episodes = 8;
  int eval_requests = 5000;

  // Grid-search oracle.
  double grid_delta = 0.05;
  bool grid_monotone = false;
  std::string grid_constraint = "penalty";  // or "filter"
  bool grid_shared = false;                 // one policy vector shared by all files
  int oracle_requests = 20000;
  int oracle_replicas = 1;

  // Sweep driver.
  std::string sweep_key;
  std::string sweep_values;  // comma-separated
  std::string sweep_algos;   // comma-separated: sarl,marl,oracle,static,zero

  // Output.
  std::string out_dir = "results";
  std::string label;
  std::optional<double> target_load;

  // Names of every accepted key, in echo order.
  static const std::vector<std::string>& keys();

  // Sets one field from its textual value. Throws ConfigError on an unknown
  // key or an unparsable value.
  void apply(const std::string& key, const std::string& value);

  // Range checks all fields and requires rng_seed. Throws ConfigError.
  void validate() const;

  std::uint64_t seed() const;

  // Full resolved configuration as (key, value) pairs; doubles round-trip.
  std::vector<std::pair<std::string, std::string>> echo() const;

  static Config from_file(const std::string& path);
};

// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

}  // namespace sttl
