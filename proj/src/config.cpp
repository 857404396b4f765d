#include "sttl/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace sttl {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: bad real for '" + key + "': " + v);
  }
}

long long parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: bad integer for '" + key + "': " + v);
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const unsigned long long x = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: bad unsigned integer for '" + key + "': " + v);
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config: bad boolean for '" + key + "': " + v);
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

const std::vector<std::string>& Config::keys() {
  static const std::vector<std::string> k = {
      "num_files",       "num_sbs",         "comm_range",     "cache_capacity",
      "zipf_alpha",      "weibull_shape",   "aggregate_rate", "zeta",
      "rng_seed",        "num_slots",       "update_period",  "cost_sbs",
      "cost_update",     "hidden_units",    "actor_lr",       "critic_lr",
      "discount",        "polyak",          "noise_variance", "buffer_capacity",
      "batch_size",      "episodes",        "anneal_episodes", "episode_requests",
      "eval_episodes",   "eval_requests",   "grid_delta",     "grid_monotone",
      "grid_constraint", "grid_shared",     "oracle_requests", "oracle_replicas",
      "sweep_key",       "sweep_values",    "sweep_algos",    "out_dir",
      "label",           "target_load"};
  return k;
}

void Config::apply(const std::string& key, const std::string& value) {
  if (key == "num_files") num_files = static_cast<int>(parse_int(key, value));
  else if (key == "num_sbs") num_sbs = static_cast<int>(parse_int(key, value));
  else if (key == "comm_range") comm_range = parse_double(key, value);
  else if (key == "cache_capacity") cache_capacity = parse_double(key, value);
  else if (key == "zipf_alpha") zipf_alpha = parse_double(key, value);
  else if (key == "weibull_shape") weibull_shape = parse_double(key, value);
  else if (key == "aggregate_rate") aggregate_rate = parse_double(key, value);
  else if (key == "zeta") {
    if (value == "uniform") {
      zeta_uniform = true;
      zeta = 0.0;
    } else {
      zeta_uniform = false;
      zeta = parse_double(key, value);
    }
  } else if (key == "rng_seed") rng_seed = parse_u64(key, value);
  else if (key == "num_slots") num_slots = static_cast<int>(parse_int(key, value));
  else if (key == "update_period") update_period = parse_double(key, value);
  else if (key == "cost_sbs") cost_sbs = parse_double(key, value);
  else if (key == "cost_update") cost_update = parse_double(key, value);
  else if (key == "hidden_units") hidden_units = static_cast<int>(parse_int(key, value));
  else if (key == "actor_lr") actor_lr = parse_double(key, value);
  else if (key == "critic_lr") critic_lr = parse_double(key, value);
  else if (key == "discount") discount = parse_double(key, value);
  else if (key == "polyak") polyak = parse_double(key, value);
  else if (key == "noise_variance") noise_variance = parse_double(key, value);
  else if (key == "buffer_capacity")
    buffer_capacity = static_cast<std::size_t>(parse_u64(key, value));
  else if (key == "batch_size") batch_size = static_cast<int>(parse_int(key, value));
  else if (key == "episodes") episodes = static_cast<int>(parse_int(key, value));
  else if (key == "anneal_episodes")
    anneal_episodes = static_cast<int>(parse_int(key, value));
  else if (key == "episode_requests")
    episode_requests = static_cast<int>(parse_int(key, value));
  else if (key == "eval_episodes") eval_episodes = static_cast<int>(parse_int(key, value));
  else if (key == "eval_requests") eval_requests = static_cast<int>(parse_int(key, value));
  else if (key == "grid_delta") grid_delta = parse_double(key, value);
  else if (key == "grid_monotone") grid_monotone = parse_bool(key, value);
  else if (key == "grid_constraint") {
    if (value != "penalty" && value != "filter")
      throw ConfigError("config: grid_constraint must be 'penalty' or 'filter'");
    grid_constraint = value;
  } else if (key == "grid_shared") grid_shared = parse_bool(key, value);
  else if (key == "oracle_requests")
    oracle_requests = static_cast<int>(parse_int(key, value));
  else if (key == "oracle_replicas")
    oracle_replicas = static_cast<int>(parse_int(key, value));
  else if (key == "sweep_key") sweep_key = value;
  else if (key == "sweep_values") sweep_values = value;
  else if (key == "sweep_algos") sweep_algos = value;
  else if (key == "out_dir") out_dir = value;
  else if (key == "label") label = value;
  else if (key == "target_load") target_load = parse_double(key, value);
  else throw ConfigError("config: unknown key '" + key + "'");
}

void Config::validate() const {
  if (!rng_seed) throw ConfigError("config: rng_seed is required");
  if (num_files < 1) throw ConfigError("config: num_files must be >= 1");
  if (num_sbs < 1 || num_sbs > 4)
    throw ConfigError("config: num_sbs must be in 1..4 (one unit-square grid cell)");
  const double rmin = 0.7071067811865476 - 1e-12;
  if (comm_range < rmin || comm_range > 1.0 + 1e-12)
    throw ConfigError("config: comm_range must be in [1/sqrt(2), 1]");
  if (cache_capacity < 0) throw ConfigError("config: cache_capacity must be >= 0");
  if (zipf_alpha < 0) throw ConfigError("config: zipf_alpha must be >= 0");
  if (!(weibull_shape > 0) || weibull_shape > 1)
    throw ConfigError("config: weibull_shape must be in (0, 1]");
  if (!(aggregate_rate > 0)) throw ConfigError("config: aggregate_rate must be > 0");
  if (!zeta_uniform && (zeta < 0 || zeta > 1))
    throw ConfigError("config: zeta must be 'uniform' or in [0, 1]");
  if (num_slots < 0) throw ConfigError("config: num_slots must be >= 0");
  if (!(update_period > 0)) throw ConfigError("config: update_period must be > 0");
  if (cost_sbs < 0 || cost_sbs > 1) throw ConfigError("config: cost_sbs must be in [0, 1]");
  if (cost_update < 0 || cost_update > 1)
    throw ConfigError("config: cost_update must be in [0, 1]");
  if (hidden_units < 1) throw ConfigError("config: hidden_units must be >= 1");
  if (!(actor_lr > 0) || !(critic_lr > 0))
    throw ConfigError("config: learning rates must be > 0");
  if (discount < 0 || discount >= 1) throw ConfigError("config: discount must be in [0, 1)");
  if (polyak < 0 || polyak > 1) throw ConfigError("config: polyak must be in [0, 1]");
  if (noise_variance < 0) throw ConfigError("config: noise_variance must be >= 0");
  if (buffer_capacity < 1) throw ConfigError("config: buffer_capacity must be >= 1");
  if (batch_size < 1) throw ConfigError("config: batch_size must be >= 1");
  if (episodes < 0 || anneal_episodes < 0)
    throw ConfigError("config: episode counts must be >= 0");
  if (episode_requests < 2)
    throw ConfigError("config: episode_requests must be >= 2");
  if (eval_episodes < 1 || eval_requests < 2)
    throw ConfigError("config: eval_episodes >= 1 and eval_requests >= 2 required");
  if (!(grid_delta > 0) || grid_delta > 1)
    throw ConfigError("config: grid_delta must be in (0, 1]");
  if (oracle_requests < 2 || oracle_replicas < 1)
    throw ConfigError("config: oracle_requests >= 2 and oracle_replicas >= 1 required");
}

std::uint64_t Config::seed() const {
  if (!rng_seed) throw ConfigError("config: rng_seed is required");
  return *rng_seed;
}

std::vector<std::pair<std::string, std::string>> Config::echo() const {
  std::vector<std::pair<std::string, std::string>> out;
  auto add = [&](const std::string& k, const std::string& v) { out.emplace_back(k, v); };
  add("num_files", std::to_string(num_files));
  add("num_sbs", std::to_string(num_sbs));
  add("comm_range", format_double(comm_range));
  add("cache_capacity", format_double(cache_capacity));
  add("zipf_alpha", format_double(zipf_alpha));
  add("weibull_shape", format_double(weibull_shape));
  add("aggregate_rate", format_double(aggregate_rate));
  add("zeta", zeta_uniform ? "uniform" : format_double(zeta));
  add("rng_seed", rng_seed ? std::to_string(*rng_seed) : "");
  add("num_slots", std::to_string(num_slots));
  add("update_period", format_double(update_period));
  add("cost_sbs", format_double(cost_sbs));
  add("cost_update", format_double(cost_update));
  add("hidden_units", std::to_string(hidden_units));
  add("actor_lr", format_double(actor_lr));
  add("critic_lr", format_double(critic_lr));
  add("discount", format_double(discount));
  add("polyak", format_double(polyak));
  add("noise_variance", format_double(noise_variance));
  add("buffer_capacity", std::to_string(buffer_capacity));
  add("batch_size", std::to_string(batch_size));
  add("episodes", std::to_string(episodes));
  add("anneal_episodes", std::to_string(anneal_episodes));
  add("episode_requests", std::to_string(episode_requests));
  add("eval_episodes", std::to_string(eval_episodes));
  add("eval_requests", std::to_string(eval_requests));
  add("grid_delta", format_double(grid_delta));
  add("grid_monotone", grid_monotone ? "true" : "false");
  add("grid_constraint", grid_constraint);
  add("grid_shared", grid_shared ? "true" : "false");
  add("oracle_requests", std::to_string(oracle_requests));
  add("oracle_replicas", std::to_string(oracle_replicas));
  add("sweep_key", sweep_key);
  add("sweep_values", sweep_values);
  add("sweep_algos", sweep_algos);
  add("out_dir", out_dir);
  add("label", label);
  add("target_load", target_load ? format_double(*target_load) : "");
  return out;
}

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  Config cfg;
  std::string line;
  int lineno = 0;
  bool first = true;
  bool echo_mode = false;  // result files start with "# build =" and carry
                           // their configuration as '#' echo lines
  while (std::getline(in, line)) {
    ++lineno;
    if (first) {
      first = false;
      if (line.rfind("# build =", 0) == 0) {
        echo_mode = true;
        continue;
      }
    }
    if (echo_mode) {
      if (line.empty() || line[0] != '#') break;  // end of the echo block
      const std::string body = trim(line.substr(1));
      const auto eq = body.find('=');
      if (eq == std::string::npos) continue;
      const std::string value = trim(body.substr(eq + 1));
      if (value.empty()) continue;
      cfg.apply(trim(body.substr(0, eq)), value);
      continue;
    }
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: " + path + ":" + std::to_string(lineno) +
                        ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (value.empty()) continue;  // unset optional
    cfg.apply(key, value);
  }
  return cfg;
}

}  // namespace sttl
