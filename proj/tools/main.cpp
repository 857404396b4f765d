// Experiment runner: training, evaluation, grid-search oracle, sweeps, and
// result reporting, all driven by the same strict key=value configuration.
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "sttl/baselines.hpp"
#include "sttl/config.hpp"
#include "sttl/rng.hpp"
#include "sttl/train.hpp"
#include "sttl/util.hpp"

namespace fs = std::filesystem;
using namespace sttl;

namespace {

// One string slot per config key so every flag mirrors the config file.
struct ConfigFlags {
  std::map<std::string, std::string> values;

  void attach(CLI::App* cmd) {
    for (const std::string& key : Config::keys())
      cmd->add_option("--" + key, values[key]);
  }

  Config resolve(const std::string& config_path) const {
    Config cfg;
    if (!config_path.empty()) cfg = Config::from_file(config_path);
    for (const auto& [key, value] : values)
      if (!value.empty()) cfg.apply(key, value);
    cfg.validate();
    return cfg;
  }
};

std::string prefix_for(const Config& cfg, const std::string& fallback) {
  return cfg.label.empty() ? fallback : cfg.label;
}

fs::path out_path(const Config& cfg, const std::string& prefix,
                  const std::string& suffix) {
  return fs::path(cfg.out_dir) / (prefix + suffix);
}

std::string csv_row(std::initializer_list<std::string> cells) {
  std::string row;
  for (const std::string& cell : cells) {
    if (!row.empty()) row += ',';
    row += cell;
  }
  return row;
}

const std::string kEvalHeader =
    "label,algo,seed,episodes,steps,objective,objective_se,objective_nopenalty,"
    "mean_occupancy,rate_mbs,rate_sbs,rate_upd,load,load_norm";

std::string eval_row(const Config& cfg, const std::string& label,
                     const std::string& algo, const EvalStats& stats) {
  const LoadLedger::Summary s = stats.ledger.finalize();
  return csv_row({label, algo, std::to_string(cfg.seed()),
                  std::to_string(stats.episodes), std::to_string(stats.steps),
                  format_double(stats.objective()), format_double(stats.objective_se()),
                  format_double(stats.objective_nopenalty()),
                  format_double(stats.mean_occupancy()), format_double(s.rate_mbs),
                  format_double(s.rate_sbs), format_double(s.rate_upd),
                  format_double(s.load), format_double(s.load_norm)});
}

void write_eval_csv(const Config& cfg, const std::string& prefix,
                    const std::string& algo, const EvalStats& stats) {
  std::ofstream out = open_csv(out_path(cfg, prefix, "_eval.csv"), cfg, kEvalHeader);
  out << eval_row(cfg, prefix, algo, stats) << "\n";
}

void report_progress(const EpisodeLog& row, int total) {
  if (row.episode % 100 == 0 || row.episode + 1 == total)
    std::fprintf(stderr, "episode %d/%d return %.3f load_norm %.4f\n", row.episode + 1,
                 total, row.episode_return, row.summary.load_norm);
}

int run_training(const Config& cfg, bool marl) {
  const std::string prefix = prefix_for(cfg, marl ? "marl" : "sarl");
  const int total = cfg.episodes + cfg.anneal_episodes;

  std::ofstream train_csv =
      open_csv(out_path(cfg, prefix, "_train.csv"), cfg,
               "episode,return,rate_mbs,rate_sbs,rate_upd,load,load_norm,"
               "noise_variance");
  EpisodeCallback log_row = [&](const EpisodeLog& row) {
    train_csv << csv_row({std::to_string(row.episode), format_double(row.episode_return),
                          format_double(row.summary.rate_mbs),
                          format_double(row.summary.rate_sbs),
                          format_double(row.summary.rate_upd),
                          format_double(row.summary.load),
                          format_double(row.summary.load_norm),
                          format_double(row.noise_variance)})
              << "\n";
    report_progress(row, total);
  };

  TrainResult result = marl ? train_marl(cfg, log_row) : train_sarl(cfg, log_row);
  train_csv.close();

  // Plot-ready smoothed curves.
  std::vector<double> returns, loads;
  returns.reserve(result.log.size());
  loads.reserve(result.log.size());
  for (const EpisodeLog& row : result.log) {
    returns.push_back(row.episode_return);
    loads.push_back(row.summary.load_norm);
  }
  const std::vector<double> returns_ma = moving_average(returns, 500);
  const std::vector<double> loads_ma = moving_average(loads, 500);
  std::ofstream curve_csv = open_csv(out_path(cfg, prefix, "_curve.csv"), cfg,
                                     "episode,return_ma500,load_norm_ma500");
  for (std::size_t i = 0; i < result.log.size(); ++i)
    curve_csv << csv_row({std::to_string(result.log[i].episode),
                          format_double(returns_ma[i]), format_double(loads_ma[i])})
              << "\n";
  curve_csv.close();

  {
    fs::path ckpt = out_path(cfg, prefix, "_checkpoint.json");
    if (ckpt.has_parent_path()) fs::create_directories(ckpt.parent_path());
    std::ofstream out(ckpt, std::ios::trunc);
    out << result.checkpoint.dump(1) << "\n";
  }
  write_eval_csv(cfg, prefix, marl ? "marl" : "sarl", result.eval);

  const LoadLedger::Summary s = result.eval.ledger.finalize();
  std::printf("%s: eval objective %s (se %s), load_norm %s\n", prefix.c_str(),
              format_double(result.eval.objective()).c_str(),
              format_double(result.eval.objective_se()).c_str(),
              format_double(s.load_norm).c_str());
  return 0;
}

EvalStats evaluate_named_policy(const Config& cfg, const std::string& name) {
  PolicyTable policy;
  if (name == "zero") policy = PolicyTable::zero(cfg.num_files, cfg.num_slots);
  else if (name == "full") policy = PolicyTable::constant(cfg.num_files, cfg.num_slots, 1.0);
  else if (name == "static") policy = PolicyTable::greedy_static_fill(cfg);
  else if (name == "oracle") policy = grid_search(cfg).best;
  else throw std::runtime_error("unknown policy '" + name + "'");
  return evaluate_sync_policy(cfg, policy, cfg.eval_episodes, cfg.eval_requests,
                              cfg.seed());
}

int run_evaluate(const Config& cfg, const std::string& checkpoint_path,
                 const std::string& policy_name) {
  if (checkpoint_path.empty() == policy_name.empty())
    throw std::runtime_error("evaluate: pass exactly one of --checkpoint or --policy");

  std::string algo;
  EvalStats stats;
  if (!checkpoint_path.empty()) {
    std::ifstream in(checkpoint_path);
    if (!in) throw std::runtime_error("cannot open checkpoint " + checkpoint_path);
    nlohmann::json ckpt = nlohmann::json::parse(in);
    algo = ckpt.at("algo").get<std::string>();
    stats = evaluate_checkpoint(cfg, ckpt);
  } else {
    algo = policy_name;
    stats = evaluate_named_policy(cfg, policy_name);
  }

  const std::string prefix = prefix_for(cfg, "eval_" + algo);
  write_eval_csv(cfg, prefix, algo, stats);
  const LoadLedger::Summary s = stats.ledger.finalize();
  std::printf("%s: objective %s (se %s), load_norm %s\n", algo.c_str(),
              format_double(stats.objective()).c_str(),
              format_double(stats.objective_se()).c_str(),
              format_double(s.load_norm).c_str());
  return 0;
}

int run_oracle(const Config& cfg) {
  GridSearchResult result = grid_search(cfg);
  const std::string prefix = prefix_for(cfg, "oracle");

  std::ofstream out = open_csv(out_path(cfg, prefix, "_oracle.csv"), cfg,
                               "label,objective,load_norm,mean_occupancy,"
                               "num_candidates,from_cache");
  out << csv_row({prefix, format_double(result.objective),
                  format_double(result.load_norm),
                  format_double(result.mean_occupancy),
                  std::to_string(result.num_candidates),
                  result.from_cache ? "1" : "0"})
      << "\n";
  out.close();

  nlohmann::json policy{{"objective", result.objective},
                        {"load_norm", result.load_norm},
                        {"x", result.best.x}};
  if (!result.best_shared.empty()) policy["shared"] = result.best_shared;
  std::ofstream pj(out_path(cfg, prefix, "_oracle_policy.json"), std::ios::trunc);
  pj << policy.dump(1) << "\n";

  std::printf("oracle: objective %s, load_norm %s over %lld candidates%s\n",
              format_double(result.objective).c_str(),
              format_double(result.load_norm).c_str(), result.num_candidates,
              result.from_cache ? " (cached)" : "");
  return 0;
}

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> items;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) items.push_back(item);
  return items;
}

// Rows already present in a sweep CSV, as "value,algo" keys.
std::vector<std::string> completed_sweep_points(const fs::path& path) {
  std::vector<std::string> done;
  std::ifstream in(path);
  if (!in) return done;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    std::stringstream ss(line);
    std::string key, value, algo;
    std::getline(ss, key, ',');
    std::getline(ss, value, ',');
    std::getline(ss, algo, ',');
    done.push_back(value + "," + algo);
  }
  return done;
}

int run_sweep(const Config& base) {
  if (base.sweep_key.empty()) throw std::runtime_error("sweep: sweep_key is required");
  const std::vector<std::string> values = split_list(base.sweep_values);
  const std::vector<std::string> algos = split_list(base.sweep_algos);
  if (values.empty()) throw std::runtime_error("sweep: sweep_values is empty");
  if (algos.empty()) throw std::runtime_error("sweep: sweep_algos is empty");

  const std::string prefix = prefix_for(base, "sweep");
  const fs::path path = out_path(base, prefix, "_sweep.csv");
  const std::vector<std::string> done = completed_sweep_points(path);
  const std::string header =
      "sweep_key,value,algo,seed,objective,objective_se,load_norm,mean_occupancy";

  std::ofstream out;
  if (done.empty()) {
    out = open_csv(path, base, header);
  } else {
    out.open(path, std::ios::app);
    if (!out) throw std::runtime_error("cannot append to " + path.string());
  }

  const std::uint64_t master = base.seed();
  int index = -1;
  for (const std::string& value : values) {
    for (const std::string& algo : algos) {
      ++index;
      const std::string point = value + "," + algo;
      if (std::find(done.begin(), done.end(), point) != done.end()) {
        std::fprintf(stderr, "skip completed point %s\n", point.c_str());
        continue;
      }

      Config cfg = base;
      cfg.apply(cfg.sweep_key, value);
      cfg.apply("rng_seed",
                std::to_string(derive_seed(
                    master, kSweepSalt + static_cast<std::uint64_t>(index))));
      cfg.validate();

      EvalStats stats;
      if (algo == "sarl") stats = train_sarl(cfg).eval;
      else if (algo == "marl") stats = train_marl(cfg).eval;
      else stats = evaluate_named_policy(cfg, algo);

      const LoadLedger::Summary s = stats.ledger.finalize();
      out << csv_row({base.sweep_key, value, algo, std::to_string(cfg.seed()),
                      format_double(stats.objective()),
                      format_double(stats.objective_se()), format_double(s.load_norm),
                      format_double(stats.mean_occupancy())})
          << "\n";
      out.flush();
      std::fprintf(stderr, "point %s done: load_norm %s\n", point.c_str(),
                   format_double(s.load_norm).c_str());
    }
  }
  std::printf("sweep written to %s\n", path.string().c_str());
  return 0;
}

struct ResultRow {
  std::string file;
  std::map<std::string, std::string> cells;  // header -> value
  std::string seed;
};

std::vector<ResultRow> read_result_file(const fs::path& path) {
  std::vector<ResultRow> rows;
  std::ifstream in(path);
  if (!in) return rows;
  std::string line, seed;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string tag = "# rng_seed = ";
      if (line.rfind(tag, 0) == 0) seed = line.substr(tag.size());
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (header.empty()) {
      header = cells;
      continue;
    }
    ResultRow row;
    row.file = path.filename().string();
    row.seed = seed;
    for (std::size_t i = 0; i < header.size() && i < cells.size(); ++i)
      row.cells[header[i]] = cells[i];
    rows.push_back(std::move(row));
  }
  return rows;
}

int run_report(const Config& cfg, const std::string& dir_flag) {
  const fs::path dir = dir_flag.empty() ? fs::path(cfg.out_dir) : fs::path(dir_flag);
  std::vector<fs::path> files;
  if (fs::exists(dir))
    for (const auto& entry : fs::directory_iterator(dir)) {
      const std::string name = entry.path().filename().string();
      if (name.size() > 9 && name.substr(name.size() - 9) == "_eval.csv")
        files.push_back(entry.path());
      if (name.size() > 11 && name.substr(name.size() - 11) == "_oracle.csv")
        files.push_back(entry.path());
    }
  std::sort(files.begin(), files.end());

  if (files.empty()) {
    std::printf("no results in %s\n", dir.string().c_str());
    return 0;
  }

  double oracle_objective = 0.0;
  bool have_oracle = false;
  std::vector<ResultRow> rows;
  for (const fs::path& file : files) {
    for (ResultRow& row : read_result_file(file)) {
      if (row.file.find("_oracle.csv") != std::string::npos &&
          row.cells.count("objective")) {
        oracle_objective = std::stod(row.cells["objective"]);
        have_oracle = true;
      }
      rows.push_back(std::move(row));
    }
  }

  bool failed = false;
  std::printf("%-28s %-8s %-20s %12s %12s %10s %s\n", "file", "algo", "seed",
              "objective", "load_norm", "gap_%", "status");
  for (const ResultRow& row : rows) {
    const std::string algo =
        row.cells.count("algo") ? row.cells.at("algo") : "oracle";
    const double objective =
        row.cells.count("objective") ? std::stod(row.cells.at("objective")) : 0.0;
    const double load_norm =
        row.cells.count("load_norm") ? std::stod(row.cells.at("load_norm")) : 0.0;

    std::string gap = "-";
    if (have_oracle && algo != "oracle" && oracle_objective != 0.0) {
      const double g = (oracle_objective - objective) / std::abs(oracle_objective);
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.2f", 100.0 * g);
      gap = buf;
    }

    std::string status = "ok";
    if (cfg.target_load.has_value() && algo != "oracle") {
      if (load_norm <= *cfg.target_load + 1e-12) {
        status = "pass";
      } else {
        status = "FAIL";
        failed = true;
      }
    }
    std::printf("%-28s %-8s %-20s %12.6f %12.6f %10s %s\n", row.file.c_str(),
                algo.c_str(), row.seed.c_str(), objective, load_norm, gap.c_str(),
                status.c_str());
  }
  if (cfg.target_load.has_value())
    std::printf("target load_norm <= %s: %s\n", format_double(*cfg.target_load).c_str(),
                failed ? "FAIL" : "pass");
  return failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coded soft-TTL cache policy trainer and simulator"};
  app.require_subcommand(1);

  std::string config_path, checkpoint_path, policy_name, report_dir;

  struct Verb {
    CLI::App* cmd;
    ConfigFlags flags;
  };
  std::map<std::string, Verb> verbs;
  for (const std::string& name :
       {std::string("train-sarl"), std::string("train-marl"), std::string("evaluate"),
        std::string("oracle"), std::string("sweep"), std::string("report")}) {
    Verb& verb = verbs[name];  // flags must live at their final address before
                               // attach binds option references to them
    verb.cmd = app.add_subcommand(name, "");
    verb.cmd->add_option("--config", config_path, "key=value config file");
    verb.flags.attach(verb.cmd);
  }
  verbs["evaluate"].cmd->add_option("--checkpoint", checkpoint_path,
                                    "training checkpoint to evaluate");
  verbs["evaluate"].cmd->add_option("--policy", policy_name,
                                    "fixed policy: zero, full, static, oracle");
  verbs["report"].cmd->add_option("--dir", report_dir, "results directory");

  CLI11_PARSE(app, argc, argv);

  try {
    for (auto& [name, verb] : verbs) {
      if (!verb.cmd->parsed()) continue;
      if (name == "report") {
        // report tolerates a missing seed: it only reads result files.
        Config cfg;
        if (!config_path.empty()) cfg = Config::from_file(config_path);
        for (const auto& [key, value] : verb.flags.values)
          if (!value.empty()) cfg.apply(key, value);
        return run_report(cfg, report_dir);
      }
      Config cfg = verb.flags.resolve(config_path);
      if (name == "train-sarl") return run_training(cfg, false);
      if (name == "train-marl") return run_training(cfg, true);
      if (name == "evaluate") return run_evaluate(cfg, checkpoint_path, policy_name);
      if (name == "oracle") return run_oracle(cfg);
      if (name == "sweep") return run_sweep(cfg);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
