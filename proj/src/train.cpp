#include "sttl/train.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <utility>

#include "sttl/rng.hpp"

namespace sttl {

namespace {

// Retry stride keeps re-draws far away from every other salt family.
constexpr std::uint64_t kTraceRetryStride = 0x400000000000ull;

bool trace_usable(const RequestTrace& trace) {
  return !trace.records.empty() && trace.records.front().next_same_file >= 0;
}

std::uint64_t trace_seed(std::uint64_t master, std::uint64_t salt, int index,
                         int attempt) {
  return derive_seed(master, salt + static_cast<std::uint64_t>(index) +
                                 static_cast<std::uint64_t>(attempt) * kTraceRetryStride);
}

std::vector<double> greedy_action(Mlp& actor, const std::vector<double>& state) {
  Matrix in;
  in.resize(1, static_cast<int>(state.size()));
  std::copy(state.begin(), state.end(), in.data.begin());
  const Matrix& out = actor.forward(in, /*train=*/false);
  return std::vector<double>(out.data.begin(), out.data.end());
}

// States carry the per-file time-average occupancies at offsets [2F, 3F).
double state_occupancy(const std::vector<double>& state, int num_files) {
  double sum = 0.0;
  for (int f = 0; f < num_files; ++f) sum += state[static_cast<std::size_t>(2 * num_files + f)];
  return sum;
}

double noise_schedule(const Config& cfg, int episode) {
  if (episode < cfg.episodes || cfg.anneal_episodes <= 0) return cfg.noise_variance;
  const int j = episode - cfg.episodes;
  return cfg.noise_variance * (1.0 - static_cast<double>(j + 1) / cfg.anneal_episodes);
}

}  // namespace

RequestTrace make_usable_trace(const Config& cfg, int requests,
                               std::uint64_t master_seed, std::uint64_t salt,
                               int index) {
  for (int attempt = 0; attempt < 64; ++attempt) {
    RequestTrace trace =
        generate_trace(cfg, requests, trace_seed(master_seed, salt, index, attempt));
    if (trace_usable(trace)) return trace;
  }
  throw std::runtime_error("train: could not draw a usable trace (index " +
                           std::to_string(index) + ")");
}

TrainResult train_sarl(const Config& cfg, const EpisodeCallback& on_episode) {
  const std::uint64_t master = cfg.seed();
  SarlEnv env(cfg);
  DdpgAgent agent(env.state_dim(), env.action_dim(), cfg,
                  derive_seed(master, kNetInitSalt), derive_seed(master, kNoiseSalt),
                  derive_seed(master, kReplaySalt));

  TrainResult result;
  const int total = cfg.episodes + cfg.anneal_episodes;
  result.log.reserve(static_cast<std::size_t>(total));
  for (int ep = 0; ep < total; ++ep) {
    const double sigma2 = noise_schedule(cfg, ep);
    agent.set_noise_variance(sigma2);

    RequestTrace trace =
        make_usable_trace(cfg, cfg.episode_requests, master, kTrainTraceSalt, ep);
    env.reset(&trace);
    double episode_return = 0.0;
    while (!env.done()) {
      std::vector<double> action = agent.act(env.state(), /*explore=*/true);
      Transition tr = env.step(action);
      episode_return += tr.reward;
      agent.observe(tr);
      agent.update();
    }

    EpisodeLog row{ep, episode_return, env.ledger().finalize(), sigma2};
    result.log.push_back(row);
    if (on_episode) on_episode(row);
  }

  result.checkpoint = nlohmann::json{{"version", 1},
                                     {"algo", "sarl"},
                                     {"seed", master},
                                     {"agent", agent.checkpoint()}};
  result.eval = evaluate_sarl_actor(cfg, agent.actor(), cfg.eval_episodes,
                                    cfg.eval_requests, master);
  return result;
}

TrainResult train_marl(const Config& cfg, const EpisodeCallback& on_episode) {
  const std::uint64_t master = cfg.seed();
  MarlSystem system(cfg);
  std::vector<DdpgAgent> agents;
  agents.reserve(static_cast<std::size_t>(cfg.num_sbs));
  for (int b = 1; b <= cfg.num_sbs; ++b) {
    agents.emplace_back(system.state_dim(), system.action_dim(), cfg,
                        derive_seed(master, kNetInitSalt + static_cast<std::uint64_t>(b)),
                        derive_seed(master, kNoiseSalt + static_cast<std::uint64_t>(b)),
                        derive_seed(master, kReplaySalt + static_cast<std::uint64_t>(b)));
  }

  TrainResult result;
  // Same run length as the synchronous variant; exploration stays fixed.
  const int total = cfg.episodes + cfg.anneal_episodes;
  result.log.reserve(static_cast<std::size_t>(total));
  for (int ep = 0; ep < total; ++ep) {
    RequestTrace trace;  // must outlive the episode; the system keeps a pointer
    bool ok = false;
    for (int attempt = 0; attempt < 64 && !ok; ++attempt) {
      trace = generate_trace(cfg, cfg.episode_requests,
                             trace_seed(master, kTrainTraceSalt, ep, attempt));
      if (!trace_usable(trace)) continue;
      try {
        system.reset(&trace);
        ok = true;
      } catch (const std::runtime_error&) {
        // every agent inert on this trace, draw another
      }
    }
    if (!ok)
      throw std::runtime_error("train: could not draw a usable trace (episode " +
                               std::to_string(ep) + ")");

    double episode_return = 0.0;
    for (int b = system.next_agent(); b != -1; b = system.next_agent()) {
      DdpgAgent& agent = agents[static_cast<std::size_t>(b - 1)];
      std::vector<double> action = agent.act(system.agent_state(b), /*explore=*/true);
      Transition tr = system.step_agent(action);
      episode_return += tr.reward;
      agent.observe(tr);
      agent.update();
    }

    EpisodeLog row{ep, episode_return, system.ledger().finalize(),
                   cfg.noise_variance};
    result.log.push_back(row);
    if (on_episode) on_episode(row);
  }

  nlohmann::json agent_dump = nlohmann::json::array();
  for (const DdpgAgent& agent : agents) agent_dump.push_back(agent.checkpoint());
  result.checkpoint = nlohmann::json{{"version", 1},
                                     {"algo", "marl"},
                                     {"seed", master},
                                     {"agents", std::move(agent_dump)}};

  std::vector<Mlp> actors;
  actors.reserve(agents.size());
  for (const DdpgAgent& agent : agents) actors.push_back(agent.actor());
  result.eval = evaluate_marl_actors(cfg, actors, cfg.eval_episodes,
                                     cfg.eval_requests, master);
  return result;
}

EvalStats evaluate_sarl_actor(const Config& cfg, const Mlp& actor, int episodes,
                              int requests, std::uint64_t master_seed) {
  Mlp greedy = actor;  // forward mutates activation caches, keep the input const
  SarlEnv env(cfg);
  EvalStats stats;
  stats.ledger.cost_sbs = cfg.cost_sbs;
  stats.ledger.cost_update = cfg.cost_update;
  for (int i = 0; i < episodes; ++i) {
    RequestTrace trace =
        make_usable_trace(cfg, requests, master_seed, kEvalTraceSalt, i);
    env.reset(&trace);
    double episode_reward = 0.0;
    long long episode_steps = 0;
    while (!env.done()) {
      std::vector<double> action = greedy_action(greedy, env.state());
      Transition tr = env.step(action);
      stats.sum_reward += tr.reward;
      stats.sum_reward_sq += tr.reward * tr.reward;
      stats.sum_obj_nopenalty += tr.reward + tr.r_mem;
      stats.sum_occupancy += state_occupancy(tr.next_state, cfg.num_files);
      ++stats.steps;
      episode_reward += tr.reward;
      ++episode_steps;
    }
    stats.ledger.merge(env.ledger());
    stats.episodes += 1;
    stats.replica_objectives.push_back(
        episode_steps > 0 ? episode_reward / static_cast<double>(episode_steps) : 0.0);
  }
  return stats;
}

EvalStats evaluate_marl_actors(const Config& cfg, const std::vector<Mlp>& actors,
                               int episodes, int requests, std::uint64_t master_seed) {
  if (static_cast<int>(actors.size()) != cfg.num_sbs)
    throw std::runtime_error("evaluate: expected one actor per SBS");
  std::vector<Mlp> greedy = actors;
  MarlSystem system(cfg);
  EvalStats stats;
  stats.ledger.cost_sbs = cfg.cost_sbs;
  stats.ledger.cost_update = cfg.cost_update;
  for (int i = 0; i < episodes; ++i) {
    RequestTrace trace;
    bool ok = false;
    for (int attempt = 0; attempt < 64 && !ok; ++attempt) {
      trace = generate_trace(cfg, requests,
                             trace_seed(master_seed, kEvalTraceSalt, i, attempt));
      if (!trace_usable(trace)) continue;
      try {
        system.reset(&trace);
        ok = true;
      } catch (const std::runtime_error&) {
      }
    }
    if (!ok)
      throw std::runtime_error("evaluate: could not draw a usable trace (episode " +
                               std::to_string(i) + ")");

    double episode_reward = 0.0;
    long long episode_steps = 0;
    for (int b = system.next_agent(); b != -1; b = system.next_agent()) {
      std::vector<double> action =
          greedy_action(greedy[static_cast<std::size_t>(b - 1)], system.agent_state(b));
      Transition tr = system.step_agent(action);
      stats.sum_reward += tr.reward;
      stats.sum_reward_sq += tr.reward * tr.reward;
      stats.sum_obj_nopenalty += tr.reward + tr.r_mem;
      stats.sum_occupancy += state_occupancy(tr.next_state, cfg.num_files);
      ++stats.steps;
      episode_reward += tr.reward;
      ++episode_steps;
    }
    stats.ledger.merge(system.ledger());
    stats.episodes += 1;
    stats.replica_objectives.push_back(
        episode_steps > 0 ? episode_reward / static_cast<double>(episode_steps) : 0.0);
  }
  return stats;
}

EvalStats evaluate_checkpoint(const Config& cfg, const nlohmann::json& checkpoint) {
  const std::string algo = checkpoint.at("algo").get<std::string>();
  if (algo == "sarl") {
    Mlp actor = Mlp::from_json(checkpoint.at("agent").at("actor"));
    return evaluate_sarl_actor(cfg, actor, cfg.eval_episodes, cfg.eval_requests,
                               cfg.seed());
  }
  if (algo == "marl") {
    std::vector<Mlp> actors;
    for (const auto& agent : checkpoint.at("agents"))
      actors.push_back(Mlp::from_json(agent.at("actor")));
    return evaluate_marl_actors(cfg, actors, cfg.eval_episodes, cfg.eval_requests,
                                cfg.seed());
  }
  throw std::runtime_error("evaluate: unknown checkpoint algorithm '" + algo + "'");
}

}  // namespace sttl
