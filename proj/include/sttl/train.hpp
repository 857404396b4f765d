#pragma once

#include <functional>
#include <vector>

#include "json.hpp"

#include "sttl/baselines.hpp"
#include "sttl/config.hpp"
#include "sttl/ddpg.hpp"
#include "sttl/env_marl.hpp"
#include "sttl/env_sarl.hpp"
#include "sttl/mlp.hpp"

namespace sttl {

struct EpisodeLog {
  int episode = 0;
  double episode_return = 0.0;
  LoadLedger::Summary summary;  // this episode's ledger, finalized
  double noise_variance = 0.0;
};

struct TrainResult {
  std::vector<EpisodeLog> log;
  nlohmann::json checkpoint;
  EvalStats eval;  // greedy evaluation after training
};

using EpisodeCallback = std::function<void(const EpisodeLog&)>;

// Trains for episodes + anneal_episodes episodes; the noise variance stays
// fixed through the first block and decreases linearly to zero across the
// anneal block. Finishes with a greedy evaluation on the shared eval stream.
TrainResult train_sarl(const Config& cfg, const EpisodeCallback& on_episode = {});

// Independent learners, one per SBS, driven by the interleaved scheduler.
// Exploration noise stays fixed for the entire run.
TrainResult train_marl(const Config& cfg, const EpisodeCallback& on_episode = {});

// Greedy closed-loop evaluation of trained actors on the evaluation stream.
EvalStats evaluate_sarl_actor(const Config& cfg, const Mlp& actor, int episodes,
                              int requests, std::uint64_t master_seed);
EvalStats evaluate_marl_actors(const Config& cfg, const std::vector<Mlp>& actors,
                               int episodes, int requests, std::uint64_t master_seed);

// Rebuilds actors from a training checkpoint (either algorithm) and runs the
// matching greedy evaluation under cfg.
EvalStats evaluate_checkpoint(const Config& cfg, const nlohmann::json& checkpoint);

// Trace generation that retries derived seeds until an environment accepts
// the trace (first request must have a same-file successor).
RequestTrace make_usable_trace(const Config& cfg, int requests,
                               std::uint64_t master_seed, std::uint64_t salt,
                               int index);

}  // namespace sttl
