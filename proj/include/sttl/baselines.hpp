#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sttl/caching.hpp"
#include "sttl/config.hpp"
#include "sttl/requests.hpp"

namespace sttl {

// One slot vector x[0..K] per file, shared by all SBSs in synchronous mode.
struct PolicyTable {
  std::vector<std::vector<double>> x;

  static PolicyTable constant(int num_files, int num_slots, double fraction);
  static PolicyTable zero(int num_files, int num_slots);
  // Fills caches with the most popular files first until capacity is spent;
  // the marginal file gets the fractional remainder.
  static PolicyTable greedy_static_fill(const Config& cfg);
};

// Monte-Carlo outcome of simulating fixed policies. Rewards follow the same
// construction as the learning environments (downloads at the next request,
// update push, capacity deviation penalty).
struct EvalStats {
  LoadLedger ledger;
  double sum_reward = 0.0;
  double sum_reward_sq = 0.0;
  double sum_occupancy = 0.0;
  double sum_obj_nopenalty = 0.0;
  long long steps = 0;
  int episodes = 0;
  std::vector<double> replica_objectives;

  double objective() const { return steps > 0 ? sum_reward / steps : 0.0; }
  double objective_nopenalty() const {
    return steps > 0 ? sum_obj_nopenalty / steps : 0.0;
  }
  double mean_occupancy() const { return steps > 0 ? sum_occupancy / steps : 0.0; }
  // Replica-level standard error when several episodes were run, else the
  // per-step iid estimate.
  double objective_se() const;
  void merge(const EvalStats& other);
};

// Full-trace simulation with synchronous caches: every record's delivery is
// accounted and every request with a same-file successor applies the policy.
EvalStats evaluate_sync_on_trace(const Config& cfg, const PolicyTable& policy,
                                 const RequestTrace& trace);

// Per-SBS policies with per-agent filtered observations and the published
// estimate board, mirroring the asynchronous environment's reward.
EvalStats evaluate_async_on_trace(const Config& cfg,
                                  const std::vector<PolicyTable>& per_sbs,
                                  const RequestTrace& trace);

// Seeded wrappers: episodes independent traces of the given length, seeds
// drawn from the shared evaluation stream so policy comparisons use common
// random numbers.
EvalStats evaluate_sync_policy(const Config& cfg, const PolicyTable& policy,
                               int episodes, int requests, std::uint64_t master_seed);
EvalStats evaluate_async_policy(const Config& cfg,
                                const std::vector<PolicyTable>& per_sbs,
                                int episodes, int requests, std::uint64_t master_seed);

struct GridSearchResult {
  PolicyTable best;
  std::vector<double> best_shared;  // set in shared mode
  double objective = 0.0;
  double load_norm = 0.0;
  double mean_occupancy = 0.0;
  long long num_candidates = 0;
  bool from_cache = false;
};

// Exhaustive maximization of the Monte-Carlo objective over the policy grid.
// Shared mode searches one slot vector applied to every file; joint mode
// enumerates the per-file cross product and is limited to tiny instances.
// Candidate evaluations share trace seeds; ties break to the
// lexicographically smallest policy. Results are cached on disk under
// cfg.out_dir keyed by the relevant configuration.
GridSearchResult grid_search(const Config& cfg);

// Seed salts for the independent generator streams.
inline constexpr std::uint64_t kTrainTraceSalt = 1000;
inline constexpr std::uint64_t kSweepSalt = 4000000;
inline constexpr std::uint64_t kEvalTraceSalt = 2000000;
inline constexpr std::uint64_t kOracleTraceSalt = 3000000;
inline constexpr std::uint64_t kNetInitSalt = 100;
inline constexpr std::uint64_t kNoiseSalt = 200;
inline constexpr std::uint64_t kReplaySalt = 300;

}  // namespace sttl
