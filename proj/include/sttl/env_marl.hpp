#pragma once

#include <span>
#include <vector>

#include "sttl/caching.hpp"
#include "sttl/config.hpp"
#include "sttl/env_sarl.hpp"
#include "sttl/requests.hpp"

namespace sttl {

// Latest cached-fraction value each agent has published for each file.
// Single writer per row (the owning agent); anyone may read.
class EstimateBoard {
 public:
  void reset(int num_sbs, int num_files) {
    values_.assign(static_cast<std::size_t>(num_sbs) * num_files, 0.0);
    num_files_ = num_files;
  }
  double get(int b, int file) const {
    return values_[static_cast<std::size_t>(b - 1) * num_files_ + (file - 1)];
  }
  void publish(int b, int file, double value) {
    values_[static_cast<std::size_t>(b - 1) * num_files_ + (file - 1)] = value;
  }

 private:
  int num_files_ = 0;
  std::vector<double> values_;
};

// Independent per-SBS agents on one shared trace. Each agent sees only the
// requests covering its SBS; a single interleaved scheduler advances all
// agents in global real-time order, which makes board staleness one-sided:
// an agent never reads an estimate published after its own step.
class MarlSystem {
 public:
  explicit MarlSystem(const Config& cfg);

  int num_agents() const { return num_sbs_; }
  int state_dim() const { return 3 * num_files_ + (num_sbs_ - 1); }
  int action_dim() const { return num_slots_ + 1; }

  // Builds per-agent filtered views of the trace. Throws if no agent can
  // take a single step. Agents whose filtered view is empty or starts with a
  // last request are inert: they never act and their caches stay cold.
  void reset(const RequestTrace* trace);

  // Advances the scheduler to the next agent due to act, accounting each
  // visited record's delivery from the true caches on the way. Returns the
  // agent id (1-based) or -1 when every agent is done.
  int next_agent();

  // Acting state of the pending agent returned by next_agent().
  const std::vector<double>& agent_state(int b) const;

  // Applies the pending agent's action and publishes its new fraction to the
  // board. All board reads for the transition happen here, at step time.
  Transition step_agent(std::span<const double> action);

  const LoadLedger& ledger() const { return ledger_; }
  int agent_steps(int b) const { return tracks_[static_cast<std::size_t>(b - 1)].steps; }
  bool agent_inert(int b) const { return tracks_[static_cast<std::size_t>(b - 1)].inert; }
  const EstimateBoard& board() const { return board_; }

 private:
  struct AgentTrack {
    std::vector<int> global_idx;  // filtered subsequence, as global record indices
    std::vector<int> next_same;   // next filtered position requesting the same file
    int cursor = 0;               // filtered position the agent acts at next
    bool alive = false;
    bool inert = false;
    std::vector<double> mu;
    std::vector<double> mubar;
    std::vector<double> state;
    int steps = 0;
  };

  void assemble_agent_state(int b, AgentTrack& track, int filtered_pos);
  bool any_alive() const;

  int num_files_;
  int num_sbs_;
  int num_slots_;
  double update_period_;
  double capacity_;
  double cost_update_;
  double cost_sbs_;

  const RequestTrace* trace_ = nullptr;
  std::vector<AgentTrack> tracks_;
  EstimateBoard board_;
  LoadLedger ledger_;

  int record_ = -1;              // last visited global record
  std::vector<int> pending_;     // agents due to act at record_, increasing id
  std::size_t pending_pos_ = 0;
  int acting_ = -1;              // agent returned by next_agent, not yet stepped
};

}  // namespace sttl
