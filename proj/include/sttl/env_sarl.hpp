#pragma once

#include <span>
#include <vector>

#include "sttl/caching.hpp"
#include "sttl/config.hpp"
#include "sttl/requests.hpp"

namespace sttl {

// One stored interaction: (s, a, s', r, d) plus reward components for
// diagnostics and tests.
struct Transition {
  std::vector<double> state;
  std::vector<double> action;
  std::vector<double> next_state;
  double reward = 0.0;
  bool done = false;
  double r_sbs = 0.0;
  double r_upd = 0.0;
  double r_mem = 0.0;
};

// Writes [one-hot(file), mu, mubar] into out (size 3F). Files are 1-based.
void assemble_state(int file, std::span<const double> mu,
                    std::span<const double> mubar, std::span<double> out);

// Request-indexed MDP with synchronously updated caches: every SBS holds the
// same fraction of each file, actions replace the policy vector of the file
// requested at the cursor.
class SarlEnv {
 public:
  explicit SarlEnv(const Config& cfg);

  int state_dim() const { return 3 * num_files_; }
  int action_dim() const { return num_slots_ + 1; }

  // Positions the cursor at record 0 with cold caches. The trace must stay
  // alive for the whole episode. Throws on a trace whose first request has
  // no later request for the same file.
  void reset(const RequestTrace* trace);

  bool done() const { return done_; }
  int requested_file() const;
  const std::vector<double>& state() const { return state_; }

  // Applies the policy vector for the file at the cursor. Components are
  // clipped to [0,1]. Throws if the episode is over.
  Transition step(std::span<const double> action);

  const LoadLedger& ledger() const { return ledger_; }
  int steps_taken() const { return steps_; }

 private:
  int num_files_;
  int num_sbs_;
  int num_slots_;
  double update_period_;
  double capacity_;
  double cost_update_;
  double cost_sbs_;

  const RequestTrace* trace_ = nullptr;
  int cursor_ = 0;
  bool done_ = true;
  int steps_ = 0;
  std::vector<double> mu_;
  std::vector<double> mubar_;
  std::vector<double> state_;
  LoadLedger ledger_;
};

}  // namespace sttl
