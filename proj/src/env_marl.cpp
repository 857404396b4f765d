#include "sttl/env_marl.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace sttl {

MarlSystem::MarlSystem(const Config& cfg)
    : num_files_(cfg.num_files),
      num_sbs_(cfg.num_sbs),
      num_slots_(cfg.num_slots),
      update_period_(cfg.update_period),
      capacity_(cfg.cache_capacity),
      cost_update_(cfg.cost_update),
      cost_sbs_(cfg.cost_sbs) {
  tracks_.resize(static_cast<std::size_t>(num_sbs_));
}

void MarlSystem::assemble_agent_state(int b, AgentTrack& track, int filtered_pos) {
  const auto& rec =
      trace_->records[static_cast<std::size_t>(track.global_idx[static_cast<std::size_t>(filtered_pos)])];
  assemble_state(rec.file, track.mu, track.mubar,
                 std::span<double>(track.state.data(), static_cast<std::size_t>(3 * num_files_)));
  // Estimates of the requested file at every other SBS, increasing id.
  std::size_t k = static_cast<std::size_t>(3 * num_files_);
  for (int other = 1; other <= num_sbs_; ++other) {
    if (other == b) continue;
    track.state[k++] = board_.get(other, rec.file);
  }
}

void MarlSystem::reset(const RequestTrace* trace) {
  if (trace == nullptr || trace->records.empty())
    throw std::runtime_error("MarlSystem::reset: empty trace");
  trace_ = trace;
  board_.reset(num_sbs_, num_files_);
  ledger_ = LoadLedger{};
  ledger_.cost_sbs = cost_sbs_;
  ledger_.cost_update = cost_update_;
  record_ = -1;
  pending_.clear();
  pending_pos_ = 0;
  acting_ = -1;

  const int n = static_cast<int>(trace->records.size());
  for (int b = 1; b <= num_sbs_; ++b) {
    auto& track = tracks_[static_cast<std::size_t>(b - 1)];
    track.global_idx.clear();
    const std::uint32_t bit = 1u << (b - 1);
    for (int i = 0; i < n; ++i)
      if (trace->records[static_cast<std::size_t>(i)].coverage & bit)
        track.global_idx.push_back(i);

    // Successor links within the filtered subsequence.
    const int m = static_cast<int>(track.global_idx.size());
    track.next_same.assign(static_cast<std::size_t>(m), -1);
    std::vector<int> seen(static_cast<std::size_t>(num_files_), -1);
    for (int i = m - 1; i >= 0; --i) {
      const int f = trace->records[static_cast<std::size_t>(track.global_idx[static_cast<std::size_t>(i)])].file;
      track.next_same[static_cast<std::size_t>(i)] = seen[static_cast<std::size_t>(f - 1)];
      seen[static_cast<std::size_t>(f - 1)] = i;
    }

    track.cursor = 0;
    track.alive = m > 0 && track.next_same[0] >= 0;
    track.inert = !track.alive;
    track.steps = 0;
    track.mu.assign(static_cast<std::size_t>(num_files_), 0.0);
    track.mubar.assign(static_cast<std::size_t>(num_files_), 0.0);
    track.state.assign(static_cast<std::size_t>(state_dim()), 0.0);
    if (track.alive) assemble_agent_state(b, track, 0);
  }
  if (!any_alive())
    throw std::runtime_error("MarlSystem::reset: degenerate trace, no agent can step");
}

bool MarlSystem::any_alive() const {
  for (const auto& t : tracks_)
    if (t.alive) return true;
  return false;
}

int MarlSystem::next_agent() {
  assert(acting_ < 0 && "step_agent must consume the pending agent first");
  while (true) {
    if (pending_pos_ < pending_.size()) {
      acting_ = pending_[pending_pos_];
      return acting_;
    }
    if (!any_alive()) return -1;

    ++record_;
    assert(record_ < static_cast<int>(trace_->records.size()));
    const auto& rec = trace_->records[static_cast<std::size_t>(record_)];
    const std::size_t f = static_cast<std::size_t>(rec.file - 1);

    // Delivery from the true caches of every covering SBS, frozen or not.
    double mu_sum = 0.0;
    for (int b = 1; b <= num_sbs_; ++b)
      if (rec.coverage & (1u << (b - 1))) mu_sum += tracks_[static_cast<std::size_t>(b - 1)].mu[f];
    const double served = sbs_download_from_sum(mu_sum);
    ledger_.add_request(served, 1.0 - served);
    ledger_.elapsed_time = rec.time;

    pending_.clear();
    pending_pos_ = 0;
    for (int b = 1; b <= num_sbs_; ++b) {
      const auto& track = tracks_[static_cast<std::size_t>(b - 1)];
      if (track.alive && (rec.coverage & (1u << (b - 1))) &&
          track.global_idx[static_cast<std::size_t>(track.cursor)] == record_)
        pending_.push_back(b);
    }
  }
}

const std::vector<double>& MarlSystem::agent_state(int b) const {
  return tracks_[static_cast<std::size_t>(b - 1)].state;
}

Transition MarlSystem::step_agent(std::span<const double> action) {
  if (acting_ < 0) throw std::runtime_error("MarlSystem::step_agent: no pending agent");
  const int b = acting_;
  auto& track = tracks_[static_cast<std::size_t>(b - 1)];
  assert(static_cast<int>(action.size()) == action_dim());

  const int pos = track.cursor;
  const int g = track.global_idx[static_cast<std::size_t>(pos)];
  const auto& rec = trace_->records[static_cast<std::size_t>(g)];
  const std::size_t f = static_cast<std::size_t>(rec.file - 1);
  const int next_pos = track.next_same[static_cast<std::size_t>(pos)];
  assert(next_pos >= 0);
  const int next_g = track.global_idx[static_cast<std::size_t>(next_pos)];
  const auto& next_f_rec = trace_->records[static_cast<std::size_t>(next_g)];

  Transition tr;
  tr.state = track.state;
  tr.action.assign(action.begin(), action.end());
  for (double& a : tr.action) a = std::clamp(a, 0.0, 1.0);

  const double tau = next_f_rec.time - rec.time;
  const int ell = slot_index(tau, update_period_, num_slots_);
  const double mu_prev = track.mu[f];
  track.mu[f] = tr.action[static_cast<std::size_t>(ell)];
  track.mubar[f] = average_occupancy(tr.action, tau, update_period_);

  // Estimated help from the other SBSs covering the next request for this
  // file, read from the board now (never from the future).
  double est = track.mu[f];
  for (int other = 1; other <= num_sbs_; ++other)
    if (other != b && (next_f_rec.coverage & (1u << (other - 1))))
      est += board_.get(other, rec.file);
  tr.r_sbs = sbs_download_from_sum(est);

  tr.r_upd = update_traffic(tr.action, mu_prev, ell, 1);
  ledger_.add_update(tr.r_upd);

  double occupied = 0.0;
  for (const double m : track.mubar) occupied += m;
  tr.r_mem = std::abs(occupied - capacity_);
  tr.reward = tr.r_sbs - cost_update_ * tr.r_upd - tr.r_mem;

  board_.publish(b, rec.file, track.mu[f]);

  ++track.steps;
  acting_ = -1;
  ++pending_pos_;

  // The agent's next acting position is simply pos+1 in its filtered view.
  const int next_obs = pos + 1;
  assert(next_obs < static_cast<int>(track.global_idx.size()));
  tr.done = track.next_same[static_cast<std::size_t>(next_obs)] < 0;
  track.cursor = next_obs;
  if (tr.done) track.alive = false;
  assemble_agent_state(b, track, next_obs);
  tr.next_state = track.state;
  return tr;
}

}  // namespace sttl
