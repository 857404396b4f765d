#include "sttl/env_sarl.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace sttl {

void assemble_state(int file, std::span<const double> mu,
                    std::span<const double> mubar, std::span<double> out) {
  const std::size_t f = mu.size();
  assert(mubar.size() == f && out.size() == 3 * f);
  std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(f), 0.0);
  out[static_cast<std::size_t>(file - 1)] = 1.0;
  std::copy(mu.begin(), mu.end(), out.begin() + static_cast<std::ptrdiff_t>(f));
  std::copy(mubar.begin(), mubar.end(), out.begin() + static_cast<std::ptrdiff_t>(2 * f));
}

SarlEnv::SarlEnv(const Config& cfg)
    : num_files_(cfg.num_files),
      num_sbs_(cfg.num_sbs),
      num_slots_(cfg.num_slots),
      update_period_(cfg.update_period),
      capacity_(cfg.cache_capacity),
      cost_update_(cfg.cost_update),
      cost_sbs_(cfg.cost_sbs) {
  mu_.resize(static_cast<std::size_t>(num_files_));
  mubar_.resize(static_cast<std::size_t>(num_files_));
  state_.resize(static_cast<std::size_t>(state_dim()));
}

void SarlEnv::reset(const RequestTrace* trace) {
  if (trace == nullptr || trace->records.empty() ||
      trace->records.front().next_same_file < 0)
    throw std::runtime_error(
        "SarlEnv::reset: degenerate trace, first request has no successor for its file");
  trace_ = trace;
  cursor_ = 0;
  done_ = false;
  steps_ = 0;
  std::fill(mu_.begin(), mu_.end(), 0.0);
  std::fill(mubar_.begin(), mubar_.end(), 0.0);
  ledger_ = LoadLedger{};
  ledger_.cost_sbs = cost_sbs_;
  ledger_.cost_update = cost_update_;
  assemble_state(trace_->records.front().file, mu_, mubar_, state_);
}

int SarlEnv::requested_file() const {
  return trace_->records[static_cast<std::size_t>(cursor_)].file;
}

Transition SarlEnv::step(std::span<const double> action) {
  if (done_ || trace_ == nullptr)
    throw std::runtime_error("SarlEnv::step: episode exhausted");
  assert(static_cast<int>(action.size()) == action_dim());

  const auto& records = trace_->records;
  const auto& rec = records[static_cast<std::size_t>(cursor_)];
  const std::size_t f = static_cast<std::size_t>(rec.file - 1);
  assert(rec.next_same_file >= 0);

  Transition tr;
  tr.state = state_;
  tr.action.assign(action.begin(), action.end());
  for (double& a : tr.action) a = std::clamp(a, 0.0, 1.0);

  // Delivery of the current request, served from caches as they stand.
  const int cov_now = std::popcount(rec.coverage);
  const double served = sbs_download_from_sum(cov_now * mu_[f]);
  ledger_.add_request(served, 1.0 - served);

  // Non-causal quantities at the next request for this file.
  const double tau = trace_->gap_after(cursor_);
  const auto& next_f_rec = records[static_cast<std::size_t>(rec.next_same_file)];
  const int cov_next = std::popcount(next_f_rec.coverage);

  const int ell = slot_index(tau, update_period_, num_slots_);
  const double mu_prev = mu_[f];
  mu_[f] = tr.action[static_cast<std::size_t>(ell)];
  mubar_[f] = average_occupancy(tr.action, tau, update_period_);

  tr.r_sbs = sbs_download_from_sum(cov_next * mu_[f]);
  tr.r_upd = update_traffic(tr.action, mu_prev, ell, num_sbs_);
  ledger_.add_update(tr.r_upd);

  double occupied = 0.0;
  for (const double m : mubar_) occupied += m;
  tr.r_mem = std::abs(occupied - capacity_);

  tr.reward = tr.r_sbs - cost_update_ * tr.r_upd - tr.r_mem;

  ++cursor_;
  ++steps_;
  const auto& next_rec = records[static_cast<std::size_t>(cursor_)];
  tr.done = next_rec.is_last;
  assemble_state(next_rec.file, mu_, mubar_, state_);
  tr.next_state = state_;
  done_ = tr.done;
  ledger_.elapsed_time = rec.time;
  return tr;
}

}  // namespace sttl
