#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

#include "sttl/env_sarl.hpp"
#include "sttl/linalg.hpp"
#include "sttl/rng.hpp"

namespace sttl {

// Fixed-capacity ring buffer of transitions with uniform batch sampling.
// Storage grows as transitions arrive and overwrites oldest-first once the
// capacity is reached.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, int state_dim, int action_dim)
      : capacity_(capacity), state_dim_(state_dim), action_dim_(action_dim) {}

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }

  void add(const Transition& tr) {
    assert(tr.state.size() == static_cast<std::size_t>(state_dim_) &&
           tr.action.size() == static_cast<std::size_t>(action_dim_));
    if (size_ < capacity_) {
      states_.insert(states_.end(), tr.state.begin(), tr.state.end());
      actions_.insert(actions_.end(), tr.action.begin(), tr.action.end());
      next_states_.insert(next_states_.end(), tr.next_state.begin(), tr.next_state.end());
      rewards_.push_back(tr.reward);
      dones_.push_back(tr.done ? 1 : 0);
      ++size_;
      return;
    }
    const std::size_t i = head_;
    std::copy(tr.state.begin(), tr.state.end(),
              states_.begin() + static_cast<std::ptrdiff_t>(i * state_dim_));
    std::copy(tr.action.begin(), tr.action.end(),
              actions_.begin() + static_cast<std::ptrdiff_t>(i * action_dim_));
    std::copy(tr.next_state.begin(), tr.next_state.end(),
              next_states_.begin() + static_cast<std::ptrdiff_t>(i * state_dim_));
    rewards_[i] = tr.reward;
    dones_[i] = tr.done ? 1 : 0;
    head_ = (head_ + 1) % capacity_;
  }

  // Uniform sample with replacement into row-major batch matrices.
  void sample(int batch, Rng& rng, Matrix& s, Matrix& a, Matrix& s2,
              std::vector<double>& r, std::vector<char>& d) const {
    assert(size_ >= static_cast<std::size_t>(batch));
    s.resize(batch, state_dim_);
    a.resize(batch, action_dim_);
    s2.resize(batch, state_dim_);
    r.resize(static_cast<std::size_t>(batch));
    d.resize(static_cast<std::size_t>(batch));
    for (int row = 0; row < batch; ++row) {
      const std::size_t i = static_cast<std::size_t>(rng.below(size_));
      std::copy(states_.begin() + static_cast<std::ptrdiff_t>(i * state_dim_),
                states_.begin() + static_cast<std::ptrdiff_t>((i + 1) * state_dim_), s.row(row));
      std::copy(actions_.begin() + static_cast<std::ptrdiff_t>(i * action_dim_),
                actions_.begin() + static_cast<std::ptrdiff_t>((i + 1) * action_dim_), a.row(row));
      std::copy(next_states_.begin() + static_cast<std::ptrdiff_t>(i * state_dim_),
                next_states_.begin() + static_cast<std::ptrdiff_t>((i + 1) * state_dim_), s2.row(row));
      r[static_cast<std::size_t>(row)] = rewards_[i];
      d[static_cast<std::size_t>(row)] = dones_[i];
    }
  }

 private:
  std::size_t capacity_;
  int state_dim_;
  int action_dim_;
  std::size_t head_ = 0;  // overwrite position once full
  std::size_t size_ = 0;
  std::vector<double> states_, actions_, next_states_, rewards_;
  std::vector<char> dones_;
};

}  // namespace sttl
