#pragma once

#include <span>
#include <string>
#include <vector>

#include "sttl/adam.hpp"
#include "sttl/config.hpp"
#include "sttl/mlp.hpp"
#include "sttl/replay.hpp"
#include "sttl/rng.hpp"

#include "json.hpp"

namespace sttl {

// Deterministic policy-gradient learner: sigmoid actor, scalar critic fed
// the state-action concatenation, target copies blended with factor polyak,
// uniform replay, Gaussian exploration clipped to the action box.
class DdpgAgent {
 public:
  DdpgAgent(int state_dim, int action_dim, const Config& cfg,
            std::uint64_t net_seed, std::uint64_t noise_seed,
            std::uint64_t replay_seed);

  int state_dim() const { return state_dim_; }
  int action_dim() const { return action_dim_; }

  // Greedy action uses running-statistics normalization (batch of one).
  // With explore, independent Gaussian noise of the current variance is
  // added per component and the result clipped to [0,1].
  std::vector<double> act(std::span<const double> state, bool explore);

  void set_noise_variance(double v) { sigma2_ = v; }
  double noise_variance() const { return sigma2_; }

  void observe(const Transition& tr) { replay_.add(tr); }
  std::size_t replay_size() const { return replay_.size(); }

  // One critic step, one actor step, one target blend; no-op until the
  // buffer holds a full batch. Throws if a parameter went non-finite.
  void update();

  // Deterministic policy snapshot for evaluation.
  const Mlp& actor() const { return actor_; }
  const Mlp& critic() const { return critic_; }

  nlohmann::json checkpoint() const;
  void restore(const nlohmann::json& j);

 private:
  void critic_update(const Matrix& s, const Matrix& a, const Matrix& s2,
                     const std::vector<double>& r, const std::vector<char>& d);
  void actor_update(const Matrix& s);
  void check_finite() const;

  int state_dim_;
  int action_dim_;
  int batch_size_;
  double discount_;
  double polyak_;
  double sigma2_;

  Mlp actor_, critic_, target_actor_, target_critic_;
  Adam actor_opt_, critic_opt_;
  ReplayBuffer replay_;
  Rng noise_rng_;
  Rng replay_rng_;

  // Workspaces.
  Matrix ws_s_, ws_a_, ws_s2_, ws_sa_, ws_dq_;
  std::vector<double> ws_r_;
  std::vector<char> ws_d_;
  long long updates_ = 0;
};

// Concatenates state and action batches row-wise into out.
void concat_columns(const Matrix& a, const Matrix& b, Matrix& out);

}  // namespace sttl
