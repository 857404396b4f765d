#include "sttl/ddpg.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace sttl {

void concat_columns(const Matrix& a, const Matrix& b, Matrix& out) {
  assert(a.rows == b.rows);
  out.resize(a.rows, a.cols + b.cols);
  for (int i = 0; i < a.rows; ++i) {
    std::copy(a.row(i), a.row(i) + a.cols, out.row(i));
    std::copy(b.row(i), b.row(i) + b.cols, out.row(i) + a.cols);
  }
}

DdpgAgent::DdpgAgent(int state_dim, int action_dim, const Config& cfg,
                     std::uint64_t net_seed, std::uint64_t noise_seed,
                     std::uint64_t replay_seed)
    : state_dim_(state_dim),
      action_dim_(action_dim),
      batch_size_(cfg.batch_size),
      discount_(cfg.discount),
      polyak_(cfg.polyak),
      sigma2_(cfg.noise_variance),
      actor_(),
      critic_(),
      target_actor_(),
      target_critic_(),
      replay_(cfg.buffer_capacity, state_dim, action_dim),
      noise_rng_(noise_seed),
      replay_rng_(replay_seed) {
  Rng init_rng(net_seed);
  actor_ = Mlp(state_dim, cfg.hidden_units, action_dim, Mlp::OutputKind::sigmoid, init_rng);
  critic_ = Mlp(state_dim + action_dim, cfg.hidden_units, 1, Mlp::OutputKind::linear, init_rng);
  target_actor_ = actor_;
  target_critic_ = critic_;
  actor_opt_ = Adam(actor_.params().size(), cfg.actor_lr);
  critic_opt_ = Adam(critic_.params().size(), cfg.critic_lr);
}

std::vector<double> DdpgAgent::act(std::span<const double> state, bool explore) {
  assert(static_cast<int>(state.size()) == state_dim_);
  Matrix in(1, state_dim_);
  std::copy(state.begin(), state.end(), in.row(0));
  const Matrix& out = actor_.forward(in, /*train=*/false);
  std::vector<double> action(out.row(0), out.row(0) + action_dim_);
  if (explore && sigma2_ > 0) {
    const double sigma = std::sqrt(sigma2_);
    for (double& a : action) a = std::clamp(a + noise_rng_.normal(0.0, sigma), 0.0, 1.0);
  }
  return action;
}

void DdpgAgent::critic_update(const Matrix& s, const Matrix& a, const Matrix& s2,
                              const std::vector<double>& r,
                              const std::vector<char>& d) {
  const int n = s.rows;
  // y = r + gamma * (1-d) * target_critic(s', target_actor(s')).
  const Matrix& a2 = target_actor_.forward(s2, /*train=*/false);
  concat_columns(s2, a2, ws_sa_);
  const Matrix& q2 = target_critic_.forward(ws_sa_, /*train=*/false);
  std::vector<double> y(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    y[static_cast<std::size_t>(i)] =
        r[static_cast<std::size_t>(i)] +
        discount_ * (d[static_cast<std::size_t>(i)] ? 0.0 : 1.0) * q2.at(i, 0);

  // Mean squared error against y.
  concat_columns(s, a, ws_sa_);
  const Matrix& q = critic_.forward(ws_sa_, /*train=*/true);
  ws_dq_.resize(n, 1);
  for (int i = 0; i < n; ++i)
    ws_dq_.at(i, 0) = 2.0 * (q.at(i, 0) - y[static_cast<std::size_t>(i)]) / n;
  critic_.backward(ws_dq_);
  critic_.commit_bn_stats();
  critic_opt_.step(critic_.params(), critic_.grads());
}

void DdpgAgent::actor_update(const Matrix& s) {
  const int n = s.rows;
  // Ascend mean_q(s, actor(s)) with the critic frozen: its parameters stay
  // untouched and only its gradient wrt the action inputs is used. The critic
  // runs with its running statistics, not batch statistics: under batch
  // normalization a common shift of every action in the batch moves the batch
  // mean with it and leaves the normalized features unchanged, so the
  // batch-statistics gradient is blind to exactly the direction a policy step
  // most needs. Frozen statistics make the critic an ordinary function of the
  // action again (and match how it is evaluated when acting).
  const Matrix& a_pi = actor_.forward(s, /*train=*/true);
  concat_columns(s, a_pi, ws_sa_);
  critic_.forward(ws_sa_, /*train=*/false);
  ws_dq_.resize(n, 1);
  const double g = -1.0 / n;  // minimize -J
  for (int i = 0; i < n; ++i) ws_dq_.at(i, 0) = g;
  const Matrix& din = critic_.backward(ws_dq_);
  Matrix da(n, action_dim_);
  for (int i = 0; i < n; ++i)
    std::copy(din.row(i) + state_dim_, din.row(i) + state_dim_ + action_dim_, da.row(i));
  actor_.backward(da);
  actor_.commit_bn_stats();
  actor_opt_.step(actor_.params(), actor_.grads());
}

void DdpgAgent::check_finite() const {
  for (const double v : actor_.params())
    if (!std::isfinite(v))
      throw std::runtime_error("DdpgAgent: actor parameter became non-finite after update " +
                               std::to_string(updates_));
  for (const double v : critic_.params())
    if (!std::isfinite(v))
      throw std::runtime_error("DdpgAgent: critic parameter became non-finite after update " +
                               std::to_string(updates_));
}

void DdpgAgent::update() {
  if (replay_.size() < static_cast<std::size_t>(batch_size_)) return;
  replay_.sample(batch_size_, replay_rng_, ws_s_, ws_a_, ws_s2_, ws_r_, ws_d_);
  critic_update(ws_s_, ws_a_, ws_s2_, ws_r_, ws_d_);
  actor_update(ws_s_);
  target_actor_.blend_from(actor_, polyak_);
  target_critic_.blend_from(critic_, polyak_);
  ++updates_;
  check_finite();
}

nlohmann::json DdpgAgent::checkpoint() const {
  return nlohmann::json{{"version", 1},
                        {"state_dim", state_dim_},
                        {"action_dim", action_dim_},
                        {"updates", updates_},
                        {"actor", actor_.to_json()},
                        {"critic", critic_.to_json()},
                        {"target_actor", target_actor_.to_json()},
                        {"target_critic", target_critic_.to_json()},
                        {"actor_opt", actor_opt_.to_json()},
                        {"critic_opt", critic_opt_.to_json()}};
}

void DdpgAgent::restore(const nlohmann::json& j) {
  if (j.at("version").get<int>() != 1)
    throw std::runtime_error("DdpgAgent::restore: unsupported checkpoint version");
  if (j.at("state_dim").get<int>() != state_dim_ ||
      j.at("action_dim").get<int>() != action_dim_)
    throw std::runtime_error("DdpgAgent::restore: dimension mismatch");
  updates_ = j.at("updates").get<long long>();
  actor_ = Mlp::from_json(j.at("actor"));
  critic_ = Mlp::from_json(j.at("critic"));
  target_actor_ = Mlp::from_json(j.at("target_actor"));
  target_critic_ = Mlp::from_json(j.at("target_critic"));
  actor_opt_ = Adam::from_json(j.at("actor_opt"));
  critic_opt_ = Adam::from_json(j.at("critic_opt"));
}

}  // namespace sttl
