#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sttl/linalg.hpp"
#include "sttl/rng.hpp"

#include "json.hpp"

namespace sttl {

// Two hidden layers with batch normalization before the rectifier, then a
// linear output head, optionally squashed by a sigmoid. All parameters live
// in one flat vector (weights, biases, scales, shifts in a fixed order) so
// the optimizer, the target blending, and checkpoints can treat the network
// as a single array. Running normalization statistics are kept separately;
// they are not trained but they are blended and checkpointed.
class Mlp {
 public:
  enum class OutputKind { linear, sigmoid };

  Mlp() = default;
  // Weights start uniform with fan-in scaling; the output layer starts at
  // magnitude 1e-3 so early values are small.
  Mlp(int in_dim, int hidden, int out_dim, OutputKind kind, Rng& init_rng);

  int in_dim() const { return in_dim_; }
  int hidden_dim() const { return hidden_; }
  int out_dim() const { return out_dim_; }

  // Runs a batch (one sample per row). train=true normalizes by batch
  // statistics and caches them; train=false uses the running statistics.
  // Neither path mutates the running statistics: call commit_bn_stats()
  // to fold the cached batch statistics in. Caches activations for backward.
  const Matrix& forward(const Matrix& input, bool train);

  // Backpropagates dL/doutput of the last forward. Fills grads() and
  // returns dL/dinput (needed to reach the action inputs of a critic).
  const Matrix& backward(const Matrix& dout);

  // Momentum update of the running statistics from the last train forward.
  void commit_bn_stats(double momentum = 0.1);

  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }
  std::vector<double>& grads() { return grads_; }
  std::vector<double>& bn_stats() { return stats_; }
  const std::vector<double>& bn_stats() const { return stats_; }

  // target <- rho*target + (1-rho)*online, parameters and running stats.
  void blend_from(const Mlp& online, double rho);

  nlohmann::json to_json() const;
  static Mlp from_json(const nlohmann::json& j);

 private:
  struct Offsets {
    std::size_t w1, b1, g1, be1, w2, b2, g2, be2, wo, bo, total;
  };
  Offsets off_;
  void compute_offsets();

  double* p(std::size_t off) { return params_.data() + off; }
  const double* p(std::size_t off) const { return params_.data() + off; }

  int in_dim_ = 0;
  int hidden_ = 0;
  int out_dim_ = 0;
  OutputKind kind_ = OutputKind::linear;

  std::vector<double> params_;
  std::vector<double> grads_;
  std::vector<double> stats_;  // [mean1, var1, mean2, var2]

  // Forward caches.
  bool last_train_ = false;
  Matrix in_, z1_, zhat1_, a1_, z2_, zhat2_, a2_, y_, out_;
  std::vector<double> istd1_, istd2_;          // 1/sqrt(var+eps) used in forward
  std::vector<double> batch_m1_, batch_v1_, batch_m2_, batch_v2_;
  // Backward workspaces.
  Matrix dy_, da2_, dz2_, da1_, dz1_, din_;
};

}  // namespace sttl
