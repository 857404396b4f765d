#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "json.hpp"

namespace sttl {

// Adaptive-moment gradient descent with bias correction.
class Adam {
 public:
  Adam() = default;
  explicit Adam(std::size_t n, double lr, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(n, 0.0), v_(n, 0.0) {}

  // One minimization step along grads.
  void step(std::span<double> params, std::span<const double> grads) {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grads[i];
      v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grads[i] * grads[i];
      const double mhat = m_[i] / bc1;
      const double vhat = v_[i] / bc2;
      params[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }

  nlohmann::json to_json() const {
    return nlohmann::json{{"lr", lr_}, {"beta1", beta1_}, {"beta2", beta2_},
                          {"eps", eps_}, {"t", t_},       {"m", m_},
                          {"v", v_}};
  }
  static Adam from_json(const nlohmann::json& j) {
    Adam a;
    a.lr_ = j.at("lr").get<double>();
    a.beta1_ = j.at("beta1").get<double>();
    a.beta2_ = j.at("beta2").get<double>();
    a.eps_ = j.at("eps").get<double>();
    a.t_ = j.at("t").get<long long>();
    a.m_ = j.at("m").get<std::vector<double>>();
    a.v_ = j.at("v").get<std::vector<double>>();
    return a;
  }

 private:
  double lr_ = 1e-3;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  long long t_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

}  // namespace sttl
