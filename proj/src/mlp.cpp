#include "sttl/mlp.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace sttl {

namespace {
constexpr double kBnEps = 1e-5;
}

void Mlp::compute_offsets() {
  const std::size_t d = static_cast<std::size_t>(in_dim_);
  const std::size_t h = static_cast<std::size_t>(hidden_);
  const std::size_t o = static_cast<std::size_t>(out_dim_);
  off_.w1 = 0;
  off_.b1 = off_.w1 + h * d;
  off_.g1 = off_.b1 + h;
  off_.be1 = off_.g1 + h;
  off_.w2 = off_.be1 + h;
  off_.b2 = off_.w2 + h * h;
  off_.g2 = off_.b2 + h;
  off_.be2 = off_.g2 + h;
  off_.wo = off_.be2 + h;
  off_.bo = off_.wo + o * h;
  off_.total = off_.bo + o;
}

Mlp::Mlp(int in_dim, int hidden, int out_dim, OutputKind kind, Rng& init_rng)
    : in_dim_(in_dim), hidden_(hidden), out_dim_(out_dim), kind_(kind) {
  compute_offsets();
  params_.assign(off_.total, 0.0);
  grads_.assign(off_.total, 0.0);
  stats_.assign(static_cast<std::size_t>(4 * hidden_), 0.0);
  // Running variances start at 1 so an untrained net is usable in eval mode.
  for (int j = 0; j < hidden_; ++j) {
    stats_[static_cast<std::size_t>(hidden_ + j)] = 1.0;
    stats_[static_cast<std::size_t>(3 * hidden_ + j)] = 1.0;
  }

  const auto fill = [&](std::size_t off, std::size_t count, double scale) {
    for (std::size_t i = 0; i < count; ++i)
      params_[off + i] = init_rng.uniform(-scale, scale);
  };
  const std::size_t d = static_cast<std::size_t>(in_dim_);
  const std::size_t h = static_cast<std::size_t>(hidden_);
  const std::size_t o = static_cast<std::size_t>(out_dim_);
  const double s1 = 1.0 / std::sqrt(static_cast<double>(in_dim_));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden_));
  fill(off_.w1, h * d, s1);
  fill(off_.b1, h, s1);
  for (std::size_t j = 0; j < h; ++j) params_[off_.g1 + j] = 1.0;
  fill(off_.w2, h * h, s2);
  fill(off_.b2, h, s2);
  for (std::size_t j = 0; j < h; ++j) params_[off_.g2 + j] = 1.0;
  fill(off_.wo, o * h, 1e-3);
  fill(off_.bo, o, 1e-3);
}

namespace {

// z (N x H) -> a = relu(gamma*zhat + beta); zhat cached for backward.
void bn_relu_forward(const Matrix& z, const double* gamma, const double* beta,
                     const double* mean, const double* istd, Matrix& zhat,
                     Matrix& a) {
  const int n = z.rows;
  const int h = z.cols;
  zhat.resize(n, h);
  a.resize(n, h);
  for (int i = 0; i < n; ++i) {
    const double* zi = z.row(i);
    double* zh = zhat.row(i);
    double* ai = a.row(i);
    for (int j = 0; j < h; ++j) {
      const double v = (zi[j] - mean[j]) * istd[j];
      zh[j] = v;
      const double act = gamma[j] * v + beta[j];
      ai[j] = act > 0.0 ? act : 0.0;
    }
  }
}

void batch_stats(const Matrix& z, std::vector<double>& mean, std::vector<double>& var) {
  const int n = z.rows;
  const int h = z.cols;
  mean.assign(static_cast<std::size_t>(h), 0.0);
  var.assign(static_cast<std::size_t>(h), 0.0);
  for (int i = 0; i < n; ++i) {
    const double* zi = z.row(i);
    for (int j = 0; j < h; ++j) mean[static_cast<std::size_t>(j)] += zi[j];
  }
  for (int j = 0; j < h; ++j) mean[static_cast<std::size_t>(j)] /= n;
  for (int i = 0; i < n; ++i) {
    const double* zi = z.row(i);
    for (int j = 0; j < h; ++j) {
      const double d = zi[j] - mean[static_cast<std::size_t>(j)];
      var[static_cast<std::size_t>(j)] += d * d;
    }
  }
  for (int j = 0; j < h; ++j) var[static_cast<std::size_t>(j)] /= n;
}

void inv_std(const std::vector<double>& var, std::vector<double>& istd) {
  istd.resize(var.size());
  for (std::size_t j = 0; j < var.size(); ++j) istd[j] = 1.0 / std::sqrt(var[j] + kBnEps);
}

}  // namespace

const Matrix& Mlp::forward(const Matrix& input, bool train) {
  assert(input.cols == in_dim_);
  last_train_ = train;
  in_ = input;
  const std::size_t h = static_cast<std::size_t>(hidden_);

  auto wrap = [&](std::size_t off, int rows, int cols) {
    Matrix m(rows, cols);
    std::copy(p(off), p(off) + static_cast<std::size_t>(rows) * cols, m.data.begin());
    return m;
  };
  auto running_istd = [&](std::size_t var_off, std::vector<double>& istd) {
    istd.resize(h);
    for (std::size_t j = 0; j < h; ++j)
      istd[j] = 1.0 / std::sqrt(stats_[var_off + j] + kBnEps);
  };

  const Matrix w1 = wrap(off_.w1, hidden_, in_dim_);
  linalg::matmul_nt(in_, w1, z1_);
  linalg::add_row_vector(z1_, std::span<const double>(p(off_.b1), h));

  const double* mean1;
  if (train) {
    batch_stats(z1_, batch_m1_, batch_v1_);
    mean1 = batch_m1_.data();
    inv_std(batch_v1_, istd1_);
  } else {
    mean1 = stats_.data();
    running_istd(h, istd1_);
  }
  bn_relu_forward(z1_, p(off_.g1), p(off_.be1), mean1, istd1_.data(), zhat1_, a1_);

  const Matrix w2 = wrap(off_.w2, hidden_, hidden_);
  linalg::matmul_nt(a1_, w2, z2_);
  linalg::add_row_vector(z2_, std::span<const double>(p(off_.b2), h));

  const double* mean2;
  if (train) {
    batch_stats(z2_, batch_m2_, batch_v2_);
    mean2 = batch_m2_.data();
    inv_std(batch_v2_, istd2_);
  } else {
    mean2 = stats_.data() + 2 * h;
    running_istd(3 * h, istd2_);
  }
  bn_relu_forward(z2_, p(off_.g2), p(off_.be2), mean2, istd2_.data(), zhat2_, a2_);

  const Matrix wo = wrap(off_.wo, out_dim_, hidden_);
  linalg::matmul_nt(a2_, wo, y_);
  linalg::add_row_vector(y_, std::span<const double>(p(off_.bo), static_cast<std::size_t>(out_dim_)));

  out_ = y_;
  if (kind_ == OutputKind::sigmoid) {
    for (double& v : out_.data) v = 1.0 / (1.0 + std::exp(-v));
  }
  return out_;
}

namespace {

// Backward through batch normalization + rectifier for one layer.
// dact: gradient at the rectifier output (N x H), consumed in place.
// Returns dz in dz. Train mode uses the batch-statistics derivative; eval
// mode treats the normalization as a fixed affine map.
void bn_relu_backward(const Matrix& a, const Matrix& zhat, const double* gamma,
                      const std::vector<double>& istd, bool train, Matrix& dact,
                      Matrix& dz, double* dgamma, double* dbeta) {
  const int n = a.rows;
  const int h = a.cols;
  dz.resize(n, h);
  // Rectifier mask and scale/shift gradients.
  for (int j = 0; j < h; ++j) {
    dgamma[j] = 0.0;
    dbeta[j] = 0.0;
  }
  for (int i = 0; i < n; ++i) {
    double* di = dact.row(i);
    const double* ai = a.row(i);
    const double* zh = zhat.row(i);
    for (int j = 0; j < h; ++j) {
      if (ai[j] <= 0.0) di[j] = 0.0;
      dgamma[j] += di[j] * zh[j];
      dbeta[j] += di[j];
    }
  }
  if (!train) {
    for (int i = 0; i < n; ++i) {
      const double* di = dact.row(i);
      double* dzi = dz.row(i);
      for (int j = 0; j < h; ++j) dzi[j] = di[j] * gamma[j] * istd[j];
    }
    return;
  }
  // dz = istd/N * (N*dzhat - sum(dzhat) - zhat * sum(dzhat*zhat))
  std::vector<double> sum1(static_cast<std::size_t>(h), 0.0);
  std::vector<double> sum2(static_cast<std::size_t>(h), 0.0);
  for (int i = 0; i < n; ++i) {
    const double* di = dact.row(i);
    const double* zh = zhat.row(i);
    for (int j = 0; j < h; ++j) {
      const double dzh = di[j] * gamma[j];
      sum1[static_cast<std::size_t>(j)] += dzh;
      sum2[static_cast<std::size_t>(j)] += dzh * zh[j];
    }
  }
  const double invn = 1.0 / n;
  for (int i = 0; i < n; ++i) {
    const double* di = dact.row(i);
    const double* zh = zhat.row(i);
    double* dzi = dz.row(i);
    for (int j = 0; j < h; ++j) {
      const double dzh = di[j] * gamma[j];
      dzi[j] = istd[static_cast<std::size_t>(j)] *
               (dzh - invn * sum1[static_cast<std::size_t>(j)] -
                zh[j] * invn * sum2[static_cast<std::size_t>(j)]);
    }
  }
}

}  // namespace

const Matrix& Mlp::backward(const Matrix& dout) {
  const int n = dout.rows;
  assert(dout.cols == out_dim_ && n == in_.rows);
  const std::size_t h = static_cast<std::size_t>(hidden_);

  dy_ = dout;
  if (kind_ == OutputKind::sigmoid) {
    for (int i = 0; i < n; ++i) {
      double* dyi = dy_.row(i);
      const double* oi = out_.row(i);
      for (int j = 0; j < out_dim_; ++j) dyi[j] *= oi[j] * (1.0 - oi[j]);
    }
  }

  auto wrap = [&](std::size_t off, int rows, int cols) {
    Matrix m(rows, cols);
    std::copy(p(off), p(off) + static_cast<std::size_t>(rows) * cols, m.data.begin());
    return m;
  };

  // Output layer.
  Matrix gwo;
  linalg::matmul_tn(dy_, a2_, gwo);
  std::copy(gwo.data.begin(), gwo.data.end(), grads_.begin() + static_cast<std::ptrdiff_t>(off_.wo));
  std::vector<double> gbo;
  linalg::col_sum(dy_, gbo);
  std::copy(gbo.begin(), gbo.end(), grads_.begin() + static_cast<std::ptrdiff_t>(off_.bo));
  const Matrix wo = wrap(off_.wo, out_dim_, hidden_);
  linalg::matmul_nn(dy_, wo, da2_);

  // Hidden layer 2.
  bn_relu_backward(a2_, zhat2_, p(off_.g2), istd2_, last_train_, da2_, dz2_,
                   grads_.data() + off_.g2, grads_.data() + off_.be2);
  Matrix gw2;
  linalg::matmul_tn(dz2_, a1_, gw2);
  std::copy(gw2.data.begin(), gw2.data.end(), grads_.begin() + static_cast<std::ptrdiff_t>(off_.w2));
  std::vector<double> gb2;
  linalg::col_sum(dz2_, gb2);
  std::copy(gb2.begin(), gb2.end(), grads_.begin() + static_cast<std::ptrdiff_t>(off_.b2));
  const Matrix w2 = wrap(off_.w2, hidden_, hidden_);
  linalg::matmul_nn(dz2_, w2, da1_);

  // Hidden layer 1.
  bn_relu_backward(a1_, zhat1_, p(off_.g1), istd1_, last_train_, da1_, dz1_,
                   grads_.data() + off_.g1, grads_.data() + off_.be1);
  Matrix gw1;
  linalg::matmul_tn(dz1_, in_, gw1);
  std::copy(gw1.data.begin(), gw1.data.end(), grads_.begin() + static_cast<std::ptrdiff_t>(off_.w1));
  std::vector<double> gb1;
  linalg::col_sum(dz1_, gb1);
  std::copy(gb1.begin(), gb1.end(), grads_.begin() + static_cast<std::ptrdiff_t>(off_.b1));
  const Matrix w1 = wrap(off_.w1, hidden_, in_dim_);
  linalg::matmul_nn(dz1_, w1, din_);
  return din_;
}

void Mlp::commit_bn_stats(double momentum) {
  if (!last_train_) throw std::logic_error("commit_bn_stats: last forward was not in train mode");
  const std::size_t h = static_cast<std::size_t>(hidden_);
  for (std::size_t j = 0; j < h; ++j) {
    stats_[j] = (1.0 - momentum) * stats_[j] + momentum * batch_m1_[j];
    stats_[h + j] = (1.0 - momentum) * stats_[h + j] + momentum * batch_v1_[j];
    stats_[2 * h + j] = (1.0 - momentum) * stats_[2 * h + j] + momentum * batch_m2_[j];
    stats_[3 * h + j] = (1.0 - momentum) * stats_[3 * h + j] + momentum * batch_v2_[j];
  }
}

void Mlp::blend_from(const Mlp& online, double rho) {
  assert(params_.size() == online.params_.size());
  for (std::size_t i = 0; i < params_.size(); ++i)
    params_[i] = rho * params_[i] + (1.0 - rho) * online.params_[i];
  for (std::size_t i = 0; i < stats_.size(); ++i)
    stats_[i] = rho * stats_[i] + (1.0 - rho) * online.stats_[i];
}

nlohmann::json Mlp::to_json() const {
  return nlohmann::json{{"in_dim", in_dim_},
                        {"hidden", hidden_},
                        {"out_dim", out_dim_},
                        {"output", kind_ == OutputKind::sigmoid ? "sigmoid" : "linear"},
                        {"params", params_},
                        {"bn_stats", stats_}};
}

Mlp Mlp::from_json(const nlohmann::json& j) {
  Mlp net;
  net.in_dim_ = j.at("in_dim").get<int>();
  net.hidden_ = j.at("hidden").get<int>();
  net.out_dim_ = j.at("out_dim").get<int>();
  net.kind_ = j.at("output").get<std::string>() == "sigmoid" ? OutputKind::sigmoid
                                                             : OutputKind::linear;
  net.compute_offsets();
  net.params_ = j.at("params").get<std::vector<double>>();
  net.stats_ = j.at("bn_stats").get<std::vector<double>>();
  if (net.params_.size() != net.off_.total ||
      net.stats_.size() != static_cast<std::size_t>(4 * net.hidden_))
    throw std::runtime_error("Mlp::from_json: size mismatch");
  net.grads_.assign(net.off_.total, 0.0);
  return net;
}

}  // namespace sttl
