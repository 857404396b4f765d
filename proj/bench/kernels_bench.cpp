// Compares the serial reference kernels against the OpenMP variants, and the
// full network forward/backward pass with the parallel dispatcher toggled.
// Every comparison requires bit-identical results: each output element is
// owned by one thread and inner loops run in a fixed order, so the parallel
// kernels must reproduce the serial reference exactly. Exits nonzero on any
// mismatch, so this doubles as a consistency check at sizes the unit tests
// do not reach.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "sttl/linalg.hpp"
#include "sttl/mlp.hpp"
#include "sttl/rng.hpp"

namespace {

using sttl::Matrix;
using sttl::Mlp;
using sttl::Rng;
using MatmulFn = void (*)(const Matrix&, const Matrix&, Matrix&);

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

void fill(Matrix& m, Rng& rng) {
  for (double& v : m.data) v = rng.uniform(-1.0, 1.0);
}

template <typename Fn>
double best_of(int reps, Fn&& fn) {
  fn();  // warm-up, also produces the result used for comparison
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const double t0 = now_seconds();
    fn();
    best = std::min(best, now_seconds() - t0);
  }
  return best;
}

bool same_bits(const Matrix& a, const Matrix& b) {
  return a.rows == b.rows && a.cols == b.cols &&
         std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(double)) == 0;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

// One matmul shape: (m,k,n) with the kernel-specific operand layout.
bool bench_matmul(const char* name, MatmulFn serial, MatmulFn omp_variant, int m, int k,
                  int n, int a_rows, int a_cols, int b_rows, int b_cols, int reps) {
  Rng rng(90210);
  Matrix a(a_rows, a_cols), b(b_rows, b_cols), c_serial, c_omp;
  fill(a, rng);
  fill(b, rng);

  const double ts = best_of(reps, [&] { serial(a, b, c_serial); });
  const double tp = best_of(reps, [&] { omp_variant(a, b, c_omp); });
  const bool match = same_bits(c_serial, c_omp);

  const double flops = 2.0 * m * k * n;
  std::printf("%-10s %4dx%-4dx%-4d  serial %8.3f ms (%6.2f GF/s)  omp %8.3f ms (%6.2f GF/s)  x%4.2f  %s\n",
              name, m, k, n, ts * 1e3, flops / ts * 1e-9, tp * 1e3, flops / tp * 1e-9,
              ts / tp, match ? "match" : "MISMATCH");
  return match;
}

// Network forward(train) + backward at a given batch, dispatched through the
// automatic kernels with parallelism forced off, then on.
bool bench_mlp(int batch, int in_dim, int hidden, int out_dim, int reps) {
  Rng init(4242);
  Mlp net(in_dim, hidden, out_dim, Mlp::OutputKind::linear, init);
  Matrix x(batch, in_dim), dout(batch, out_dim);
  Rng rng(777);
  fill(x, rng);
  fill(dout, rng);

  Matrix out_serial, out_omp;
  std::vector<double> grads_serial, grads_omp;
  auto pass = [&](Matrix& out, std::vector<double>& grads) {
    out = net.forward(x, /*train=*/true);
    net.backward(dout);
    grads = net.grads();
  };

  sttl::linalg::set_parallel_enabled(false);
  const double ts = best_of(reps, [&] { pass(out_serial, grads_serial); });
  sttl::linalg::set_parallel_enabled(true);
  const double tp = best_of(reps, [&] { pass(out_omp, grads_omp); });
  const bool match = same_bits(out_serial, out_omp) && same_bits(grads_serial, grads_omp);

  std::printf("fwd+bwd    b=%-4d %4dx%-4dx%-3d serial %8.3f ms             omp %8.3f ms             x%4.2f  %s\n",
              batch, in_dim, hidden, out_dim, ts * 1e3, tp * 1e3, ts / tp,
              match ? "match" : "MISMATCH");
  return match;
}

}  // namespace

int main(int argc, char** argv) {
  int reps = 3;
  for (int i = 1; i < argc; ++i) {
    if (std::string(argv[i]) == "--reps" && i + 1 < argc) reps = std::atoi(argv[++i]);
  }

#ifdef _OPENMP
  std::printf("openmp: %d thread(s), best of %d reps\n", omp_get_max_threads(), reps);
#else
  std::printf("openmp: compiled out, best of %d reps\n", reps);
#endif

  bool ok = true;
  struct Shape {
    int m, k, n;
  };
  // 64-wide shapes mirror a training minibatch; the larger ones show scaling.
  const Shape shapes[] = {{64, 64, 64}, {128, 128, 128}, {256, 256, 256}, {512, 512, 512}};
  for (const Shape& s : shapes) {
    using namespace sttl::linalg;
    // C(m,n) = A(m,k) B(n,k)^T
    ok &= bench_matmul("nt", matmul_nt_serial, matmul_nt_omp, s.m, s.k, s.n, s.m, s.k, s.n,
                       s.k, reps);
    // C(m,n) = A(m,k) B(k,n)
    ok &= bench_matmul("nn", matmul_nn_serial, matmul_nn_omp, s.m, s.k, s.n, s.m, s.k, s.k,
                       s.n, reps);
    // C(k,n) = A(m,k)^T B(m,n)
    ok &= bench_matmul("tn", matmul_tn_serial, matmul_tn_omp, s.m, s.k, s.n, s.m, s.k, s.m,
                       s.n, reps);
  }

  ok &= bench_mlp(64, 60, 64, 3, reps);
  ok &= bench_mlp(512, 256, 256, 64, reps);
  sttl::linalg::set_parallel_enabled(true);

  if (!ok) {
    std::fprintf(stderr, "kernel outputs diverged between serial and parallel variants\n");
    return 1;
  }
  return 0;
}
