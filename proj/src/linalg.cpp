#include "sttl/linalg.hpp"

#include <atomic>
#include <cassert>
#include <cstring>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sttl::linalg {

namespace {

std::atomic<bool> g_parallel{true};
std::atomic<std::size_t> g_threshold{32768};

bool use_parallel(std::size_t flops) {
#ifdef _OPENMP
  return g_parallel.load(std::memory_order_relaxed) &&
         flops >= g_threshold.load(std::memory_order_relaxed);
#else
  (void)flops;
  return false;
#endif
}

}  // namespace

void set_parallel_enabled(bool on) { g_parallel.store(on, std::memory_order_relaxed); }
bool parallel_enabled() { return g_parallel.load(std::memory_order_relaxed); }
void set_parallel_threshold(std::size_t flops) {
  g_threshold.store(flops, std::memory_order_relaxed);
}
std::size_t parallel_threshold() { return g_threshold.load(std::memory_order_relaxed); }

// ---------------------------------------------------------------------------
// C(m,n) = A(m,k) * B(n,k)^T. Row i of C depends only on row i of A, so rows
// partition cleanly across threads; the dot product runs in index order in
// both variants.

namespace {

inline void nt_row(const Matrix& a, const Matrix& b, Matrix& c, int i) {
  const int n = b.rows;
  const int k = a.cols;
  const double* ai = a.row(i);
  double* ci = c.row(i);
  for (int j = 0; j < n; ++j) {
    const double* bj = b.row(j);
    double acc = 0.0;
    for (int p = 0; p < k; ++p) acc += ai[p] * bj[p];
    ci[j] = acc;
  }
}

}  // namespace

void matmul_nt_serial(const Matrix& a, const Matrix& b, Matrix& c) {
  assert(a.cols == b.cols);
  c.resize(a.rows, b.rows);
  for (int i = 0; i < a.rows; ++i) nt_row(a, b, c, i);
}

void matmul_nt_omp(const Matrix& a, const Matrix& b, Matrix& c) {
  assert(a.cols == b.cols);
  c.resize(a.rows, b.rows);
  const int m = a.rows;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) nt_row(a, b, c, i);
}

void matmul_nt(const Matrix& a, const Matrix& b, Matrix& c) {
  const std::size_t flops = static_cast<std::size_t>(a.rows) * b.rows * a.cols;
  if (use_parallel(flops)) {
    matmul_nt_omp(a, b, c);
  } else {
    matmul_nt_serial(a, b, c);
  }
}

// ---------------------------------------------------------------------------
// C(m,n) = A(m,k) * B(k,n). Accumulation over p happens in index order per
// output row in both variants.

namespace {

inline void nn_row(const Matrix& a, const Matrix& b, Matrix& c, int i) {
  const int n = b.cols;
  const int k = a.cols;
  const double* ai = a.row(i);
  double* ci = c.row(i);
  std::memset(ci, 0, sizeof(double) * static_cast<std::size_t>(n));
  for (int p = 0; p < k; ++p) {
    const double av = ai[p];
    const double* bp = b.row(p);
    for (int j = 0; j < n; ++j) ci[j] += av * bp[j];
  }
}

}  // namespace

void matmul_nn_serial(const Matrix& a, const Matrix& b, Matrix& c) {
  assert(a.cols == b.rows);
  c.resize(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i) nn_row(a, b, c, i);
}

void matmul_nn_omp(const Matrix& a, const Matrix& b, Matrix& c) {
  assert(a.cols == b.rows);
  c.resize(a.rows, b.cols);
  const int m = a.rows;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) nn_row(a, b, c, i);
}

void matmul_nn(const Matrix& a, const Matrix& b, Matrix& c) {
  const std::size_t flops = static_cast<std::size_t>(a.rows) * a.cols * b.cols;
  if (use_parallel(flops)) {
    matmul_nn_omp(a, b, c);
  } else {
    matmul_nn_serial(a, b, c);
  }
}

// ---------------------------------------------------------------------------
// C(k,n) = A(m,k)^T * B(m,n). Threads own output rows p; the reduction over
// sample index i runs in increasing order in both variants.

namespace {

inline void tn_row(const Matrix& a, const Matrix& b, Matrix& c, int p) {
  const int m = a.rows;
  const int n = b.cols;
  double* cp = c.row(p);
  std::memset(cp, 0, sizeof(double) * static_cast<std::size_t>(n));
  for (int i = 0; i < m; ++i) {
    const double av = a.at(i, p);
    const double* bi = b.row(i);
    for (int j = 0; j < n; ++j) cp[j] += av * bi[j];
  }
}

}  // namespace

void matmul_tn_serial(const Matrix& a, const Matrix& b, Matrix& c) {
  assert(a.rows == b.rows);
  c.resize(a.cols, b.cols);
  for (int p = 0; p < a.cols; ++p) tn_row(a, b, c, p);
}

void matmul_tn_omp(const Matrix& a, const Matrix& b, Matrix& c) {
  assert(a.rows == b.rows);
  c.resize(a.cols, b.cols);
  const int k = a.cols;
#pragma omp parallel for schedule(static)
  for (int p = 0; p < k; ++p) tn_row(a, b, c, p);
}

void matmul_tn(const Matrix& a, const Matrix& b, Matrix& c) {
  const std::size_t flops = static_cast<std::size_t>(a.rows) * a.cols * b.cols;
  if (use_parallel(flops)) {
    matmul_tn_omp(a, b, c);
  } else {
    matmul_tn_serial(a, b, c);
  }
}

void add_row_vector(Matrix& m, std::span<const double> v) {
  assert(static_cast<std::size_t>(m.cols) == v.size());
  for (int i = 0; i < m.rows; ++i) {
    double* mi = m.row(i);
    for (int j = 0; j < m.cols; ++j) mi[j] += v[j];
  }
}

void col_sum(const Matrix& m, std::vector<double>& out) {
  out.assign(static_cast<std::size_t>(m.cols), 0.0);
  for (int i = 0; i < m.rows; ++i) {
    const double* mi = m.row(i);
    for (int j = 0; j < m.cols; ++j) out[j] += mi[j];
  }
}

}  // namespace sttl::linalg
