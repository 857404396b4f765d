#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sttl {

// Dense row-major matrix of doubles.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

  void resize(int r, int c) {
    rows = r;
    cols = c;
    data.assign(static_cast<std::size_t>(r) * c, 0.0);
  }

  double* row(int i) { return data.data() + static_cast<std::size_t>(i) * cols; }
  const double* row(int i) const { return data.data() + static_cast<std::size_t>(i) * cols; }

  double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
};

namespace linalg {

// Runtime switch for the OpenMP kernel variants. Each output element is
// owned by exactly one thread and its inner loop runs in a fixed order, so
// parallel and serial kernels produce bit-identical results.
void set_parallel_enabled(bool on);
bool parallel_enabled();
// Work threshold (in multiply-adds) below which the dispatchers stay serial.
void set_parallel_threshold(std::size_t flops);
std::size_t parallel_threshold();

// C(m,n) = A(m,k) * B(n,k)^T
void matmul_nt_serial(const Matrix& a, const Matrix& b, Matrix& c);
void matmul_nt_omp(const Matrix& a, const Matrix& b, Matrix& c);
void matmul_nt(const Matrix& a, const Matrix& b, Matrix& c);

// C(m,n) = A(m,k) * B(k,n)
void matmul_nn_serial(const Matrix& a, const Matrix& b, Matrix& c);
void matmul_nn_omp(const Matrix& a, const Matrix& b, Matrix& c);
void matmul_nn(const Matrix& a, const Matrix& b, Matrix& c);

// C(k,n) = A(m,k)^T * B(m,n)
void matmul_tn_serial(const Matrix& a, const Matrix& b, Matrix& c);
void matmul_tn_omp(const Matrix& a, const Matrix& b, Matrix& c);
void matmul_tn(const Matrix& a, const Matrix& b, Matrix& c);

// M[i,:] += v
void add_row_vector(Matrix& m, std::span<const double> v);

// out[j] = sum_i M[i,j]
void col_sum(const Matrix& m, std::vector<double>& out);

}  // namespace linalg
}  // namespace sttl
