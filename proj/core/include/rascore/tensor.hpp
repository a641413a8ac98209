#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace rascore {

/// Dense N-dimensional array of doubles, row-major.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s, double fill = 0.0) : shape(std::move(s)) {
    data.assign(numel(shape), fill);
  }

  static std::size_t numel(const std::vector<int>& shape) {
    std::size_t n = 1;
    for (int d : shape) {
      if (d <= 0) throw std::invalid_argument("Tensor: non-positive extent");
      n *= static_cast<std::size_t>(d);
    }
    return n;
  }

  std::size_t size() const { return data.size(); }
  bool same_shape(const Tensor& other) const { return shape == other.shape; }
};

/// C += A(m x k) * B(k x n), all row-major.
void gemm_nn(int m, int k, int n, const double* a, const double* b, double* c);
/// C += A(m x k) * B(n x k)^T.
void gemm_nt(int m, int k, int n, const double* a, const double* b, double* c);
/// C += A(k x m)^T * B(k x n).
void gemm_tn(int m, int k, int n, const double* a, const double* b, double* c);

}  // namespace rascore
