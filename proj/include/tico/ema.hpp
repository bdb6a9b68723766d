#pragma once

#include <cstddef>
#include <deque>
#include <vector>

#include "tico/matrix.hpp"
#include "tico/model.hpp"

namespace tico {

struct MomentumState {
  double alpha = 0.99;
  Parameters xi;
};

// xi <- alpha * xi + (1 - alpha) * theta
void update_momentum(MomentumState& state, const Parameters& theta);

struct CovarianceState {
  double beta = 0.9;
  Matrix c;  // d x d, zero at step 0
  std::size_t step = 0;
};

CovarianceState make_covariance_state(std::size_t dim, double beta);

// C <- beta * C + (1 - beta) * (1/n) Z^T Z; rows of z must be unit-norm.
void update_covariance(CovarianceState& state, const Matrix& z);

// Explicit FIFO store of unit-norm embeddings. Exists only to verify the
// covariance rewrite of the memory-bank loss; never used in training.
class MemoryBank {
 public:
  explicit MemoryBank(std::size_t capacity, std::size_t dim)
      : capacity_(capacity), dim_(dim) {}

  void push(const Matrix& z);
  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  Matrix as_matrix() const;

  // (1/|entries|) sum of outer products z_j z_j^T
  Matrix bank_covariance() const;

 private:
  std::size_t capacity_;
  std::size_t dim_;
  std::deque<std::vector<double>> entries_;
};

}  // namespace tico
