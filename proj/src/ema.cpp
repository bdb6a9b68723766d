#include "tico/ema.hpp"

#include <cmath>
#include <stdexcept>

namespace tico {

void update_momentum(MomentumState& state, const Parameters& theta) {
  if (!state.xi.same_layout(theta))
    throw std::invalid_argument("update_momentum: parameter layouts differ");
  if (state.alpha < 0.0 || state.alpha > 1.0)
    throw std::invalid_argument("update_momentum: alpha outside [0,1]");
  const double a = state.alpha;
  auto& xi = state.xi.flat();
  const auto& th = theta.flat();
  for (std::size_t k = 0; k < xi.size(); ++k)
    xi[k] = a * xi[k] + (1.0 - a) * th[k];
}

CovarianceState make_covariance_state(std::size_t dim, double beta) {
  if (beta < 0.0 || beta > 1.0)
    throw std::invalid_argument("covariance state: beta outside [0,1]");
  CovarianceState s;
  s.beta = beta;
  s.c = Matrix(dim, dim);
  return s;
}

void update_covariance(CovarianceState& state, const Matrix& z) {
  if (z.cols() != state.c.rows())
    throw std::invalid_argument("update_covariance: embedding dim " +
                                std::to_string(z.cols()) + " does not match state dim " +
                                std::to_string(state.c.rows()));
  for (std::size_t i = 0; i < z.rows(); ++i) {
    double norm_sq = 0.0;
    for (std::size_t j = 0; j < z.cols(); ++j) norm_sq += z(i, j) * z(i, j);
    if (std::fabs(std::sqrt(norm_sq) - 1.0) > 1e-9)
      throw std::invalid_argument("update_covariance: row " + std::to_string(i) +
                                  " is not unit-norm");
  }
  Matrix b = covariance(z);
  const double beta = state.beta;
  for (std::size_t k = 0; k < state.c.size(); ++k)
    state.c.data()[k] = beta * state.c.data()[k] + (1.0 - beta) * b.data()[k];
  // mirror to keep symmetry exact under accumulation
  for (std::size_t i = 0; i < state.c.rows(); ++i)
    for (std::size_t j = i + 1; j < state.c.cols(); ++j)
      state.c(j, i) = state.c(i, j);
  ++state.step;
}

void MemoryBank::push(const Matrix& z) {
  if (z.cols() != dim_)
    throw std::invalid_argument("memory bank: dim mismatch, expected " +
                                std::to_string(dim_) + " got " + std::to_string(z.cols()));
  for (std::size_t i = 0; i < z.rows(); ++i) {
    std::vector<double> row(z.cols());
    for (std::size_t j = 0; j < z.cols(); ++j) row[j] = z(i, j);
    entries_.push_back(std::move(row));
    if (entries_.size() > capacity_) entries_.pop_front();
  }
}

Matrix MemoryBank::as_matrix() const {
  Matrix m(entries_.size(), dim_);
  for (std::size_t i = 0; i < entries_.size(); ++i)
    for (std::size_t j = 0; j < dim_; ++j) m(i, j) = entries_[i][j];
  return m;
}

Matrix MemoryBank::bank_covariance() const {
  if (entries_.empty())
    throw std::invalid_argument("memory bank: covariance of empty bank");
  Matrix c(dim_, dim_);
  for (const auto& row : entries_)
    for (std::size_t p = 0; p < dim_; ++p)
      for (std::size_t q = 0; q < dim_; ++q) c(p, q) += row[p] * row[q];
  c *= 1.0 / static_cast<double>(entries_.size());
  return c;
}

}  // namespace tico
