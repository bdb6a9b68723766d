#include "tico/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace tico {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  std::size_t r = rows.size();
  std::size_t c = r == 0 ? 0 : rows.begin()->size();
  Matrix m(r, c);
  std::size_t i = 0;
  for (const auto& row : rows) {
    if (row.size() != c) throw std::invalid_argument("ragged initializer rows");
    std::size_t j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

std::string Matrix::shape_str() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Matrix& Matrix::operator+=(const Matrix& other) {
  if (!same_shape(other))
    throw std::invalid_argument("add: shape mismatch " + shape_str() + " vs " +
                                other.shape_str());
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  if (!same_shape(other))
    throw std::invalid_argument("sub: shape mismatch " + shape_str() + " vs " +
                                other.shape_str());
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows())
    throw std::invalid_argument("matmul: inner dimensions disagree, " +
                                a.shape_str() + " times " + b.shape_str());
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b))
    throw std::invalid_argument("hadamard: shape mismatch " + a.shape_str() +
                                " vs " + b.shape_str());
  Matrix out = a;
  for (std::size_t k = 0; k < out.size(); ++k) out.data()[k] *= b.data()[k];
  return out;
}

Matrix covariance(const Matrix& z) {
  if (z.empty()) throw std::invalid_argument("covariance: empty matrix");
  const std::size_t n = z.rows(), d = z.cols();
  Matrix c(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += z(k, i) * z(k, j);
      s /= static_cast<double>(n);
      c(i, j) = s;
      c(j, i) = s;  // mirror, exact symmetry
    }
  }
  return c;
}

Matrix gram(const Matrix& z) {
  if (z.empty()) throw std::invalid_argument("gram: empty matrix");
  const std::size_t n = z.rows(), d = z.cols();
  Matrix k(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < d; ++c) s += z(i, c) * z(j, c);
      k(i, j) = s;
      k(j, i) = s;
    }
  }
  return k;
}

double frobenius_norm_sq(const Matrix& a) {
  double s = 0.0;
  for (double v : a.data()) s += v * v;
  return s;
}

double trace(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < std::min(a.rows(), a.cols()); ++i) s += a(i, i);
  return s;
}

double max_abs(const Matrix& a) {
  double m = 0.0;
  for (double v : a.data()) m = std::max(m, std::fabs(v));
  return m;
}

bool all_finite(const Matrix& a) {
  return std::all_of(a.data().begin(), a.data().end(),
                     [](double v) { return std::isfinite(v); });
}

Matrix normalize_rows(const Matrix& z, double eps) {
  Matrix out = z;
  for (std::size_t i = 0; i < z.rows(); ++i) {
    double norm_sq = 0.0;
    for (std::size_t j = 0; j < z.cols(); ++j) norm_sq += z(i, j) * z(i, j);
    double inv = 1.0 / std::max(std::sqrt(norm_sq), eps);
    for (std::size_t j = 0; j < z.cols(); ++j) out(i, j) = z(i, j) * inv;
  }
  return out;
}

Matrix standardize_columns(const Matrix& z, double eps) {
  if (z.rows() < 2)
    throw std::invalid_argument("standardize_columns: need at least 2 rows");
  const std::size_t n = z.rows(), d = z.cols();
  Matrix out(n, d);
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += z(i, j);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double c = z(i, j) - mean;
      var += c * c;
    }
    var /= static_cast<double>(n);
    double inv = 1.0 / std::max(std::sqrt(var), eps);
    for (std::size_t i = 0; i < n; ++i) out(i, j) = (z(i, j) - mean) * inv;
  }
  return out;
}

namespace {

double off_diag_norm_sq(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return s;
}

}  // namespace

EigenDecomposition sym_eig(const Matrix& input, double tol) {
  if (input.rows() != input.cols())
    throw std::invalid_argument("sym_eig: matrix not square, " + input.shape_str());
  const std::size_t n = input.rows();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::fabs(input(i, j) - input(j, i)) > 1e-12)
        throw std::invalid_argument("sym_eig: matrix not symmetric at (" +
                                    std::to_string(i) + "," + std::to_string(j) + ")");

  Matrix a = input;
  Matrix v = Matrix::identity(n);
  const double norm = std::sqrt(frobenius_norm_sq(input));
  const double threshold_sq = tol * tol * norm * norm;
  const int max_sweeps = 100;

  bool converged = norm == 0.0;
  for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double apq = a(p, q);
        if (apq == 0.0) continue;
        double app = a(p, p), aqq = a(q, q);
        double theta = (aqq - app) / (2.0 * apq);
        double t = std::copysign(1.0, theta) /
                   (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
    converged = off_diag_norm_sq(a) <= threshold_sq;
  }
  if (!converged) {
    double residual = std::sqrt(off_diag_norm_sq(a));
    throw std::runtime_error("sym_eig: no convergence after 100 sweeps, off-diagonal residual " +
                             std::to_string(residual));
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

  EigenDecomposition dec;
  dec.eigenvalues.resize(n);
  dec.eigenvectors = Matrix(n, n);
  for (std::size_t col = 0; col < n; ++col) {
    dec.eigenvalues[col] = a(order[col], order[col]);
    for (std::size_t row = 0; row < n; ++row)
      dec.eigenvectors(row, col) = v(row, order[col]);
  }
  return dec;
}

}  // namespace tico
