#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace tico {

// Dense row-major double matrix. Embedding batches are stored n x d
// (rows are embeddings).
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  std::string shape_str() const;

  Matrix transposed() const;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s);

  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(Matrix a, double s) { return a *= s; }
  friend Matrix operator*(double s, Matrix a) { return a *= s; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct EigenDecomposition {
  std::vector<double> eigenvalues;  // sorted descending
  Matrix eigenvectors;              // columns are unit eigenvectors
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix hadamard(const Matrix& a, const Matrix& b);

// (1/n) Z^T Z for Z stored n x d; symmetric by construction.
Matrix covariance(const Matrix& z);

// Z Z^T, n x n, no normalization factor.
Matrix gram(const Matrix& z);

double frobenius_norm_sq(const Matrix& a);
double trace(const Matrix& a);
double max_abs(const Matrix& a);
bool all_finite(const Matrix& a);

Matrix normalize_rows(const Matrix& z, double eps = 1e-12);
Matrix standardize_columns(const Matrix& z, double eps = 1e-12);

// Cyclic Jacobi for symmetric matrices. Converges when the off-diagonal
// Frobenius mass drops below tol * ||A||_F; capped at 100 sweeps.
EigenDecomposition sym_eig(const Matrix& a, double tol = 1e-12);

}  // namespace tico
