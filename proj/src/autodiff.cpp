#include "tico/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tico {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

Var Tape::push(Node node) {
  Var v;
  v.index = static_cast<int>(nodes_.size());
  v.rows = node.value.rows();
  v.cols = node.value.cols();
  nodes_.push_back(std::move(node));
  return v;
}

Var Tape::constant(Matrix value) {
  Node n;
  n.kind = OpKind::kConstant;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::parameter(Matrix value) {
  Node n;
  n.kind = OpKind::kParameter;
  n.value = std::move(value);
  n.requires_grad = true;
  Var v = push(std::move(n));
  parameters_.push_back(v.index);
  return v;
}

Var Tape::matmul(Var a, Var b) {
  Node n;
  n.kind = OpKind::kMatMul;
  n.args[0] = a.index;
  n.args[1] = b.index;
  n.value = tico::matmul(value(a), value(b));
  n.requires_grad = needs_grad(a) || needs_grad(b);
  return push(std::move(n));
}

Var Tape::transpose(Var x) {
  Node n;
  n.kind = OpKind::kTranspose;
  n.args[0] = x.index;
  n.value = value(x).transposed();
  n.requires_grad = needs_grad(x);
  return push(std::move(n));
}

Var Tape::add(Var a, Var b) {
  Node n;
  n.kind = OpKind::kAdd;
  n.args[0] = a.index;
  n.args[1] = b.index;
  n.value = value(a) + value(b);
  n.requires_grad = needs_grad(a) || needs_grad(b);
  return push(std::move(n));
}

Var Tape::sub(Var a, Var b) {
  Node n;
  n.kind = OpKind::kSub;
  n.args[0] = a.index;
  n.args[1] = b.index;
  n.value = value(a) - value(b);
  n.requires_grad = needs_grad(a) || needs_grad(b);
  return push(std::move(n));
}

Var Tape::mul(Var a, Var b) {
  Node n;
  n.kind = OpKind::kMul;
  n.args[0] = a.index;
  n.args[1] = b.index;
  n.value = hadamard(value(a), value(b));
  n.requires_grad = needs_grad(a) || needs_grad(b);
  return push(std::move(n));
}

Var Tape::scalar_mul(Var x, double s) {
  Node n;
  n.kind = OpKind::kScalarMul;
  n.args[0] = x.index;
  n.scalar = s;
  n.value = value(x) * s;
  n.requires_grad = needs_grad(x);
  return push(std::move(n));
}

Var Tape::relu(Var x) {
  Node n;
  n.kind = OpKind::kRelu;
  n.args[0] = x.index;
  n.value = value(x);
  for (double& v : n.value.data()) v = std::max(v, 0.0);
  n.requires_grad = needs_grad(x);
  return push(std::move(n));
}

Var Tape::row_normalize(Var x, double eps) {
  Node n;
  n.kind = OpKind::kRowNormalize;
  n.args[0] = x.index;
  n.scalar = eps;
  n.value = normalize_rows(value(x), eps);
  n.requires_grad = needs_grad(x);
  return push(std::move(n));
}

Var Tape::batchnorm(Var x, Var gamma, Var shift, double eps) {
  const Matrix& xv = value(x);
  require(xv.rows() >= 2, "batchnorm: batch statistics undefined for fewer than 2 rows");
  require(value(gamma).rows() == 1 && value(gamma).cols() == xv.cols(),
          "batchnorm: gamma must be 1x" + std::to_string(xv.cols()));
  require(value(shift).rows() == 1 && value(shift).cols() == xv.cols(),
          "batchnorm: shift must be 1x" + std::to_string(xv.cols()));
  Node n;
  n.kind = OpKind::kBatchNorm;
  n.args[0] = x.index;
  n.args[1] = gamma.index;
  n.args[2] = shift.index;
  n.scalar = eps;

  const std::size_t rows = xv.rows(), cols = xv.cols();
  Matrix out(rows, cols);
  for (std::size_t j = 0; j < cols; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < rows; ++i) mean += xv(i, j);
    mean /= static_cast<double>(rows);
    double var = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
      double c = xv(i, j) - mean;
      var += c * c;
    }
    var /= static_cast<double>(rows);
    double inv_std = 1.0 / std::sqrt(var + eps);
    double g = value(gamma)(0, j), b = value(shift)(0, j);
    for (std::size_t i = 0; i < rows; ++i)
      out(i, j) = g * (xv(i, j) - mean) * inv_std + b;
  }
  n.value = std::move(out);
  n.requires_grad = needs_grad(x) || needs_grad(gamma) || needs_grad(shift);
  return push(std::move(n));
}

Var Tape::standardize_cols(Var x, double eps) {
  Node n;
  n.kind = OpKind::kStandardizeCols;
  n.args[0] = x.index;
  n.scalar = eps;
  n.value = standardize_columns(value(x), eps);
  n.requires_grad = needs_grad(x);
  return push(std::move(n));
}

Var Tape::sum(Var x) {
  Node n;
  n.kind = OpKind::kSum;
  n.args[0] = x.index;
  double s = 0.0;
  for (double v : value(x).data()) s += v;
  n.value = Matrix(1, 1, s);
  n.requires_grad = needs_grad(x);
  return push(std::move(n));
}

Var Tape::mean(Var x) {
  Node n;
  n.kind = OpKind::kMean;
  n.args[0] = x.index;
  double s = 0.0;
  for (double v : value(x).data()) s += v;
  n.value = Matrix(1, 1, s / static_cast<double>(value(x).size()));
  n.requires_grad = needs_grad(x);
  return push(std::move(n));
}

Var Tape::rowwise_dot(Var a, Var b) {
  const Matrix& av = value(a);
  const Matrix& bv = value(b);
  require(av.same_shape(bv), "rowwise_dot: shape mismatch " + av.shape_str() +
                                 " vs " + bv.shape_str());
  Node n;
  n.kind = OpKind::kRowwiseDot;
  n.args[0] = a.index;
  n.args[1] = b.index;
  Matrix out(av.rows(), 1);
  for (std::size_t i = 0; i < av.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < av.cols(); ++j) s += av(i, j) * bv(i, j);
    out(i, 0) = s;
  }
  n.value = std::move(out);
  n.requires_grad = needs_grad(a) || needs_grad(b);
  return push(std::move(n));
}

Var Tape::quadratic_form(Var z, const Matrix& c) {
  const Matrix& zv = value(z);
  require(c.rows() == c.cols() && c.rows() == zv.cols(),
          "quadratic_form: C must be " + std::to_string(zv.cols()) + "x" +
              std::to_string(zv.cols()) + ", got " + c.shape_str());
  Node n;
  n.kind = OpKind::kQuadraticForm;
  n.args[0] = z.index;
  n.aux = c;
  Matrix out(zv.rows(), 1);
  for (std::size_t i = 0; i < zv.rows(); ++i) {
    double s = 0.0;
    for (std::size_t p = 0; p < zv.cols(); ++p)
      for (std::size_t q = 0; q < zv.cols(); ++q)
        s += zv(i, p) * c(p, q) * zv(i, q);
    out(i, 0) = s;
  }
  n.value = std::move(out);
  n.requires_grad = needs_grad(z);
  return push(std::move(n));
}

Var Tape::logsumexp_rows(Var x) {
  const Matrix& xv = value(x);
  Node n;
  n.kind = OpKind::kLogSumExpRows;
  n.args[0] = x.index;
  Matrix out(xv.rows(), 1);
  for (std::size_t i = 0; i < xv.rows(); ++i) {
    double m = xv(i, 0);
    for (std::size_t j = 1; j < xv.cols(); ++j) m = std::max(m, xv(i, j));
    double s = 0.0;
    for (std::size_t j = 0; j < xv.cols(); ++j) s += std::exp(xv(i, j) - m);
    out(i, 0) = m + std::log(s);
  }
  n.value = std::move(out);
  n.requires_grad = needs_grad(x);
  return push(std::move(n));
}

Var Tape::diag(Var x) {
  const Matrix& xv = value(x);
  require(xv.rows() == xv.cols(), "diag: matrix not square, " + xv.shape_str());
  Node n;
  n.kind = OpKind::kDiag;
  n.args[0] = x.index;
  Matrix out(xv.rows(), 1);
  for (std::size_t i = 0; i < xv.rows(); ++i) out(i, 0) = xv(i, i);
  n.value = std::move(out);
  n.requires_grad = needs_grad(x);
  return push(std::move(n));
}

std::map<int, Matrix> Tape::backward(Var loss) const {
  if (loss.rows != 1 || loss.cols != 1)
    throw std::invalid_argument("backward: loss must be scalar (1x1), got " +
                                value(loss).shape_str());

  std::vector<Matrix> grads(nodes_.size());
  auto grad_of = [&](int idx) -> Matrix& {
    if (grads[idx].empty())
      grads[idx] = Matrix(nodes_[idx].value.rows(), nodes_[idx].value.cols());
    return grads[idx];
  };

  grad_of(loss.index)(0, 0) = 1.0;

  for (int idx = loss.index; idx >= 0; --idx) {
    const Node& node = nodes_[idx];
    if (!node.requires_grad || grads[idx].empty()) continue;
    const Matrix& g = grads[idx];
    auto wants = [&](int slot) {
      return node.args[slot] >= 0 && nodes_[node.args[slot]].requires_grad;
    };

    switch (node.kind) {
      case OpKind::kConstant:
      case OpKind::kParameter:
        break;
      case OpKind::kMatMul: {
        const Matrix& a = nodes_[node.args[0]].value;
        const Matrix& b = nodes_[node.args[1]].value;
        if (wants(0)) grad_of(node.args[0]) += tico::matmul(g, b.transposed());
        if (wants(1)) grad_of(node.args[1]) += tico::matmul(a.transposed(), g);
        break;
      }
      case OpKind::kTranspose:
        if (wants(0)) grad_of(node.args[0]) += g.transposed();
        break;
      case OpKind::kAdd:
        if (wants(0)) grad_of(node.args[0]) += g;
        if (wants(1)) grad_of(node.args[1]) += g;
        break;
      case OpKind::kSub:
        if (wants(0)) grad_of(node.args[0]) += g;
        if (wants(1)) grad_of(node.args[1]) -= g;
        break;
      case OpKind::kMul:
        if (wants(0)) grad_of(node.args[0]) += hadamard(g, nodes_[node.args[1]].value);
        if (wants(1)) grad_of(node.args[1]) += hadamard(g, nodes_[node.args[0]].value);
        break;
      case OpKind::kScalarMul:
        if (wants(0)) grad_of(node.args[0]) += g * node.scalar;
        break;
      case OpKind::kRelu: {
        if (!wants(0)) break;
        const Matrix& x = nodes_[node.args[0]].value;
        Matrix& gx = grad_of(node.args[0]);
        for (std::size_t k = 0; k < x.size(); ++k)
          if (x.data()[k] > 0.0) gx.data()[k] += g.data()[k];
        break;
      }
      case OpKind::kRowNormalize: {
        if (!wants(0)) break;
        const Matrix& x = nodes_[node.args[0]].value;
        const Matrix& y = node.value;
        Matrix& gx = grad_of(node.args[0]);
        for (std::size_t i = 0; i < x.rows(); ++i) {
          double norm_sq = 0.0;
          for (std::size_t j = 0; j < x.cols(); ++j) norm_sq += x(i, j) * x(i, j);
          double norm = std::sqrt(norm_sq);
          if (norm > node.scalar) {
            double dot = 0.0;
            for (std::size_t j = 0; j < x.cols(); ++j) dot += y(i, j) * g(i, j);
            for (std::size_t j = 0; j < x.cols(); ++j)
              gx(i, j) += (g(i, j) - y(i, j) * dot) / norm;
          } else {
            for (std::size_t j = 0; j < x.cols(); ++j)
              gx(i, j) += g(i, j) / node.scalar;
          }
        }
        break;
      }
      case OpKind::kBatchNorm: {
        const Matrix& x = nodes_[node.args[0]].value;
        const Matrix& gamma = nodes_[node.args[1]].value;
        const std::size_t rows = x.rows(), cols = x.cols();
        const double nn = static_cast<double>(rows);
        for (std::size_t j = 0; j < cols; ++j) {
          double mean = 0.0;
          for (std::size_t i = 0; i < rows; ++i) mean += x(i, j);
          mean /= nn;
          double var = 0.0;
          for (std::size_t i = 0; i < rows; ++i) {
            double c = x(i, j) - mean;
            var += c * c;
          }
          var /= nn;
          double inv_std = 1.0 / std::sqrt(var + node.scalar);

          double sum_g = 0.0, sum_g_xhat = 0.0;
          for (std::size_t i = 0; i < rows; ++i) {
            double xhat = (x(i, j) - mean) * inv_std;
            sum_g += g(i, j);
            sum_g_xhat += g(i, j) * xhat;
          }
          if (wants(1)) grad_of(node.args[1])(0, j) += sum_g_xhat;
          if (wants(2)) grad_of(node.args[2])(0, j) += sum_g;
          if (wants(0)) {
            Matrix& gx = grad_of(node.args[0]);
            double gj = gamma(0, j);
            for (std::size_t i = 0; i < rows; ++i) {
              double xhat = (x(i, j) - mean) * inv_std;
              gx(i, j) += gj * inv_std *
                          (g(i, j) - sum_g / nn - xhat * sum_g_xhat / nn);
            }
          }
        }
        break;
      }
      case OpKind::kStandardizeCols: {
        if (!wants(0)) break;
        const Matrix& x = nodes_[node.args[0]].value;
        const std::size_t rows = x.rows(), cols = x.cols();
        const double nn = static_cast<double>(rows);
        Matrix& gx = grad_of(node.args[0]);
        for (std::size_t j = 0; j < cols; ++j) {
          double mean = 0.0;
          for (std::size_t i = 0; i < rows; ++i) mean += x(i, j);
          mean /= nn;
          double var = 0.0;
          for (std::size_t i = 0; i < rows; ++i) {
            double c = x(i, j) - mean;
            var += c * c;
          }
          var /= nn;
          double std_dev = std::sqrt(var);
          if (std_dev <= node.scalar) continue;  // clamped column, flat output
          double inv_std = 1.0 / std_dev;
          double sum_g = 0.0, sum_g_xhat = 0.0;
          for (std::size_t i = 0; i < rows; ++i) {
            double xhat = (x(i, j) - mean) * inv_std;
            sum_g += g(i, j);
            sum_g_xhat += g(i, j) * xhat;
          }
          for (std::size_t i = 0; i < rows; ++i) {
            double xhat = (x(i, j) - mean) * inv_std;
            gx(i, j) += inv_std * (g(i, j) - sum_g / nn - xhat * sum_g_xhat / nn);
          }
        }
        break;
      }
      case OpKind::kSum: {
        if (!wants(0)) break;
        Matrix& gx = grad_of(node.args[0]);
        for (double& v : gx.data()) v += g(0, 0);
        break;
      }
      case OpKind::kMean: {
        if (!wants(0)) break;
        Matrix& gx = grad_of(node.args[0]);
        double scale = g(0, 0) / static_cast<double>(gx.size());
        for (double& v : gx.data()) v += scale;
        break;
      }
      case OpKind::kRowwiseDot: {
        const Matrix& a = nodes_[node.args[0]].value;
        const Matrix& b = nodes_[node.args[1]].value;
        for (int slot = 0; slot < 2; ++slot) {
          if (!wants(slot)) continue;
          const Matrix& other = slot == 0 ? b : a;
          Matrix& gx = grad_of(node.args[slot]);
          for (std::size_t i = 0; i < a.rows(); ++i)
            for (std::size_t j = 0; j < a.cols(); ++j)
              gx(i, j) += g(i, 0) * other(i, j);
        }
        break;
      }
      case OpKind::kQuadraticForm: {
        if (!wants(0)) break;
        const Matrix& z = nodes_[node.args[0]].value;
        const Matrix& c = node.aux;
        Matrix& gz = grad_of(node.args[0]);
        for (std::size_t i = 0; i < z.rows(); ++i)
          for (std::size_t p = 0; p < z.cols(); ++p) {
            double s = 0.0;
            for (std::size_t q = 0; q < z.cols(); ++q)
              s += (c(p, q) + c(q, p)) * z(i, q);
            gz(i, p) += g(i, 0) * s;
          }
        break;
      }
      case OpKind::kLogSumExpRows: {
        if (!wants(0)) break;
        const Matrix& x = nodes_[node.args[0]].value;
        Matrix& gx = grad_of(node.args[0]);
        for (std::size_t i = 0; i < x.rows(); ++i) {
          double lse = node.value(i, 0);
          for (std::size_t j = 0; j < x.cols(); ++j)
            gx(i, j) += g(i, 0) * std::exp(x(i, j) - lse);
        }
        break;
      }
      case OpKind::kDiag: {
        if (!wants(0)) break;
        Matrix& gx = grad_of(node.args[0]);
        for (std::size_t i = 0; i < node.value.rows(); ++i) gx(i, i) += g(i, 0);
        break;
      }
    }
  }

  std::map<int, Matrix> out;
  for (int p : parameters_) {
    if (p > loss.index || grads[p].empty())
      out[p] = Matrix(nodes_[p].value.rows(), nodes_[p].value.cols());
    else
      out[p] = std::move(grads[p]);
  }
  return out;
}

}  // namespace tico
