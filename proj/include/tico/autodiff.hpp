#pragma once

#include <cstddef>
#include <map>
#include <vector>

#include "tico/matrix.hpp"

namespace tico {

class Tape;

struct Var {
  int index = -1;
  std::size_t rows = 0;
  std::size_t cols = 0;
};

enum class OpKind {
  kConstant,
  kParameter,
  kMatMul,
  kTranspose,
  kAdd,
  kSub,
  kMul,
  kScalarMul,
  kRelu,
  kRowNormalize,
  kBatchNorm,
  kStandardizeCols,
  kSum,
  kMean,
  kRowwiseDot,
  kQuadraticForm,
  kLogSumExpRows,
  kDiag,
};

// Reverse-mode tape over matrix ops. Nodes are appended in topological
// order; one backward pass visits each node once, in reverse.
class Tape {
 public:
  Var constant(Matrix value);
  Var parameter(Matrix value);

  Var matmul(Var a, Var b);
  Var transpose(Var x);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scalar_mul(Var x, double s);
  Var relu(Var x);
  Var row_normalize(Var x, double eps = 1e-12);
  Var batchnorm(Var x, Var gamma, Var shift, double eps = 1e-5);
  Var standardize_cols(Var x, double eps = 1e-12);
  Var sum(Var x);
  Var mean(Var x);
  Var rowwise_dot(Var a, Var b);
  // sum-free per-row quadratic form z_i^T C z_i with C held constant
  Var quadratic_form(Var z, const Matrix& c);
  Var logsumexp_rows(Var x);
  Var diag(Var x);

  const Matrix& value(Var v) const { return nodes_[v.index].value; }
  std::size_t num_nodes() const { return nodes_.size(); }

  // Gradients for every parameter node, keyed by node index. Parameters
  // unreachable from the loss get zero matrices; constants get nothing.
  std::map<int, Matrix> backward(Var loss) const;

 private:
  struct Node {
    OpKind kind;
    int args[3] = {-1, -1, -1};
    Matrix value;
    double scalar = 0.0;  // ScalarMul factor, normalization eps
    Matrix aux;           // QuadraticForm constant
    bool requires_grad = false;
  };

  Var push(Node node);
  bool needs_grad(Var v) const { return nodes_[v.index].requires_grad; }

  std::vector<Node> nodes_;
  std::vector<int> parameters_;
};

}  // namespace tico
