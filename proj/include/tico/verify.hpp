#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tico/matrix.hpp"
#include "tico/trainer.hpp"

namespace tico {

struct VerificationReport {
  std::string name;
  std::string inputs;  // shapes, seed, reconciled constants
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

VerificationReport make_report(std::string name, std::string inputs, double residual,
                               double tolerance);
std::string to_json_line(const VerificationReport& r);

// Central finite differences, h = 1e-5 by default.
Matrix finite_difference_gradient(const std::function<double(const Matrix&)>& f,
                                  const Matrix& x, double h = 1e-5);

// Nonzero eigenvalues of Z Z^T and Z^T Z match; traces and squared
// Frobenius norms equal the eigenvalue sums. Three reports.
std::vector<VerificationReport> check_spectrum_correspondence(std::size_t n, std::size_t d,
                                               std::uint64_t seed);

// Memory-bank squared contrastive loss equals the covariance form.
VerificationReport check_membank_equivalence(std::size_t n, std::size_t m, std::size_t d,
                                             double rho, std::uint64_t seed);

// ||Z^T Z||_F^2 >= n^2/d for unit-norm rows; a repeated orthonormal set
// attains the bound.
VerificationReport check_lower_bound(std::size_t n, std::size_t d, std::uint64_t seed,
                                     std::size_t trials);

// Expanded Barlow form equals the substituted original; exact agreement
// when both views coincide.
VerificationReport check_barlow_identity(std::size_t n, std::size_t d, double lambda,
                                         std::uint64_t seed);

// Momentum-parameter and covariance EMAs match their closed-form
// unrollings. Two reports.
std::vector<VerificationReport> check_ema_equivalence(std::size_t steps, std::size_t n,
                                                      std::size_t d, double beta,
                                                      double alpha, std::uint64_t seed);

// Analytic gradient of the given loss (through row normalization) against
// central finite differences.
VerificationReport check_gradients(LossKind kind, std::size_t n, std::size_t d,
                                   std::uint64_t seed);

// One gradcheck per tape op-kind.
std::vector<VerificationReport> check_op_gradients(std::uint64_t seed);

// The trace-form rewrite of the squared contrastive loss with the
// consistent per-n constant bookkeeping (negative-pair weight rho/n; the
// batch form's rho/n^2 differs from it by exactly a factor n).
VerificationReport check_frobenius_rewrite(std::size_t n, std::size_t d, double rho,
                                           std::uint64_t seed);

std::vector<VerificationReport> run_all_checks(std::uint64_t seed);

}  // namespace tico
