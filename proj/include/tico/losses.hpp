#pragma once

#include "tico/autodiff.hpp"
#include "tico/matrix.hpp"

namespace tico {

struct LossConfig {
  double rho = 8.0;           // covariance contrast weight
  double tau = 0.1;           // InfoNCE temperature
  double barlow_lambda = 5e-3;  // off-diagonal weight

  void validate() const;
};

struct TicoLossValue {
  double total = 0.0;
  double alignment = 0.0;  // 1 - (1/n) sum z'_i . z''_i
  double contrast = 0.0;   // (rho/n) sum z'_i^T C z'_i
};

// Pure numeric evaluations ---------------------------------------------------

TicoLossValue tico_loss_value(const Matrix& z1, const Matrix& z2, const Matrix& c,
                              double rho);

// -(1/n) sum_i z'_i.z''_i + (rho/n^2) sum_i sum_{j != i} (z'_i.z''_j)^2
double squared_contrastive_batch(const Matrix& z1, const Matrix& z2, double rho);

// Memory-bank form: negatives are m rows whose first n rows are the
// positives; the negative sum runs over all j including j == i.
double squared_contrastive_membank(const Matrix& z1, const Matrix& negatives,
                                   const Matrix& positives, double rho);

// -(1/n) sum_i z'_i.z''_i + (rho/n) sum_i z'_i^T C_avg z'_i
double covariance_form(const Matrix& z1, const Matrix& z2, const Matrix& c_avg,
                       double rho);

double infonce(const Matrix& z1, const Matrix& z2, double tau);

double barlow_twins(const Matrix& z1_raw, const Matrix& z2_raw, double lambda);

// Expanded form with the off-diagonal cross-correlation replaced by the
// self cross-correlation; agrees with barlow_twins exactly when Z' == Z''.
double barlow_expanded(const Matrix& z1_raw, const Matrix& z2_raw, double lambda);

// Tape builders --------------------------------------------------------------
// z1 is the differentiable branch; the momentum branch and C enter as
// constants unless a Var is handed in explicitly.

Var tico_loss_tape(Tape& tape, Var z1, const Matrix& z2, const Matrix& c, double rho);
Var tico_loss_tape(Tape& tape, Var z1, const Matrix& z2, Var c, double rho);
Var squared_loss_tape(Tape& tape, Var z1, const Matrix& z2, double rho);
Var infonce_loss_tape(Tape& tape, Var z1, const Matrix& z2, double tau);
Var barlow_loss_tape(Tape& tape, Var z1, const Matrix& z2, double lambda);

}  // namespace tico
