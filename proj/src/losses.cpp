#include "tico/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace tico {

namespace {

void check_pair(const Matrix& z1, const Matrix& z2, const char* who) {
  if (!z1.same_shape(z2))
    throw std::invalid_argument(std::string(who) + ": shape mismatch " +
                                z1.shape_str() + " vs " + z2.shape_str());
  if (z1.empty()) throw std::invalid_argument(std::string(who) + ": empty input");
}

double diag_sum(const Matrix& s) {
  double t = 0.0;
  for (std::size_t i = 0; i < std::min(s.rows(), s.cols()); ++i) t += s(i, i);
  return t;
}

double diag_sq_sum(const Matrix& s) {
  double t = 0.0;
  for (std::size_t i = 0; i < std::min(s.rows(), s.cols()); ++i) t += s(i, i) * s(i, i);
  return t;
}

}  // namespace

void LossConfig::validate() const {
  if (rho <= 0.0 || tau <= 0.0 || barlow_lambda <= 0.0)
    throw std::invalid_argument("loss config: rho, tau and barlow_lambda must be positive");
}

TicoLossValue tico_loss_value(const Matrix& z1, const Matrix& z2, const Matrix& c,
                              double rho) {
  check_pair(z1, z2, "tico_loss");
  if (c.rows() != z1.cols() || c.cols() != z1.cols())
    throw std::invalid_argument("tico_loss: C must be " + std::to_string(z1.cols()) +
                                "x" + std::to_string(z1.cols()) + ", got " + c.shape_str());
  const double n = static_cast<double>(z1.rows());

  double align_dot = 0.0;
  for (std::size_t i = 0; i < z1.rows(); ++i)
    for (std::size_t j = 0; j < z1.cols(); ++j) align_dot += z1(i, j) * z2(i, j);

  Matrix zc = matmul(z1, c);
  double quad = 0.0;
  for (std::size_t k = 0; k < zc.size(); ++k) quad += zc.data()[k] * z1.data()[k];

  TicoLossValue v;
  v.alignment = 1.0 - align_dot / n;
  v.contrast = rho * quad / n;
  v.total = v.alignment + v.contrast;
  return v;
}

double squared_contrastive_batch(const Matrix& z1, const Matrix& z2, double rho) {
  check_pair(z1, z2, "squared_contrastive");
  const double n = static_cast<double>(z1.rows());
  Matrix s = matmul(z1, z2.transposed());
  double off_diag_sq = frobenius_norm_sq(s) - diag_sq_sum(s);
  return -diag_sum(s) / n + rho * off_diag_sq / (n * n);
}

double squared_contrastive_membank(const Matrix& z1, const Matrix& negatives,
                                   const Matrix& positives, double rho) {
  check_pair(z1, positives, "squared_contrastive_membank");
  if (negatives.rows() < z1.rows())
    throw std::invalid_argument("squared_contrastive_membank: bank smaller than batch (m=" +
                                std::to_string(negatives.rows()) + " < n=" +
                                std::to_string(z1.rows()) + ")");
  if (negatives.cols() != z1.cols())
    throw std::invalid_argument("squared_contrastive_membank: dim mismatch");
  const double n = static_cast<double>(z1.rows());
  const double m = static_cast<double>(negatives.rows());

  double align_dot = 0.0;
  for (std::size_t i = 0; i < z1.rows(); ++i)
    for (std::size_t j = 0; j < z1.cols(); ++j) align_dot += z1(i, j) * positives(i, j);

  Matrix s = matmul(z1, negatives.transposed());
  return -align_dot / n + rho * frobenius_norm_sq(s) / (n * m);
}

double covariance_form(const Matrix& z1, const Matrix& z2, const Matrix& c_avg,
                       double rho) {
  TicoLossValue v = tico_loss_value(z1, z2, c_avg, rho);
  return v.total - 1.0;  // same terms without the constant in the alignment part
}

double infonce(const Matrix& z1, const Matrix& z2, double tau) {
  check_pair(z1, z2, "infonce");
  if (tau <= 0.0) throw std::invalid_argument("infonce: tau must be positive");
  const double n = static_cast<double>(z1.rows());
  Matrix s = matmul(z1, z2.transposed());
  double lse_sum = 0.0;
  for (std::size_t i = 0; i < s.rows(); ++i) {
    double mx = s(i, 0);
    for (std::size_t j = 1; j < s.cols(); ++j) mx = std::max(mx, s(i, j));
    double acc = 0.0;
    for (std::size_t j = 0; j < s.cols(); ++j) acc += std::exp((s(i, j) - mx) / tau);
    lse_sum += mx / tau + std::log(acc);
  }
  return -diag_sum(s) / n + tau * lse_sum / n;
}

double barlow_twins(const Matrix& z1_raw, const Matrix& z2_raw, double lambda) {
  check_pair(z1_raw, z2_raw, "barlow_twins");
  if (z1_raw.rows() < 2)
    throw std::invalid_argument("barlow_twins: batch standardization needs n >= 2");
  const double n = static_cast<double>(z1_raw.rows());
  const double d = static_cast<double>(z1_raw.cols());
  Matrix a = standardize_columns(z1_raw);
  Matrix b = standardize_columns(z2_raw);
  Matrix cc = matmul(a.transposed(), b) * (1.0 / n);

  double diag_term = 0.0;
  for (std::size_t i = 0; i < cc.rows(); ++i) {
    double dev = 1.0 - cc(i, i);
    diag_term += dev * dev;
  }
  double off_term = frobenius_norm_sq(cc) - diag_sq_sum(cc);
  return diag_term / d + lambda * off_term / d;
}

double barlow_expanded(const Matrix& z1_raw, const Matrix& z2_raw, double lambda) {
  check_pair(z1_raw, z2_raw, "barlow_expanded");
  if (z1_raw.rows() < 2)
    throw std::invalid_argument("barlow_expanded: batch standardization needs n >= 2");
  const double n = static_cast<double>(z1_raw.rows());
  const double d = static_cast<double>(z1_raw.cols());
  Matrix a = standardize_columns(z1_raw);
  Matrix b = standardize_columns(z2_raw);
  Matrix cc = matmul(a.transposed(), b) * (1.0 / n);
  Matrix cb = matmul(a.transposed(), a) * (1.0 / n);

  return 1.0 + diag_sq_sum(cc) / d - 2.0 * diag_sum(cc) / d - lambda +
         lambda * frobenius_norm_sq(cb) / d;
}

Var tico_loss_tape(Tape& tape, Var z1, const Matrix& z2, const Matrix& c, double rho) {
  const double n = static_cast<double>(z1.rows);
  Var dots = tape.rowwise_dot(z1, tape.constant(z2));
  Var align = tape.sub(tape.constant(Matrix(1, 1, 1.0)),
                       tape.scalar_mul(tape.sum(dots), 1.0 / n));
  Var quad = tape.scalar_mul(tape.sum(tape.quadratic_form(z1, c)), rho / n);
  return tape.add(align, quad);
}

Var tico_loss_tape(Tape& tape, Var z1, const Matrix& z2, Var c, double rho) {
  const double n = static_cast<double>(z1.rows);
  Var dots = tape.rowwise_dot(z1, tape.constant(z2));
  Var align = tape.sub(tape.constant(Matrix(1, 1, 1.0)),
                       tape.scalar_mul(tape.sum(dots), 1.0 / n));
  Var zc = tape.matmul(z1, c);
  Var quad = tape.scalar_mul(tape.sum(tape.mul(zc, z1)), rho / n);
  return tape.add(align, quad);
}

Var squared_loss_tape(Tape& tape, Var z1, const Matrix& z2, double rho) {
  const double n = static_cast<double>(z1.rows);
  Var z2t = tape.constant(z2.transposed());
  Var s = tape.matmul(z1, z2t);
  Var dots = tape.rowwise_dot(z1, tape.constant(z2));
  Var all_sq = tape.sum(tape.mul(s, s));
  Var diag_sq = tape.sum(tape.mul(dots, dots));
  Var off_sq = tape.sub(all_sq, diag_sq);
  Var align = tape.scalar_mul(tape.sum(dots), -1.0 / n);
  return tape.add(align, tape.scalar_mul(off_sq, rho / (n * n)));
}

Var infonce_loss_tape(Tape& tape, Var z1, const Matrix& z2, double tau) {
  if (tau <= 0.0) throw std::invalid_argument("infonce: tau must be positive");
  const double n = static_cast<double>(z1.rows);
  Var s = tape.matmul(z1, tape.constant(z2.transposed()));
  Var dots = tape.rowwise_dot(z1, tape.constant(z2));
  Var lse = tape.logsumexp_rows(tape.scalar_mul(s, 1.0 / tau));
  Var align = tape.scalar_mul(tape.sum(dots), -1.0 / n);
  return tape.add(align, tape.scalar_mul(tape.sum(lse), tau / n));
}

Var barlow_loss_tape(Tape& tape, Var z1, const Matrix& z2, double lambda) {
  const double n = static_cast<double>(z1.rows);
  const double d = static_cast<double>(z1.cols);
  Var a = tape.standardize_cols(z1);
  Var b = tape.constant(standardize_columns(z2));
  Var cc = tape.scalar_mul(tape.matmul(tape.transpose(a), b), 1.0 / n);
  Var cdiag = tape.diag(cc);
  Var dev = tape.sub(tape.constant(Matrix(z1.cols, 1, 1.0)), cdiag);
  Var diag_term = tape.scalar_mul(tape.sum(tape.mul(dev, dev)), 1.0 / d);
  Var all_sq = tape.sum(tape.mul(cc, cc));
  Var diag_sq = tape.sum(tape.mul(cdiag, cdiag));
  Var off_term = tape.scalar_mul(tape.sub(all_sq, diag_sq), lambda / d);
  return tape.add(diag_term, off_term);
}

}  // namespace tico
