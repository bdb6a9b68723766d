#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tico/losses.hpp"
#include "tico/rng.hpp"

using namespace tico;

namespace {

Matrix permuted_rows(const Matrix& z, const std::vector<std::size_t>& order) {
  Matrix out(z.rows(), z.cols());
  for (std::size_t i = 0; i < z.rows(); ++i)
    for (std::size_t j = 0; j < z.cols(); ++j) out(i, j) = z(order[i], j);
  return out;
}

}  // namespace

TEST_CASE("alignment-plus-contrast loss trivial cases") {
  auto rng = make_rng(1);
  Matrix z = random_unit_rows(4, 3, rng);
  Matrix zero_c(3, 3);
  // identical views, zero covariance: both terms vanish
  TicoLossValue v = tico_loss_value(z, z, zero_c, 8.0);
  CHECK(std::fabs(v.total) < 1e-12);
  CHECK(std::fabs(v.alignment) < 1e-12);
  CHECK(v.contrast == 0.0);

  // single row, covariance equal to its own outer product, rho = 1:
  // alignment cancels and the quadratic form is exactly 1
  Matrix one = random_unit_rows(1, 5, rng);
  Matrix c = matmul(one.transposed(), one);
  TicoLossValue w = tico_loss_value(one, one, c, 1.0);
  CHECK(w.total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("alignment-plus-contrast loss matches the double-loop oracle") {
  auto rng = make_rng(2);
  Matrix z1 = random_unit_rows(8, 4, rng);
  Matrix z2 = random_unit_rows(8, 4, rng);
  Matrix c = covariance(random_unit_rows(16, 4, rng));
  const double rho = 3.5;

  double align = 0.0, quad = 0.0;
  for (std::size_t i = 0; i < 8; ++i) {
    for (std::size_t a = 0; a < 4; ++a) align += z1(i, a) * z2(i, a);
    for (std::size_t a = 0; a < 4; ++a)
      for (std::size_t b = 0; b < 4; ++b) quad += z1(i, a) * c(a, b) * z1(i, b);
  }
  double oracle = 1.0 - align / 8.0 + rho * quad / 8.0;
  CHECK(tico_loss_value(z1, z2, c, rho).total == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("squared contrastive batch trivial cases") {
  // single row: no negatives, pure alignment
  Matrix a = Matrix::from_rows({{0.6, 0.8}});
  Matrix b = Matrix::from_rows({{1.0, 0.0}});
  CHECK(squared_contrastive_batch(a, b, 4.0) == doctest::Approx(-0.6).epsilon(1e-15));

  // aligned positives with orthogonal cross pairs: loss is exactly -1
  Matrix e = Matrix::from_rows({{1, 0}, {0, 1}});
  CHECK(squared_contrastive_batch(e, e, 7.0) == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("squared contrastive batch matches the loop oracle") {
  auto rng = make_rng(3);
  Matrix z1 = random_unit_rows(6, 5, rng);
  Matrix z2 = random_unit_rows(6, 5, rng);
  const double rho = 2.25, n = 6.0;

  double align = 0.0, neg = 0.0;
  for (std::size_t i = 0; i < 6; ++i) {
    double dii = 0.0;
    for (std::size_t a = 0; a < 5; ++a) dii += z1(i, a) * z2(i, a);
    align += dii;
    for (std::size_t j = 0; j < 6; ++j) {
      if (j == i) continue;
      double dij = 0.0;
      for (std::size_t a = 0; a < 5; ++a) dij += z1(i, a) * z2(j, a);
      neg += dij * dij;
    }
  }
  double oracle = -align / n + rho * neg / (n * n);
  CHECK(squared_contrastive_batch(z1, z2, rho) == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("memory bank loss: the self term is the only difference from batch form") {
  // with the bank equal to the batch (m = n), the bank sum keeps j == i,
  // so the difference is exactly rho/n^2 * sum_i (z'_i . z''_i)^2
  auto rng = make_rng(4);
  Matrix z1 = random_unit_rows(5, 4, rng);
  Matrix z2 = random_unit_rows(5, 4, rng);
  const double rho = 1.75, n = 5.0;

  double diag_sq = 0.0;
  for (std::size_t i = 0; i < 5; ++i) {
    double dii = 0.0;
    for (std::size_t a = 0; a < 4; ++a) dii += z1(i, a) * z2(i, a);
    diag_sq += dii * dii;
  }
  double bank = squared_contrastive_membank(z1, z2, z2, rho);
  double batch = squared_contrastive_batch(z1, z2, rho);
  CHECK(bank - batch == doctest::Approx(rho * diag_sq / (n * n)).epsilon(1e-12));
}

TEST_CASE("memory bank loss matches the loop oracle with a larger bank") {
  auto rng = make_rng(5);
  Matrix z1 = random_unit_rows(4, 3, rng);
  Matrix z2 = random_unit_rows(4, 3, rng);
  Matrix extra = random_unit_rows(8, 3, rng);
  Matrix bank(12, 3);
  for (std::size_t j = 0; j < 3; ++j) {
    for (std::size_t i = 0; i < 4; ++i) bank(i, j) = z2(i, j);
    for (std::size_t i = 0; i < 8; ++i) bank(4 + i, j) = extra(i, j);
  }
  const double rho = 0.9;

  double align = 0.0, neg = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t a = 0; a < 3; ++a) align += z1(i, a) * z2(i, a);
    for (std::size_t j = 0; j < 12; ++j) {
      double dij = 0.0;
      for (std::size_t a = 0; a < 3; ++a) dij += z1(i, a) * bank(j, a);
      neg += dij * dij;
    }
  }
  double oracle = -align / 4.0 + rho * neg / (4.0 * 12.0);
  CHECK(squared_contrastive_membank(z1, bank, z2, rho) ==
        doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("memory bank loss rejects banks smaller than the batch") {
  auto rng = make_rng(6);
  Matrix z1 = random_unit_rows(4, 3, rng);
  Matrix small = random_unit_rows(2, 3, rng);
  CHECK_THROWS_AS(squared_contrastive_membank(z1, small, z1, 1.0),
                  std::invalid_argument);
}

TEST_CASE("covariance form trivial cases and bank equivalence") {
  auto rng = make_rng(7);
  Matrix z1 = random_unit_rows(6, 4, rng);
  Matrix z2 = random_unit_rows(6, 4, rng);

  // zero average covariance: only the alignment term remains
  double mean_dot = 0.0;
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t a = 0; a < 4; ++a) mean_dot += z1(i, a) * z2(i, a);
  mean_dot /= 6.0;
  CHECK(covariance_form(z1, z2, Matrix(4, 4), 3.0) ==
        doctest::Approx(-mean_dot).epsilon(1e-12));

  // isotropic covariance I/d: quadratic form of unit rows is 1/d
  Matrix iso = Matrix::identity(4) * 0.25;
  CHECK(covariance_form(z1, z2, iso, 3.0) ==
        doctest::Approx(-mean_dot + 3.0 * 0.25).epsilon(1e-12));

  // equals the memory-bank loss when C_avg is the bank covariance
  Matrix bank = random_unit_rows(18, 4, rng);
  Matrix c_avg = covariance(bank);
  CHECK(covariance_form(z1, z2, c_avg, 3.0) ==
        doctest::Approx(squared_contrastive_membank(z1, bank, z2, 3.0)).epsilon(1e-12));
}

TEST_CASE("infonce trivial cases") {
  auto rng = make_rng(8);
  Matrix one = random_unit_rows(1, 6, rng);
  // one sample: the only negative is the positive, loss is exactly 0
  CHECK(infonce(one, one, 0.37) == doctest::Approx(0.0).epsilon(1e-14));

  // two orthonormal pairs, tau = 1: closed form -1 + log(e + 1)
  Matrix e = Matrix::from_rows({{1, 0}, {0, 1}});
  double expect = -1.0 + std::log(std::exp(1.0) + 1.0);
  CHECK(infonce(e, e, 1.0) == doctest::Approx(expect).epsilon(1e-14));

  CHECK_THROWS_AS(infonce(e, e, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(infonce(e, e, -1.0), std::invalid_argument);
}

TEST_CASE("infonce matches the unstabilized loop oracle") {
  auto rng = make_rng(9);
  Matrix z1 = random_unit_rows(7, 5, rng);
  Matrix z2 = random_unit_rows(7, 5, rng);
  const double tau = 0.7;

  double total = 0.0;
  for (std::size_t i = 0; i < 7; ++i) {
    double pos = 0.0;
    for (std::size_t a = 0; a < 5; ++a) pos += z1(i, a) * z2(i, a);
    double denom = 0.0;
    for (std::size_t j = 0; j < 7; ++j) {
      double dij = 0.0;
      for (std::size_t a = 0; a < 5; ++a) dij += z1(i, a) * z2(j, a);
      denom += std::exp(dij / tau);
    }
    total += -std::log(std::exp(pos / tau) / denom);
  }
  // the implementation scales by tau/n to keep gradients comparable
  CHECK(infonce(z1, z2, tau) == doctest::Approx(tau * total / 7.0).epsilon(1e-9));
}

TEST_CASE("barlow loss vanishes on a constructed identity cross-correlation") {
  // Hadamard-pattern columns: mean 0, std 1, mutually orthogonal
  Matrix z = Matrix::from_rows({{1, 1}, {1, -1}, {-1, 1}, {-1, -1}});
  CHECK(barlow_twins(z, z, 5e-3) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("barlow loss statistical sanity on independent gaussian views") {
  auto rng = make_rng(10);
  Matrix z1 = random_matrix(4096, 4, rng);
  Matrix z2 = z1;
  // large-n same-view case: diagonal is exactly 1, off-diagonal ~ 1/sqrt(n)
  double loss = barlow_twins(z1, z2, 5e-3);
  CHECK(loss >= 0.0);
  CHECK(loss < 0.1);
}

TEST_CASE("barlow loss matches the loop oracle") {
  auto rng = make_rng(11);
  Matrix z1 = random_matrix(9, 4, rng);
  Matrix z2 = random_matrix(9, 4, rng);
  const double lambda = 0.031;

  Matrix a = standardize_columns(z1);
  Matrix b = standardize_columns(z2);
  double oracle = 0.0;
  for (std::size_t p = 0; p < 4; ++p) {
    for (std::size_t q = 0; q < 4; ++q) {
      double cpq = 0.0;
      for (std::size_t i = 0; i < 9; ++i) cpq += a(i, p) * b(i, q) / 9.0;
      if (p == q)
        oracle += (1.0 - cpq) * (1.0 - cpq) / 4.0;
      else
        oracle += lambda * cpq * cpq / 4.0;
    }
  }
  CHECK(barlow_twins(z1, z2, lambda) == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("barlow expanded form agrees exactly when the views coincide") {
  auto rng = make_rng(12);
  for (std::uint64_t s = 0; s < 5; ++s) {
    Matrix z = random_matrix(8, 5, rng);
    double orig = barlow_twins(z, z, 5e-3);
    double expanded = barlow_expanded(z, z, 5e-3);
    CHECK(std::fabs(orig - expanded) < 1e-12);
  }
}

TEST_CASE("losses are invariant under a shared row permutation") {
  auto rng = make_rng(13);
  Matrix z1 = random_unit_rows(6, 4, rng);
  Matrix z2 = random_unit_rows(6, 4, rng);
  Matrix c = covariance(random_unit_rows(10, 4, rng));
  std::vector<std::size_t> order = {4, 0, 5, 2, 1, 3};
  Matrix p1 = permuted_rows(z1, order);
  Matrix p2 = permuted_rows(z2, order);

  CHECK(tico_loss_value(z1, z2, c, 8.0).total ==
        doctest::Approx(tico_loss_value(p1, p2, c, 8.0).total).epsilon(1e-12));
  CHECK(squared_contrastive_batch(z1, z2, 2.0) ==
        doctest::Approx(squared_contrastive_batch(p1, p2, 2.0)).epsilon(1e-12));
  CHECK(infonce(z1, z2, 0.5) == doctest::Approx(infonce(p1, p2, 0.5)).epsilon(1e-12));
  CHECK(barlow_twins(z1, z2, 5e-3) ==
        doctest::Approx(barlow_twins(p1, p2, 5e-3)).epsilon(1e-12));
}

TEST_CASE("tape builders reproduce the numeric values") {
  auto rng = make_rng(14);
  Matrix z1 = random_unit_rows(6, 4, rng);
  Matrix z2 = random_unit_rows(6, 4, rng);
  Matrix c = covariance(random_unit_rows(10, 4, rng));

  Tape t1;
  Var v1 = tico_loss_tape(t1, t1.constant(z1), z2, c, 8.0);
  CHECK(t1.value(v1)(0, 0) ==
        doctest::Approx(tico_loss_value(z1, z2, c, 8.0).total).epsilon(1e-13));

  Tape t1b;
  Var v1b = tico_loss_tape(t1b, t1b.constant(z1), z2, t1b.constant(c), 8.0);
  CHECK(t1b.value(v1b)(0, 0) ==
        doctest::Approx(tico_loss_value(z1, z2, c, 8.0).total).epsilon(1e-13));

  Tape t2;
  Var v2 = squared_loss_tape(t2, t2.constant(z1), z2, 2.0);
  CHECK(t2.value(v2)(0, 0) ==
        doctest::Approx(squared_contrastive_batch(z1, z2, 2.0)).epsilon(1e-13));

  Tape t3;
  Var v3 = infonce_loss_tape(t3, t3.constant(z1), z2, 0.5);
  CHECK(t3.value(v3)(0, 0) == doctest::Approx(infonce(z1, z2, 0.5)).epsilon(1e-13));

  Tape t4;
  Var v4 = barlow_loss_tape(t4, t4.constant(z1), z2, 5e-3);
  CHECK(t4.value(v4)(0, 0) ==
        doctest::Approx(barlow_twins(z1, z2, 5e-3)).epsilon(1e-13));
}

TEST_CASE("loss config validation") {
  LossConfig ok;
  CHECK_NOTHROW(ok.validate());
  LossConfig bad;
  bad.tau = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("shape mismatches are rejected with both shapes named") {
  Matrix a(2, 3, 0.1), b(3, 3, 0.1);
  CHECK_THROWS_WITH_AS(squared_contrastive_batch(a, b, 1.0),
                       doctest::Contains("2x3"), std::invalid_argument);
}
