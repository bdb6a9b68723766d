#include "tico/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tico/autodiff.hpp"
#include "tico/ema.hpp"
#include "tico/losses.hpp"
#include "tico/rng.hpp"

#include "json.hpp"

namespace tico {

VerificationReport make_report(std::string name, std::string inputs, double residual,
                               double tolerance) {
  VerificationReport r;
  r.name = std::move(name);
  r.inputs = std::move(inputs);
  r.residual = residual;
  r.tolerance = tolerance;
  r.pass = residual <= tolerance;
  return r;
}

std::string to_json_line(const VerificationReport& r) {
  nlohmann::json j;
  j["check"] = r.name;
  j["inputs"] = r.inputs;
  j["residual"] = r.residual;
  j["tolerance"] = r.tolerance;
  j["pass"] = r.pass;
  return j.dump();
}

Matrix finite_difference_gradient(const std::function<double(const Matrix&)>& f,
                                  const Matrix& x, double h) {
  Matrix g(x.rows(), x.cols());
  Matrix probe = x;
  for (std::size_t k = 0; k < x.size(); ++k) {
    double saved = probe.data()[k];
    probe.data()[k] = saved + h;
    double up = f(probe);
    probe.data()[k] = saved - h;
    double down = f(probe);
    probe.data()[k] = saved;
    g.data()[k] = (up - down) / (2.0 * h);
  }
  return g;
}

namespace {

std::string dims(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::ostringstream os;
  os << "n=" << n << " d=" << d << " seed=" << seed;
  return os.str();
}

double rel_err(double a, double b) {
  return std::fabs(a - b) / std::max(1.0, std::max(std::fabs(a), std::fabs(b)));
}

double grad_rel_err(const Matrix& analytic, const Matrix& fd) {
  Matrix diff = analytic - fd;
  double denom = std::max(std::sqrt(frobenius_norm_sq(fd)), 1e-12);
  return std::sqrt(frobenius_norm_sq(diff)) / denom;
}

}  // namespace

std::vector<VerificationReport> check_spectrum_correspondence(std::size_t n, std::size_t d,
                                               std::uint64_t seed) {
  auto rng = make_rng(seed);
  Matrix z = random_matrix(n, d, rng);

  Matrix k = gram(z);                            // Z Z^T, n x n
  Matrix c = matmul(z.transposed(), z);          // Z^T Z, d x d (no 1/n)
  auto ek = sym_eig(k);
  auto ec = sym_eig(c);

  double lam_max = 0.0;
  for (double l : ek.eigenvalues) lam_max = std::max(lam_max, std::fabs(l));
  for (double l : ec.eigenvalues) lam_max = std::max(lam_max, std::fabs(l));
  const double nonzero_cut = 1e-10 * lam_max;

  auto nonzero = [&](const std::vector<double>& lams) {
    std::vector<double> out;
    for (double l : lams)
      if (std::fabs(l) > nonzero_cut) out.push_back(l);
    std::sort(out.begin(), out.end(), std::greater<double>());
    return out;
  };
  std::vector<double> lk = nonzero(ek.eigenvalues);
  std::vector<double> lc = nonzero(ec.eigenvalues);

  double part1 = lk.size() == lc.size() ? 0.0 : 1e9;
  for (std::size_t i = 0; i < std::min(lk.size(), lc.size()); ++i)
    part1 = std::max(part1, std::fabs(lk[i] - lc[i]));

  double lam_sum = 0.0, lam_sq_sum = 0.0;
  for (double l : lk) {
    lam_sum += l;
    lam_sq_sum += l * l;
  }
  double part2 = std::max(rel_err(trace(k), lam_sum), rel_err(trace(c), lam_sum));
  double part3 = std::max(rel_err(frobenius_norm_sq(k), lam_sq_sum),
                          rel_err(frobenius_norm_sq(c), lam_sq_sum));

  std::vector<VerificationReport> out;
  out.push_back(make_report("spectrum_shared_eigenvalues", dims(n, d, seed), part1, 1e-8));
  out.push_back(make_report("spectrum_trace", dims(n, d, seed), part2, 1e-10));
  out.push_back(make_report("spectrum_frobenius", dims(n, d, seed), part3, 1e-8));
  return out;
}

VerificationReport check_membank_equivalence(std::size_t n, std::size_t m, std::size_t d,
                                             double rho, std::uint64_t seed) {
  auto rng = make_rng(seed);
  Matrix z1 = random_unit_rows(n, d, rng);
  Matrix positives = random_unit_rows(n, d, rng);
  Matrix extra = random_unit_rows(m - n, d, rng);

  Matrix negatives(m, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) negatives(i, j) = positives(i, j);
  for (std::size_t i = n; i < m; ++i)
    for (std::size_t j = 0; j < d; ++j) negatives(i, j) = extra(i - n, j);

  MemoryBank bank(m, d);
  bank.push(negatives);

  double lhs = squared_contrastive_membank(z1, negatives, positives, rho);
  double rhs = covariance_form(z1, positives, bank.bank_covariance(), rho);

  std::ostringstream inputs;
  inputs << "n=" << n << " m=" << m << " d=" << d << " rho=" << rho << " seed=" << seed;
  return make_report("membank_covariance_equivalence", inputs.str(), rel_err(lhs, rhs), 1e-12);
}

VerificationReport check_lower_bound(std::size_t n, std::size_t d, std::uint64_t seed,
                                     std::size_t trials) {
  auto rng = make_rng(seed);
  const double bound = static_cast<double>(n) * static_cast<double>(n) /
                       static_cast<double>(d);

  double worst_violation = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    Matrix z = random_unit_rows(n, d, rng);
    double val = frobenius_norm_sq(matmul(z.transposed(), z));
    worst_violation = std::max(worst_violation, bound - 1e-9 - val);
  }

  // equality case: an orthonormal set of d rows, each repeated n_eq/d times
  std::size_t reps = std::max<std::size_t>(1, n / d);
  std::size_t n_eq = reps * d;
  Matrix z_eq(n_eq, d);
  for (std::size_t i = 0; i < n_eq; ++i) z_eq(i, i % d) = 1.0;
  double eq_val = frobenius_norm_sq(matmul(z_eq.transposed(), z_eq));
  double eq_bound = static_cast<double>(n_eq) * static_cast<double>(n_eq) /
                    static_cast<double>(d);
  double eq_gap = std::fabs(eq_val - eq_bound);

  std::ostringstream inputs;
  inputs << dims(n, d, seed) << " trials=" << trials << " n_eq=" << n_eq;
  return make_report("frobenius_lower_bound", inputs.str(),
                     std::max(worst_violation, eq_gap > 1e-10 ? eq_gap : 0.0), 1e-10);
}

VerificationReport check_barlow_identity(std::size_t n, std::size_t d, double lambda,
                                         std::uint64_t seed) {
  auto rng = make_rng(seed);
  Matrix z1 = random_matrix(n, d, rng);
  Matrix z2 = random_matrix(n, d, rng);

  // original form with the off-diagonal term substituted C'_B -> C_B
  auto substituted = [&](const Matrix& a_raw, const Matrix& b_raw) {
    Matrix a = standardize_columns(a_raw);
    Matrix b = standardize_columns(b_raw);
    const double nn = static_cast<double>(a.rows());
    const double dd = static_cast<double>(a.cols());
    Matrix cc = matmul(a.transposed(), b) * (1.0 / nn);
    Matrix cb = matmul(a.transposed(), a) * (1.0 / nn);
    double diag_term = 0.0, off_term = 0.0;
    for (std::size_t i = 0; i < cc.rows(); ++i) {
      double dev = 1.0 - cc(i, i);
      diag_term += dev * dev;
      for (std::size_t j = 0; j < cc.cols(); ++j)
        if (i != j) off_term += cb(i, j) * cb(i, j);
    }
    return diag_term / dd + lambda * off_term / dd;
  };

  double r1 = rel_err(barlow_expanded(z1, z2, lambda), substituted(z1, z2));
  double r2 = rel_err(barlow_expanded(z1, z1, lambda), barlow_twins(z1, z1, lambda));

  std::ostringstream inputs;
  inputs << dims(n, d, seed) << " lambda=" << lambda;
  return make_report("barlow_expansion_identity", inputs.str(), std::max(r1, r2), 1e-12);
}

std::vector<VerificationReport> check_ema_equivalence(std::size_t steps, std::size_t n,
                                                      std::size_t d, double beta,
                                                      double alpha, std::uint64_t seed) {
  auto rng = make_rng(seed);

  // covariance EMA vs closed form sum_j (1-beta) beta^(k-j) B_j
  CovarianceState cov = make_covariance_state(d, beta);
  std::vector<Matrix> batch_covs;
  for (std::size_t s = 0; s < steps; ++s) {
    Matrix z = random_unit_rows(n, d, rng);
    batch_covs.push_back(covariance(z));
    update_covariance(cov, z);
  }
  Matrix closed(d, d);
  for (std::size_t j = 0; j < steps; ++j)
    closed += batch_covs[j] * ((1.0 - beta) * std::pow(beta, static_cast<double>(steps - 1 - j)));
  double cov_res = max_abs(cov.c - closed);

  // momentum EMA over a toy parameter vector
  Parameters theta;
  theta.add_slice("w", 1, d);
  MomentumState mom;
  mom.alpha = alpha;
  mom.xi = theta;
  Matrix xi0 = random_matrix(1, d, rng);
  mom.xi.set_slice(0, xi0);
  std::vector<Matrix> thetas;
  for (std::size_t s = 0; s < steps; ++s) {
    theta.set_slice(0, random_matrix(1, d, rng));
    thetas.push_back(theta.slice(0));
    update_momentum(mom, theta);
  }
  Matrix xi_closed = xi0 * std::pow(alpha, static_cast<double>(steps));
  for (std::size_t j = 0; j < steps; ++j)
    xi_closed += thetas[j] * ((1.0 - alpha) * std::pow(alpha, static_cast<double>(steps - 1 - j)));
  double mom_res = max_abs(mom.xi.slice(0) - xi_closed);

  std::ostringstream inputs;
  inputs << dims(n, d, seed) << " steps=" << steps << " beta=" << beta
         << " alpha=" << alpha;
  std::vector<VerificationReport> out;
  out.push_back(make_report("covariance_ema_closed_form", inputs.str(), cov_res, 1e-12));
  out.push_back(make_report("momentum_ema_closed_form", inputs.str(), mom_res, 1e-12));
  return out;
}

VerificationReport check_gradients(LossKind kind, std::size_t n, std::size_t d,
                                   std::uint64_t seed) {
  auto rng = make_rng(seed);
  Matrix x = random_matrix(n, d, rng);
  Matrix z2 = random_unit_rows(n, d, rng);
  Matrix c = covariance(random_unit_rows(2 * d, d, rng));
  const double rho = 2.0, tau = 0.5, lambda = 0.1;

  auto eval = [&](const Matrix& input) {
    Matrix z1 = normalize_rows(input);
    switch (kind) {
      case LossKind::kTico: return tico_loss_value(z1, z2, c, rho).total;
      case LossKind::kSquared: return squared_contrastive_batch(z1, z2, rho);
      case LossKind::kInfoNce: return infonce(z1, z2, tau);
      case LossKind::kBarlow: return barlow_twins(z1, z2, lambda);
    }
    return 0.0;
  };

  Tape tape;
  Var xv = tape.parameter(x);
  Var z1 = tape.row_normalize(xv);
  Var loss;
  switch (kind) {
    case LossKind::kTico: loss = tico_loss_tape(tape, z1, z2, c, rho); break;
    case LossKind::kSquared: loss = squared_loss_tape(tape, z1, z2, rho); break;
    case LossKind::kInfoNce: loss = infonce_loss_tape(tape, z1, z2, tau); break;
    case LossKind::kBarlow: loss = barlow_loss_tape(tape, z1, z2, lambda); break;
  }
  Matrix analytic = tape.backward(loss).at(xv.index);
  Matrix fd = finite_difference_gradient(eval, x);

  std::ostringstream inputs;
  inputs << "loss=" << to_string(kind) << " " << dims(n, d, seed);
  return make_report("gradcheck_" + to_string(kind), inputs.str(),
                     grad_rel_err(analytic, fd), 1e-5);
}

std::vector<VerificationReport> check_op_gradients(std::uint64_t seed) {
  auto rng = make_rng(seed);
  std::vector<VerificationReport> out;

  auto run = [&](const std::string& name, std::size_t rows, std::size_t cols,
                 const std::function<Var(Tape&, Var)>& build,
                 const std::function<double(const Matrix&)>& numeric) {
    Matrix x = random_matrix(rows, cols, rng);
    Tape tape;
    Var xv = tape.parameter(x);
    Var loss = build(tape, xv);
    Matrix analytic = tape.backward(loss).at(xv.index);
    Matrix fd = finite_difference_gradient(numeric, x);
    out.push_back(make_report("gradcheck_op_" + name,
                              dims(rows, cols, seed), grad_rel_err(analytic, fd), 1e-5));
  };

  Matrix w = random_matrix(5, 3, rng);
  run("matmul", 4, 5,
      [&](Tape& t, Var x) { return t.sum(t.mul(t.matmul(x, t.constant(w)),
                                               t.matmul(x, t.constant(w)))); },
      [&](const Matrix& x) { return frobenius_norm_sq(matmul(x, w)); });

  run("transpose", 3, 4,
      [&](Tape& t, Var x) {
        Var xt = t.transpose(x);
        return t.sum(t.mul(t.matmul(xt, x), t.matmul(xt, x)));
      },
      [&](const Matrix& x) {
        return frobenius_norm_sq(matmul(x.transposed(), x));
      });

  Matrix other = random_matrix(4, 3, rng);
  run("add_sub_mul", 4, 3,
      [&](Tape& t, Var x) {
        Var o = t.constant(other);
        Var y = t.mul(t.add(x, o), t.sub(x, o));
        return t.sum(t.mul(y, y));
      },
      [&](const Matrix& x) {
        Matrix y = hadamard(x + other, x - other);
        return frobenius_norm_sq(y);
      });

  run("scalar_mul", 3, 3,
      [&](Tape& t, Var x) { Var y = t.scalar_mul(x, -2.5); return t.sum(t.mul(y, y)); },
      [&](const Matrix& x) { return frobenius_norm_sq(x * -2.5); });

  run("relu", 4, 4,
      [&](Tape& t, Var x) { Var y = t.relu(x); return t.sum(t.mul(y, y)); },
      [&](const Matrix& x) {
        double s = 0.0;
        for (double v : x.data()) if (v > 0.0) s += v * v;
        return s;
      });

  Matrix probe = random_matrix(4, 5, rng);
  run("row_normalize", 4, 5,
      [&](Tape& t, Var x) { return t.sum(t.mul(t.row_normalize(x), t.constant(probe))); },
      [&](const Matrix& x) {
        Matrix z = normalize_rows(x);
        double s = 0.0;
        for (std::size_t k = 0; k < z.size(); ++k) s += z.data()[k] * probe.data()[k];
        return s;
      });

  Matrix gamma = random_matrix(1, 3, rng);
  Matrix shift = random_matrix(1, 3, rng);
  Matrix bn_probe = random_matrix(6, 3, rng);
  run("batchnorm", 6, 3,
      [&](Tape& t, Var x) {
        Var y = t.batchnorm(x, t.parameter(gamma), t.parameter(shift));
        return t.sum(t.mul(y, t.constant(bn_probe)));
      },
      [&](const Matrix& x) {
        const double eps = 1e-5;
        double s = 0.0;
        for (std::size_t j = 0; j < x.cols(); ++j) {
          double mean = 0.0;
          for (std::size_t i = 0; i < x.rows(); ++i) mean += x(i, j);
          mean /= static_cast<double>(x.rows());
          double var = 0.0;
          for (std::size_t i = 0; i < x.rows(); ++i) {
            double cdev = x(i, j) - mean;
            var += cdev * cdev;
          }
          var /= static_cast<double>(x.rows());
          double inv = 1.0 / std::sqrt(var + eps);
          for (std::size_t i = 0; i < x.rows(); ++i)
            s += (gamma(0, j) * (x(i, j) - mean) * inv + shift(0, j)) * bn_probe(i, j);
        }
        return s;
      });

  Matrix std_probe = random_matrix(5, 4, rng);
  run("standardize_cols", 5, 4,
      [&](Tape& t, Var x) {
        return t.sum(t.mul(t.standardize_cols(x), t.constant(std_probe)));
      },
      [&](const Matrix& x) {
        Matrix z = standardize_columns(x);
        double s = 0.0;
        for (std::size_t k = 0; k < z.size(); ++k) s += z.data()[k] * std_probe.data()[k];
        return s;
      });

  run("sum_mean", 3, 5,
      [&](Tape& t, Var x) { return t.add(t.sum(t.mul(x, x)), t.mean(x)); },
      [&](const Matrix& x) {
        double s = frobenius_norm_sq(x), m = 0.0;
        for (double v : x.data()) m += v;
        return s + m / static_cast<double>(x.size());
      });

  Matrix rd_other = random_matrix(4, 6, rng);
  run("rowwise_dot", 4, 6,
      [&](Tape& t, Var x) {
        Var dots = t.rowwise_dot(x, t.constant(rd_other));
        return t.sum(t.mul(dots, dots));
      },
      [&](const Matrix& x) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.rows(); ++i) {
          double dot = 0.0;
          for (std::size_t j = 0; j < x.cols(); ++j) dot += x(i, j) * rd_other(i, j);
          s += dot * dot;
        }
        return s;
      });

  Matrix qc = random_symmetric(5, rng);
  run("quadratic_form", 3, 5,
      [&](Tape& t, Var x) { return t.sum(t.quadratic_form(x, qc)); },
      [&](const Matrix& x) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.rows(); ++i)
          for (std::size_t p = 0; p < x.cols(); ++p)
            for (std::size_t q = 0; q < x.cols(); ++q)
              s += x(i, p) * qc(p, q) * x(i, q);
        return s;
      });

  run("logsumexp_rows", 4, 5,
      [&](Tape& t, Var x) { return t.sum(t.logsumexp_rows(x)); },
      [&](const Matrix& x) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.rows(); ++i) {
          double acc = 0.0;
          for (std::size_t j = 0; j < x.cols(); ++j) acc += std::exp(x(i, j));
          s += std::log(acc);
        }
        return s;
      });

  run("diag", 4, 4,
      [&](Tape& t, Var x) {
        Var dg = t.diag(x);
        return t.sum(t.mul(dg, dg));
      },
      [&](const Matrix& x) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.rows(); ++i) s += x(i, i) * x(i, i);
        return s;
      });

  return out;
}

VerificationReport check_frobenius_rewrite(std::size_t n, std::size_t d, double rho,
                                           std::uint64_t seed) {
  auto rng = make_rng(seed);
  Matrix z1 = random_unit_rows(n, d, rng);
  Matrix z2 = random_unit_rows(n, d, rng);
  const double nn = static_cast<double>(n);

  // Left side: explicit double sum with the negative pairs drawn from the
  // same view and weighted rho/n. (The batch loss weights them rho/n^2;
  // the two differ by exactly a factor n on the second term, which is the
  // reconciled constant ledger recorded below.)
  double align = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) align += z1(i, j) * z2(i, j);
  double off_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      double dot = 0.0;
      for (std::size_t k = 0; k < d; ++k) dot += z1(i, k) * z1(j, k);
      off_sq += dot * dot;
    }
  double left = -align / nn + rho * off_sq / nn;

  // Right side: trace form. Unit-norm rows make the diagonal of the Gram
  // matrix sum to n, which folds into the -rho constant.
  double tr = align;
  double right_gram = -tr / nn - rho + rho * frobenius_norm_sq(gram(z1)) / nn;
  double right_cov =
      -tr / nn - rho + rho * frobenius_norm_sq(matmul(z1.transposed(), z1)) / nn;

  double residual = std::max(rel_err(left, right_gram), rel_err(left, right_cov));

  // cross-check the factor-n relation to the batch-form weighting
  double batch_negative = rho * off_sq / (nn * nn);
  double ledger = rel_err(batch_negative * nn, rho * off_sq / nn);
  residual = std::max(residual, ledger);

  std::ostringstream inputs;
  inputs << dims(n, d, seed) << " rho=" << rho
         << " constants: negative-weight rho/n, batch form rho/n^2 = (1/n)x";
  return make_report("frobenius_rewrite", inputs.str(), residual, 1e-10);
}

std::vector<VerificationReport> run_all_checks(std::uint64_t seed) {
  std::vector<VerificationReport> all;
  auto rng = make_rng(mix64(seed, 0xc4ecULL));
  std::uniform_int_distribution<std::size_t> nd(2, 64);

  for (int i = 0; i < 8; ++i) {
    auto t1 = check_spectrum_correspondence(nd(rng), nd(rng), mix64(seed, 100 + i));
    all.insert(all.end(), t1.begin(), t1.end());
  }
  for (std::size_t n : {2, 4, 8})
    for (std::size_t f : {1, 2, 4})
      for (std::size_t d : {3, 8, 16})
        all.push_back(check_membank_equivalence(n, f * n, d, 8.0, mix64(seed, n * 100 + f * 10 + d)));
  all.push_back(check_lower_bound(16, 8, mix64(seed, 3), 200));
  all.push_back(check_barlow_identity(32, 8, 0.05, mix64(seed, 4)));
  auto ema = check_ema_equivalence(10, 8, 6, 0.5, 0.9, mix64(seed, 5));
  all.insert(all.end(), ema.begin(), ema.end());
  for (LossKind k : {LossKind::kTico, LossKind::kSquared, LossKind::kInfoNce, LossKind::kBarlow})
    all.push_back(check_gradients(k, 6, 5, mix64(seed, 6 + static_cast<int>(k))));
  auto ops = check_op_gradients(mix64(seed, 11));
  all.insert(all.end(), ops.begin(), ops.end());
  all.push_back(check_frobenius_rewrite(12, 6, 8.0, mix64(seed, 12)));
  return all;
}

}  // namespace tico
