#include "tico/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

#include "tico/rng.hpp"

namespace tico {

void ProbeConfig::validate() const {
  if (lr <= 0.0) throw std::invalid_argument("probe config: lr must be positive");
  if (batch_size < 1) throw std::invalid_argument("probe config: batch_size must be >= 1");
}

ReprSet extract_representations(const Parameters& params, const ArchitectureConfig& arch,
                                const std::vector<Sample>& samples) {
  ReprSet out;
  out.reprs = forward_numeric(params, arch, samples_to_matrix(samples));
  out.labels.reserve(samples.size());
  for (const auto& s : samples) out.labels.push_back(s.label);
  return out;
}

double effective_rank(const Matrix& c) {
  if (c.rows() != c.cols())
    throw std::invalid_argument("effective_rank: matrix not square, " + c.shape_str());
  double scale = max_abs(c);
  for (std::size_t i = 0; i < c.rows(); ++i)
    for (std::size_t j = i + 1; j < c.cols(); ++j)
      if (std::fabs(c(i, j) - c(j, i)) > 1e-9 * std::max(scale, 1.0))
        throw std::invalid_argument("effective_rank: matrix not symmetric");
  // for symmetric C: sum lambda = tr(C), sum lambda^2 = ||C||_F^2
  double lam_sum = trace(c);
  double lam_sq_sum = frobenius_norm_sq(c);
  if (lam_sq_sum == 0.0) return 0.0;
  return lam_sum * lam_sum / lam_sq_sum;
}

double linear_probe(const ReprSet& data, const ProbeConfig& cfg) {
  cfg.validate();
  const std::size_t count = data.reprs.rows();
  if (count != data.labels.size())
    throw std::invalid_argument("linear_probe: label count mismatch");
  std::set<int> classes(data.labels.begin(), data.labels.end());
  if (classes.size() < 2)
    throw std::invalid_argument("linear_probe: need at least 2 classes");
  const std::size_t num_classes = static_cast<std::size_t>(*classes.rbegin()) + 1;
  const std::size_t dim = data.reprs.cols();

  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto rng = make_rng(mix64(cfg.seed, 0x90beULL));
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t train_count = (count * 8) / 10;
  if (train_count == 0 || train_count == count)
    throw std::invalid_argument("linear_probe: dataset too small for an 80/20 split");

  Matrix w(dim, num_classes);
  Matrix bias(1, num_classes);
  Matrix vw(dim, num_classes);
  Matrix vb(1, num_classes);

  std::vector<std::size_t> train(order.begin(), order.begin() + train_count);
  auto epoch_rng = make_rng(mix64(cfg.seed, 0x3b0cULL));

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(train.begin(), train.end(), epoch_rng);
    for (std::size_t start = 0; start < train.size(); start += cfg.batch_size) {
      std::size_t end = std::min(start + cfg.batch_size, train.size());
      double bn = static_cast<double>(end - start);
      Matrix gw(dim, num_classes);
      Matrix gb(1, num_classes);

      for (std::size_t t = start; t < end; ++t) {
        std::size_t i = train[t];
        std::vector<double> logits(num_classes);
        double mx = -1e300;
        for (std::size_t k = 0; k < num_classes; ++k) {
          double s = bias(0, k);
          for (std::size_t j = 0; j < dim; ++j) s += data.reprs(i, j) * w(j, k);
          logits[k] = s;
          mx = std::max(mx, s);
        }
        double denom = 0.0;
        for (double& s : logits) {
          s = std::exp(s - mx);
          denom += s;
        }
        for (std::size_t k = 0; k < num_classes; ++k) {
          double err = logits[k] / denom -
                       (static_cast<int>(k) == data.labels[i] ? 1.0 : 0.0);
          gb(0, k) += err / bn;
          for (std::size_t j = 0; j < dim; ++j)
            gw(j, k) += err * data.reprs(i, j) / bn;
        }
      }

      // Nesterov momentum update
      for (std::size_t k = 0; k < gw.size(); ++k) {
        double& v = vw.data()[k];
        v = cfg.momentum * v + gw.data()[k];
        w.data()[k] -= cfg.lr * (gw.data()[k] + cfg.momentum * v);
      }
      for (std::size_t k = 0; k < gb.size(); ++k) {
        double& v = vb.data()[k];
        v = cfg.momentum * v + gb.data()[k];
        bias.data()[k] -= cfg.lr * (gb.data()[k] + cfg.momentum * v);
      }
    }
  }

  std::size_t correct = 0;
  for (std::size_t t = train_count; t < count; ++t) {
    std::size_t i = order[t];
    std::size_t best = 0;
    double best_score = -1e300;
    for (std::size_t k = 0; k < num_classes; ++k) {
      double s = bias(0, k);
      for (std::size_t j = 0; j < dim; ++j) s += data.reprs(i, j) * w(j, k);
      if (s > best_score) {
        best_score = s;
        best = k;
      }
    }
    if (static_cast<int>(best) == data.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(count - train_count);
}

}  // namespace tico
