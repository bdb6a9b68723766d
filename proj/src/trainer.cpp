#include "tico/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "tico/eval.hpp"
#include "tico/rng.hpp"

namespace tico {

LossKind loss_kind_from_string(const std::string& s) {
  if (s == "tico") return LossKind::kTico;
  if (s == "infonce") return LossKind::kInfoNce;
  if (s == "barlow") return LossKind::kBarlow;
  if (s == "squared") return LossKind::kSquared;
  throw std::invalid_argument("unknown loss kind '" + s + "'");
}

std::string to_string(LossKind kind) {
  switch (kind) {
    case LossKind::kTico: return "tico";
    case LossKind::kInfoNce: return "infonce";
    case LossKind::kBarlow: return "barlow";
    case LossKind::kSquared: return "squared";
  }
  return "?";
}

void TrainConfig::validate() const {
  if (warmup_epochs >= epochs)
    throw std::invalid_argument("train config: warmup_epochs must be < epochs");
  if (batch_size < 2) throw std::invalid_argument("train config: batch_size must be >= 2");
  if (rho < 0.0) throw std::invalid_argument("train config: rho must be >= 0");
  if (beta < 0.0 || beta > 1.0)
    throw std::invalid_argument("train config: beta outside [0,1]");
  if (alpha_start < 0.0 || alpha_start > 1.0 || alpha_end < 0.0 || alpha_end > 1.0)
    throw std::invalid_argument("train config: alpha outside [0,1]");
}

double lr_schedule(const TrainConfig& cfg, std::size_t step, std::size_t steps_per_epoch) {
  const std::size_t total = cfg.epochs * steps_per_epoch;
  const std::size_t warmup = cfg.warmup_epochs * steps_per_epoch;
  if (warmup > 0 && step < warmup)
    return cfg.base_lr * static_cast<double>(step) / static_cast<double>(warmup);
  if (total <= warmup + 1) return cfg.base_lr;
  double progress = static_cast<double>(step - warmup) /
                    static_cast<double>(total - 1 - warmup);
  progress = std::clamp(progress, 0.0, 1.0);
  return cfg.final_lr +
         0.5 * (cfg.base_lr - cfg.final_lr) * (1.0 + std::cos(M_PI * progress));
}

double alpha_schedule(const TrainConfig& cfg, std::size_t step, std::size_t total_steps) {
  const double om_start = 1.0 - cfg.alpha_start;
  const double om_end = 1.0 - cfg.alpha_end;
  double progress = total_steps > 1
                        ? static_cast<double>(step) / static_cast<double>(total_steps - 1)
                        : 1.0;
  progress = std::clamp(progress, 0.0, 1.0);
  double one_minus = om_end + (om_start - om_end) * 0.5 * (1.0 + std::cos(M_PI * progress));
  return 1.0 - one_minus;
}

void lars_step(Parameters& params, const std::vector<Matrix>& grads_by_slice,
               double lr, const LarsConfig& cfg, double weight_decay,
               LarsState& state) {
  if (grads_by_slice.size() != params.num_slices())
    throw std::invalid_argument("lars_step: expected one gradient per slice");
  if (state.velocity.empty()) state.velocity.assign(params.flat().size(), 0.0);

  for (std::size_t s = 0; s < params.num_slices(); ++s) {
    const SliceSpec& spec = params.spec(s);
    const Matrix& g = grads_by_slice[s];
    if (g.rows() != spec.rows || g.cols() != spec.cols)
      throw std::invalid_argument("lars_step: gradient shape mismatch for " + spec.name);
    if (!all_finite(g))
      throw std::runtime_error("lars_step: non-finite gradient in slice " + spec.name);

    double* w = params.flat().data() + spec.offset;
    double* v = state.velocity.data() + spec.offset;
    const double* gd = g.data().data();
    const std::size_t len = spec.rows * spec.cols;

    if (cfg.adapted(spec.name)) {
      double w_norm = 0.0, g_norm = 0.0;
      for (std::size_t k = 0; k < len; ++k) {
        w_norm += w[k] * w[k];
        g_norm += gd[k] * gd[k];
      }
      w_norm = std::sqrt(w_norm);
      g_norm = std::sqrt(g_norm);
      double local_lr = cfg.trust_coefficient * w_norm /
                        (g_norm + weight_decay * w_norm + cfg.eps);
      for (std::size_t k = 0; k < len; ++k) {
        double update = lr * local_lr * (gd[k] + weight_decay * w[k]);
        v[k] = cfg.momentum * v[k] + update;
        w[k] -= v[k];
      }
    } else {
      for (std::size_t k = 0; k < len; ++k) {
        double update = lr * gd[k];
        v[k] = cfg.momentum * v[k] + update;
        w[k] -= v[k];
      }
    }
  }
}

namespace {

struct StepLoss {
  Var loss;
  std::vector<std::vector<Var>> online_param_sets;
};

Var build_loss(Tape& tape, const TrainConfig& cfg, Var z1, const Matrix& z2,
               const Matrix& c_prev, const Matrix& c_now) {
  switch (cfg.loss_kind) {
    case LossKind::kTico:
      if (cfg.grad_through_covariance) {
        const double n = static_cast<double>(z1.rows);
        Var b = tape.scalar_mul(tape.matmul(tape.transpose(z1), z1), (1.0 - cfg.beta) / n);
        Var c = tape.add(tape.constant(c_prev * cfg.beta), b);
        return tico_loss_tape(tape, z1, z2, c, cfg.rho);
      }
      return tico_loss_tape(tape, z1, z2, c_now, cfg.rho);
    case LossKind::kSquared:
      return squared_loss_tape(tape, z1, z2, cfg.rho);
    case LossKind::kInfoNce:
      return infonce_loss_tape(tape, z1, z2, cfg.loss.tau);
    case LossKind::kBarlow:
      return barlow_loss_tape(tape, z1, z2, cfg.loss.barlow_lambda);
  }
  throw std::logic_error("unreachable loss kind");
}

}  // namespace

TrainedModel train(const TrainConfig& cfg, const ArchitectureConfig& arch,
                   const std::vector<Sample>& dataset, const StepObserver& observer) {
  cfg.validate();
  arch.validate();
  if (dataset.size() < cfg.batch_size)
    throw std::invalid_argument("train: dataset smaller than one batch");

  TrainedModel model;
  model.pair = init_encoder_pair(arch, cfg.seed);
  MomentumState mom{cfg.alpha_start, model.pair.momentum};
  model.cov = make_covariance_state(arch.embed_dim, cfg.beta);

  const std::size_t spe = dataset.size() / cfg.batch_size;  // last partial batch dropped
  const std::size_t total_steps = cfg.epochs * spe;
  const std::size_t n = cfg.batch_size;

  LarsConfig lars;
  LarsState lars_state;
  AugmentationConfig aug1 = pipeline_primary();
  AugmentationConfig aug2 = pipeline_secondary();
  if (cfg.disable_augmentations) {
    aug1 = AugmentationConfig{};
    aug1.mask_prob = aug1.flip_prob = aug1.jitter_prob = 0.0;
    aug1.drop_prob = aug1.smooth_prob = aug1.reflect_prob = 0.0;
    aug2 = aug1;
  }

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    auto shuffle_rng = make_rng(mix64(cfg.seed, 0xe90c5ULL + epoch));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double ep_loss = 0.0, ep_align = 0.0, ep_contrast = 0.0;
    double lr = 0.0, alpha = mom.alpha;

    for (std::size_t b = 0; b < spe; ++b, ++step) {
      Matrix x1(n, arch.input_dim), x2(n, arch.input_dim);
      for (std::size_t i = 0; i < n; ++i) {
        std::size_t idx = order[b * n + i];
        auto v1 = augment(dataset[idx].x, aug1, view_seed(cfg.seed, epoch, idx, 1));
        auto v2 = augment(dataset[idx].x, aug2, view_seed(cfg.seed, epoch, idx, 2));
        for (std::size_t j = 0; j < arch.input_dim; ++j) {
          x1(i, j) = v1[j];
          x2(i, j) = v2[j];
        }
      }

      Tape tape;
      TapeEmbedding e1 = embed_on_tape(tape, model.pair.online, arch, x1, true);
      // copy: later tape growth can reallocate the node storage
      Matrix z1 = tape.value(e1.z);
      Matrix z2 = embed_numeric(mom.xi, arch, x2);

      const Matrix c_prev = model.cov.c;
      update_covariance(model.cov,
                        cfg.covariance_source == CovarianceSource::kOnline ? z1 : z2);

      Var loss = build_loss(tape, cfg, e1.z, z2, c_prev, model.cov.c);
      std::vector<std::vector<Var>> param_sets{e1.param_vars};

      if (cfg.symmetrize) {
        TapeEmbedding e1b = embed_on_tape(tape, model.pair.online, arch, x2, true);
        Matrix z2b = embed_numeric(mom.xi, arch, x1);
        Var loss_b = build_loss(tape, cfg, e1b.z, z2b, c_prev, model.cov.c);
        loss = tape.scalar_mul(tape.add(loss, loss_b), 0.5);
        param_sets.push_back(e1b.param_vars);
      }

      const double loss_value = tape.value(loss)(0, 0);
      TicoLossValue components = tico_loss_value(z1, z2, model.cov.c, cfg.rho);
      if (!std::isfinite(loss_value)) {
        std::ostringstream dump;
        dump << "train: non-finite loss at step " << step
             << " (alignment=" << components.alignment
             << ", contrast=" << components.contrast
             << ", trace(C)=" << trace(model.cov.c) << ", lr=" << lr << ")";
        throw std::runtime_error(dump.str());
      }

      auto grads = tape.backward(loss);
      std::vector<Matrix> grads_by_slice;
      grads_by_slice.reserve(model.pair.online.num_slices());
      for (std::size_t s = 0; s < model.pair.online.num_slices(); ++s) {
        Matrix g = grads.at(param_sets[0][s].index);
        for (std::size_t set = 1; set < param_sets.size(); ++set)
          g += grads.at(param_sets[set][s].index);
        grads_by_slice.push_back(std::move(g));
      }

      lr = lr_schedule(cfg, step, spe);
      lars_step(model.pair.online, grads_by_slice, lr, lars, cfg.weight_decay, lars_state);

      alpha = alpha_schedule(cfg, step, total_steps);
      mom.alpha = alpha;
      update_momentum(mom, model.pair.online);

      if (observer)
        observer(step, z1, z2, model.cov, loss_value, model.pair.online, mom.xi);

      ep_loss += loss_value;
      ep_align += components.alignment;
      ep_contrast += components.contrast;
    }

    EpochMetrics m;
    m.epoch = epoch;
    m.loss = ep_loss / static_cast<double>(spe);
    m.alignment = ep_align / static_cast<double>(spe);
    m.contrast = ep_contrast / static_cast<double>(spe);
    m.effective_rank_c = effective_rank(model.cov.c);
    m.trace_c = trace(model.cov.c);
    m.lr = lr;
    m.alpha = alpha;
    model.log.push_back(m);
  }

  model.pair.momentum = mom.xi;
  return model;
}

}  // namespace tico
