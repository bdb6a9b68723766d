#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tico/data.hpp"
#include "tico/ema.hpp"
#include "tico/losses.hpp"
#include "tico/model.hpp"

namespace tico {

enum class LossKind { kTico, kInfoNce, kBarlow, kSquared };

LossKind loss_kind_from_string(const std::string& s);
std::string to_string(LossKind kind);

enum class CovarianceSource { kOnline, kMomentum };

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 64;
  double base_lr = 0.05;  // 0.2 * batch_size / 256 at the default batch size
  double final_lr = 0.0005;
  std::size_t warmup_epochs = 10;
  double weight_decay = 1.5e-6;
  double rho = 8.0;
  double beta = 0.9;
  double alpha_start = 0.99;
  double alpha_end = 1.0;
  std::uint64_t seed = 1;
  CovarianceSource covariance_source = CovarianceSource::kOnline;
  bool grad_through_covariance = false;
  bool symmetrize = false;
  bool disable_augmentations = false;  // ablation: both views become the raw input
  LossKind loss_kind = LossKind::kTico;
  LossConfig loss;

  void validate() const;
};

struct LarsConfig {
  double trust_coefficient = 0.001;
  double eps = 1e-9;
  double momentum = 0.9;
  std::function<bool(const std::string&)> adapted = adapted_parameter;
};

double lr_schedule(const TrainConfig& cfg, std::size_t step, std::size_t steps_per_epoch);
double alpha_schedule(const TrainConfig& cfg, std::size_t step, std::size_t total_steps);

struct LarsState {
  std::vector<double> velocity;  // flat, zero-initialized on first use
};

// One LARS update over the named slices. Gradients arrive in slice order.
void lars_step(Parameters& params, const std::vector<Matrix>& grads_by_slice,
               double lr, const LarsConfig& cfg, double weight_decay,
               LarsState& state);

struct EpochMetrics {
  std::size_t epoch = 0;
  double loss = 0.0;
  double alignment = 0.0;
  double contrast = 0.0;
  double effective_rank_c = 0.0;
  double trace_c = 0.0;
  double lr = 0.0;
  double alpha = 0.0;
};

struct TrainedModel {
  EncoderPair pair;
  CovarianceState cov;
  std::vector<EpochMetrics> log;
};

// Per-step hook for cross-check tests; called at the end of the step,
// after the optimizer and momentum updates. May be empty.
using StepObserver = std::function<void(std::size_t step, const Matrix& z1,
                                        const Matrix& z2, const CovarianceState& cov,
                                        double loss, const Parameters& online,
                                        const Parameters& momentum)>;

TrainedModel train(const TrainConfig& cfg, const ArchitectureConfig& arch,
                   const std::vector<Sample>& dataset,
                   const StepObserver& observer = {});

}  // namespace tico
