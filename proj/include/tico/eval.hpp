#pragma once

#include <cstdint>
#include <vector>

#include "tico/data.hpp"
#include "tico/matrix.hpp"
#include "tico/model.hpp"

namespace tico {

struct ProbeConfig {
  std::size_t epochs = 50;
  double lr = 0.4;
  double momentum = 0.9;  // Nesterov
  std::size_t batch_size = 64;
  std::uint64_t seed = 7;

  void validate() const;
};

struct ReprSet {
  Matrix reprs;             // one row per sample
  std::vector<int> labels;
};

// Encoder output (before the projector) for every sample.
ReprSet extract_representations(const Parameters& params, const ArchitectureConfig& arch,
                                const std::vector<Sample>& samples);

// Multinomial logistic regression, SGD with Nesterov momentum, trained on a
// deterministic 80/20 split; returns held-out accuracy.
double linear_probe(const ReprSet& data, const ProbeConfig& cfg);

// (sum lambda)^2 / sum lambda^2 for a symmetric PSD matrix; 0 for the zero
// matrix. Equals the dimension iff the spectrum is flat.
double effective_rank(const Matrix& c);

}  // namespace tico
