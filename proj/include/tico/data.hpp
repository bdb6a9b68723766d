#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tico/matrix.hpp"

namespace tico {

struct DatasetConfig {
  std::size_t num_classes = 8;
  std::size_t dim = 64;
  std::size_t samples_per_class = 64;
  double centroid_scale = 4.0;
  double within_class_noise = 1.0;
  std::uint64_t seed = 1;

  void validate() const;
};

struct Sample {
  std::vector<double> x;
  int label = 0;
};

// Class centroids drawn on the unit sphere and scaled; samples are
// centroid + isotropic gaussian noise. Deterministic given the seed.
std::vector<Sample> generate_dataset(const DatasetConfig& cfg);

// 1-D analogs of the image augmentation pipeline, in fixed order:
// contiguous-window zeroing (crop), contiguous sign flip (horizontal
// flip), additive gaussian jitter (color jitter), coordinate dropout
// (grayscale), [0.25 0.5 0.25] smoothing (blur), reflect-above-threshold
// (solarization).
struct AugmentationConfig {
  double mask_prob = 1.0;
  double flip_prob = 0.5;
  double jitter_prob = 0.8;
  double jitter_scale = 0.4;
  double drop_prob = 0.2;
  double smooth_prob = 1.0;
  double reflect_prob = 0.0;
  double reflect_threshold = 1.0;

  void validate() const;
};

// The two pipelines differ only in smoothing and reflection probability,
// mirroring the T / T' asymmetry of the BYOL-style parameter table.
AugmentationConfig pipeline_primary();    // T:  smooth 1.0, reflect 0.0
AugmentationConfig pipeline_secondary();  // T': smooth 0.1, reflect 0.2

// Counter-based per-sample seed so augmentation is reproducible
// regardless of iteration order or parallelism.
std::uint64_t view_seed(std::uint64_t run_seed, std::uint64_t epoch,
                        std::uint64_t sample_index, std::uint64_t view_index);

std::vector<double> augment(const std::vector<double>& x, const AugmentationConfig& cfg,
                            std::uint64_t sample_seed);

// Flat-file export: textual header (dims, counts, seed) then one row per
// sample with the label first.
void save_dataset(const std::string& path, const DatasetConfig& cfg,
                  const std::vector<Sample>& samples);
std::vector<Sample> load_dataset(const std::string& path, DatasetConfig* cfg_out = nullptr);

Matrix samples_to_matrix(const std::vector<Sample>& samples);

}  // namespace tico
