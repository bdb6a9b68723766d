#include "tico/data.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include "tico/rng.hpp"

namespace tico {

void DatasetConfig::validate() const {
  if (num_classes < 2) throw std::invalid_argument("dataset: num_classes must be >= 2");
  if (dim < 8) throw std::invalid_argument("dataset: dim must be >= 8");
  if (samples_per_class < 1)
    throw std::invalid_argument("dataset: samples_per_class must be >= 1");
}

void AugmentationConfig::validate() const {
  for (double p : {mask_prob, flip_prob, jitter_prob, drop_prob, smooth_prob, reflect_prob})
    if (p < 0.0 || p > 1.0)
      throw std::invalid_argument("augmentation: probabilities must lie in [0,1]");
}

std::vector<Sample> generate_dataset(const DatasetConfig& cfg) {
  cfg.validate();
  auto rng = make_rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<std::vector<double>> centroids(cfg.num_classes);
  for (auto& c : centroids) {
    c.resize(cfg.dim);
    double norm_sq = 0.0;
    for (double& v : c) {
      v = normal(rng);
      norm_sq += v * v;
    }
    double scale = cfg.centroid_scale / std::max(std::sqrt(norm_sq), 1e-12);
    for (double& v : c) v *= scale;
  }

  std::vector<Sample> samples;
  samples.reserve(cfg.num_classes * cfg.samples_per_class);
  for (std::size_t cls = 0; cls < cfg.num_classes; ++cls) {
    for (std::size_t s = 0; s < cfg.samples_per_class; ++s) {
      Sample sample;
      sample.label = static_cast<int>(cls);
      sample.x.resize(cfg.dim);
      for (std::size_t j = 0; j < cfg.dim; ++j)
        sample.x[j] = centroids[cls][j] + cfg.within_class_noise * normal(rng);
      samples.push_back(std::move(sample));
    }
  }
  return samples;
}

AugmentationConfig pipeline_primary() { return AugmentationConfig{}; }

AugmentationConfig pipeline_secondary() {
  AugmentationConfig cfg;
  cfg.smooth_prob = 0.1;
  cfg.reflect_prob = 0.2;
  return cfg;
}

std::uint64_t view_seed(std::uint64_t run_seed, std::uint64_t epoch,
                        std::uint64_t sample_index, std::uint64_t view_index) {
  return mix64(mix64(mix64(run_seed, epoch), sample_index), view_index);
}

std::vector<double> augment(const std::vector<double>& x, const AugmentationConfig& cfg,
                            std::uint64_t sample_seed) {
  cfg.validate();
  const std::size_t dim = x.size();
  auto rng = make_rng(sample_seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> out = x;

  // contiguous-window masking; keeps at least half the coordinates
  if (uniform(rng) < cfg.mask_prob && dim >= 2) {
    std::uniform_int_distribution<std::size_t> len_dist(1, dim / 2);
    std::size_t len = len_dist(rng);
    std::uniform_int_distribution<std::size_t> start_dist(0, dim - len);
    std::size_t start = start_dist(rng);
    for (std::size_t j = start; j < start + len; ++j) out[j] = 0.0;
  }

  // sign flip of a contiguous span
  if (uniform(rng) < cfg.flip_prob && dim >= 2) {
    std::uniform_int_distribution<std::size_t> len_dist(1, dim / 2);
    std::size_t len = len_dist(rng);
    std::uniform_int_distribution<std::size_t> start_dist(0, dim - len);
    std::size_t start = start_dist(rng);
    for (std::size_t j = start; j < start + len; ++j) out[j] = -out[j];
  }

  // additive gaussian jitter
  if (uniform(rng) < cfg.jitter_prob) {
    for (double& v : out) v += cfg.jitter_scale * normal(rng);
  }

  // coordinate dropout, fixed 20% rate once gated
  if (uniform(rng) < cfg.drop_prob) {
    for (double& v : out)
      if (uniform(rng) < 0.2) v = 0.0;
  }

  // neighbor-averaging smoothing with replicated edges
  if (uniform(rng) < cfg.smooth_prob && dim >= 2) {
    std::vector<double> smoothed(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      double left = out[j == 0 ? 0 : j - 1];
      double right = out[j + 1 == dim ? dim - 1 : j + 1];
      smoothed[j] = 0.25 * left + 0.5 * out[j] + 0.25 * right;
    }
    out = std::move(smoothed);
  }

  // reflect values above the threshold
  if (uniform(rng) < cfg.reflect_prob) {
    for (double& v : out)
      if (v > cfg.reflect_threshold) v = 2.0 * cfg.reflect_threshold - v;
  }

  return out;
}

void save_dataset(const std::string& path, const DatasetConfig& cfg,
                  const std::vector<Sample>& samples) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f.precision(17);
  f << "tico-dataset 1\n";
  f << "num_classes " << cfg.num_classes << "\n";
  f << "dim " << cfg.dim << "\n";
  f << "samples_per_class " << cfg.samples_per_class << "\n";
  f << "centroid_scale " << cfg.centroid_scale << "\n";
  f << "within_class_noise " << cfg.within_class_noise << "\n";
  f << "seed " << cfg.seed << "\n";
  f << "count " << samples.size() << "\n";
  for (const auto& s : samples) {
    f << s.label;
    for (double v : s.x) f << ' ' << v;
    f << '\n';
  }
}

std::vector<Sample> load_dataset(const std::string& path, DatasetConfig* cfg_out) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::string magic;
  int version = 0;
  f >> magic >> version;
  if (magic != "tico-dataset" || version != 1)
    throw std::runtime_error(path + ": not a tico dataset file");
  DatasetConfig cfg;
  std::size_t count = 0;
  std::string key;
  while (f >> key) {
    if (key == "num_classes") f >> cfg.num_classes;
    else if (key == "dim") f >> cfg.dim;
    else if (key == "samples_per_class") f >> cfg.samples_per_class;
    else if (key == "centroid_scale") f >> cfg.centroid_scale;
    else if (key == "within_class_noise") f >> cfg.within_class_noise;
    else if (key == "seed") f >> cfg.seed;
    else if (key == "count") { f >> count; break; }
    else throw std::runtime_error(path + ": unknown header key '" + key + "'");
  }
  std::vector<Sample> samples(count);
  for (auto& s : samples) {
    f >> s.label;
    s.x.resize(cfg.dim);
    for (double& v : s.x) f >> v;
  }
  if (!f) throw std::runtime_error(path + ": truncated dataset body");
  if (cfg_out) *cfg_out = cfg;
  return samples;
}

Matrix samples_to_matrix(const std::vector<Sample>& samples) {
  if (samples.empty()) throw std::invalid_argument("samples_to_matrix: no samples");
  Matrix m(samples.size(), samples[0].x.size());
  for (std::size_t i = 0; i < samples.size(); ++i)
    for (std::size_t j = 0; j < samples[i].x.size(); ++j) m(i, j) = samples[i].x[j];
  return m;
}

}  // namespace tico
