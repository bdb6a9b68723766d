#pragma once

#include <string>

#include "tico/ema.hpp"
#include "tico/model.hpp"

namespace tico {

struct Checkpoint {
  ArchitectureConfig arch;
  Parameters online;
  Parameters momentum;
  CovarianceState cov;
};

// Binary container: magic, arch dims, named slices as raw doubles, then
// the covariance state. Round-trips bit-exactly.
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace tico
