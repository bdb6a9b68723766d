#pragma once

#include <map>
#include <string>

#include "tico/data.hpp"
#include "tico/eval.hpp"
#include "tico/model.hpp"
#include "tico/trainer.hpp"

namespace tico {

struct RunConfig {
  DatasetConfig dataset;
  ArchitectureConfig arch;
  TrainConfig train;
  ProbeConfig probe;
};

using KeyValues = std::map<std::string, std::string>;

// Flat key=value file; '#' starts a comment. Unknown keys are a hard error
// at parse_config time.
KeyValues read_config_file(const std::string& path);

// "key=value" from a --set flag.
void apply_override(KeyValues& kv, const std::string& assignment);

// Applies kv on top of the defaults. arch.input_dim follows dataset.dim
// unless set explicitly; learning rates follow the 0.2 x batch/256 rule
// unless set explicitly.
RunConfig parse_config(const KeyValues& kv);

// The full effective key set of a run, suitable for a manifest.
KeyValues config_snapshot(const RunConfig& cfg);

void write_metrics(const std::string& dir, const std::vector<EpochMetrics>& log);
void write_manifest(const std::string& dir, const KeyValues& snapshot,
                    double wall_seconds);

}  // namespace tico
