#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tico/autodiff.hpp"
#include "tico/matrix.hpp"

namespace tico {

struct ArchitectureConfig {
  std::size_t input_dim = 64;
  std::vector<std::size_t> encoder_hidden_dims = {256, 128};
  std::size_t repr_dim = 64;
  std::size_t projector_hidden_dim = 128;
  std::size_t embed_dim = 32;

  void validate() const;
};

struct SliceSpec {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t offset = 0;
};

// Named parameter slices over one flat vector. The flat view is what the
// EMA and LARS arithmetic operate on.
class Parameters {
 public:
  std::size_t add_slice(const std::string& name, std::size_t rows, std::size_t cols);

  std::size_t num_slices() const { return slices_.size(); }
  const SliceSpec& spec(std::size_t i) const { return slices_[i]; }
  int index_of(const std::string& name) const;

  Matrix slice(std::size_t i) const;
  void set_slice(std::size_t i, const Matrix& m);

  std::vector<double>& flat() { return flat_; }
  const std::vector<double>& flat() const { return flat_; }

  bool same_layout(const Parameters& other) const;

 private:
  std::vector<SliceSpec> slices_;
  std::vector<double> flat_;
};

struct EncoderPair {
  Parameters online;    // theta
  Parameters momentum;  // xi
  ArchitectureConfig arch;
};

// Online parameters theta with momentum copy xi = theta at init.
// Weights are He-initialized, biases zero, batchnorm gamma 1 / shift 0.
EncoderPair init_encoder_pair(const ArchitectureConfig& arch, std::uint64_t seed);

struct TapeEmbedding {
  Var z;                        // n x embed_dim, unit-norm rows
  Var repr;                     // n x repr_dim, encoder output before projector
  std::vector<Var> param_vars;  // one per parameter slice, in slice order
};

// Records encoder + projector + row normalization on the tape. With
// track_gradients false the parameters enter as constants (momentum branch).
TapeEmbedding embed_on_tape(Tape& tape, const Parameters& params,
                            const ArchitectureConfig& arch, const Matrix& x,
                            bool track_gradients = true);

Matrix embed_numeric(const Parameters& params, const ArchitectureConfig& arch,
                     const Matrix& x);

// Encoder output only (the representation used for linear probing).
Matrix forward_numeric(const Parameters& params, const ArchitectureConfig& arch,
                       const Matrix& x);

// Parameter names eligible for LARS adaptation and weight decay.
bool adapted_parameter(const std::string& name);

}  // namespace tico
