#include "tico/model.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "tico/rng.hpp"

namespace tico {

void ArchitectureConfig::validate() const {
  if (input_dim < 1 || repr_dim < 1 || projector_hidden_dim < 1)
    throw std::invalid_argument("architecture: all dims must be >= 1");
  for (std::size_t h : encoder_hidden_dims)
    if (h < 1) throw std::invalid_argument("architecture: hidden dims must be >= 1");
  if (embed_dim < 2)
    throw std::invalid_argument("architecture: embed_dim must be >= 2");
}

std::size_t Parameters::add_slice(const std::string& name, std::size_t rows,
                                  std::size_t cols) {
  SliceSpec s;
  s.name = name;
  s.rows = rows;
  s.cols = cols;
  s.offset = flat_.size();
  slices_.push_back(s);
  flat_.resize(flat_.size() + rows * cols, 0.0);
  return slices_.size() - 1;
}

int Parameters::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < slices_.size(); ++i)
    if (slices_[i].name == name) return static_cast<int>(i);
  return -1;
}

Matrix Parameters::slice(std::size_t i) const {
  const SliceSpec& s = slices_[i];
  Matrix m(s.rows, s.cols);
  std::copy(flat_.begin() + s.offset, flat_.begin() + s.offset + s.rows * s.cols,
            m.data().begin());
  return m;
}

void Parameters::set_slice(std::size_t i, const Matrix& m) {
  const SliceSpec& s = slices_[i];
  if (m.rows() != s.rows || m.cols() != s.cols)
    throw std::invalid_argument("set_slice: shape mismatch for " + s.name);
  std::copy(m.data().begin(), m.data().end(), flat_.begin() + s.offset);
}

bool Parameters::same_layout(const Parameters& other) const {
  if (slices_.size() != other.slices_.size()) return false;
  for (std::size_t i = 0; i < slices_.size(); ++i) {
    const SliceSpec& a = slices_[i];
    const SliceSpec& b = other.slices_[i];
    if (a.name != b.name || a.rows != b.rows || a.cols != b.cols) return false;
  }
  return true;
}

bool adapted_parameter(const std::string& name) {
  return name.find("bias") == std::string::npos &&
         name.find("bn_") == std::string::npos;
}

namespace {

Parameters build_layout(const ArchitectureConfig& arch) {
  Parameters p;
  std::size_t in = arch.input_dim;
  for (std::size_t l = 0; l < arch.encoder_hidden_dims.size(); ++l) {
    std::size_t out = arch.encoder_hidden_dims[l];
    p.add_slice("enc" + std::to_string(l) + "_w", in, out);
    p.add_slice("enc" + std::to_string(l) + "_bias", 1, out);
    in = out;
  }
  p.add_slice("enc_out_w", in, arch.repr_dim);
  p.add_slice("enc_out_bias", 1, arch.repr_dim);
  p.add_slice("proj0_w", arch.repr_dim, arch.projector_hidden_dim);
  p.add_slice("proj0_bias", 1, arch.projector_hidden_dim);
  p.add_slice("proj_bn_gamma", 1, arch.projector_hidden_dim);
  p.add_slice("proj_bn_shift", 1, arch.projector_hidden_dim);
  p.add_slice("proj1_w", arch.projector_hidden_dim, arch.embed_dim);
  p.add_slice("proj1_bias", 1, arch.embed_dim);
  return p;
}

}  // namespace

EncoderPair init_encoder_pair(const ArchitectureConfig& arch, std::uint64_t seed) {
  arch.validate();
  EncoderPair pair;
  pair.arch = arch;
  pair.online = build_layout(arch);

  auto rng = make_rng(seed);
  for (std::size_t i = 0; i < pair.online.num_slices(); ++i) {
    const SliceSpec& s = pair.online.spec(i);
    if (s.name.find("_w") != std::string::npos) {
      double std_dev = std::sqrt(2.0 / static_cast<double>(s.rows));
      pair.online.set_slice(i, random_matrix(s.rows, s.cols, rng, std_dev));
    } else if (s.name == "proj_bn_gamma") {
      pair.online.set_slice(i, Matrix(s.rows, s.cols, 1.0));
    }
    // biases and bn shift stay zero
  }
  pair.momentum = pair.online;
  return pair;
}

namespace {

struct Builder {
  Tape& tape;
  const Parameters& params;
  bool track;
  std::vector<Var> param_vars;

  Var param(int idx) { return param_vars[idx]; }

  Var linear(Var x, const std::string& w_name, const std::string& b_name) {
    Var w = param(must(w_name));
    Var b = param(must(b_name));
    Var ones = tape.constant(Matrix(x.rows, 1, 1.0));
    return tape.add(tape.matmul(x, w), tape.matmul(ones, b));
  }

  int must(const std::string& name) {
    int i = params.index_of(name);
    if (i < 0) throw std::logic_error("missing parameter slice " + name);
    return i;
  }
};

}  // namespace

TapeEmbedding embed_on_tape(Tape& tape, const Parameters& params,
                            const ArchitectureConfig& arch, const Matrix& x,
                            bool track_gradients) {
  if (x.cols() != arch.input_dim)
    throw std::invalid_argument("embed: input has " + std::to_string(x.cols()) +
                                " columns, architecture expects " +
                                std::to_string(arch.input_dim));

  Builder b{tape, params, track_gradients, {}};
  for (std::size_t i = 0; i < params.num_slices(); ++i) {
    Matrix m = params.slice(i);
    b.param_vars.push_back(track_gradients ? tape.parameter(std::move(m))
                                           : tape.constant(std::move(m)));
  }

  Var h = tape.constant(x);
  for (std::size_t l = 0; l < arch.encoder_hidden_dims.size(); ++l) {
    h = tape.relu(b.linear(h, "enc" + std::to_string(l) + "_w",
                           "enc" + std::to_string(l) + "_bias"));
  }
  Var repr = b.linear(h, "enc_out_w", "enc_out_bias");

  Var p = b.linear(repr, "proj0_w", "proj0_bias");
  p = tape.batchnorm(p, b.param(b.must("proj_bn_gamma")),
                     b.param(b.must("proj_bn_shift")));
  p = tape.relu(p);
  p = b.linear(p, "proj1_w", "proj1_bias");
  Var z = tape.row_normalize(p);

  return TapeEmbedding{z, repr, std::move(b.param_vars)};
}

Matrix embed_numeric(const Parameters& params, const ArchitectureConfig& arch,
                     const Matrix& x) {
  Tape tape;
  TapeEmbedding e = embed_on_tape(tape, params, arch, x, false);
  return tape.value(e.z);
}

Matrix forward_numeric(const Parameters& params, const ArchitectureConfig& arch,
                       const Matrix& x) {
  if (x.cols() != arch.input_dim)
    throw std::invalid_argument("forward: input has " + std::to_string(x.cols()) +
                                " columns, architecture expects " +
                                std::to_string(arch.input_dim));
  Matrix h = x;
  auto linear = [&](const Matrix& in, const std::string& w, const std::string& bias) {
    Matrix out = matmul(in, params.slice(params.index_of(w)));
    Matrix b = params.slice(params.index_of(bias));
    for (std::size_t i = 0; i < out.rows(); ++i)
      for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += b(0, j);
    return out;
  };
  for (std::size_t l = 0; l < arch.encoder_hidden_dims.size(); ++l) {
    h = linear(h, "enc" + std::to_string(l) + "_w", "enc" + std::to_string(l) + "_bias");
    for (double& v : h.data()) v = std::max(v, 0.0);
  }
  return linear(h, "enc_out_w", "enc_out_bias");
}

}  // namespace tico
