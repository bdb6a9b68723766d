#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <numeric>

#include "tico/checkpoint.hpp"
#include "tico/ema.hpp"
#include "tico/model.hpp"
#include "tico/rng.hpp"

using namespace tico;

namespace {

ArchitectureConfig small_arch() {
  ArchitectureConfig a;
  a.input_dim = 8;
  a.encoder_hidden_dims = {16};
  a.repr_dim = 8;
  a.projector_hidden_dim = 12;
  a.embed_dim = 6;
  return a;
}

}  // namespace

TEST_CASE("initialization is deterministic in the seed") {
  auto arch = small_arch();
  EncoderPair a = init_encoder_pair(arch, 17);
  EncoderPair b = init_encoder_pair(arch, 17);
  EncoderPair c = init_encoder_pair(arch, 18);
  CHECK(a.online.flat() == b.online.flat());
  CHECK(a.online.flat() != c.online.flat());
}

TEST_CASE("momentum copy equals online at init") {
  EncoderPair pair = init_encoder_pair(small_arch(), 5);
  CHECK(pair.online.flat() == pair.momentum.flat());
  CHECK(pair.online.same_layout(pair.momentum));
}

TEST_CASE("weight init std matches sqrt(2/fan_in) within 20%") {
  ArchitectureConfig arch;
  arch.input_dim = 64;
  arch.encoder_hidden_dims = {256};
  arch.repr_dim = 64;
  arch.projector_hidden_dim = 128;
  arch.embed_dim = 32;
  EncoderPair pair = init_encoder_pair(arch, 9);

  int idx = pair.online.index_of("enc0_w");
  REQUIRE(idx >= 0);
  Matrix w = pair.online.slice(static_cast<std::size_t>(idx));
  REQUIRE(w.rows() == 64);  // fan_in x fan_out layout
  double sum = 0.0, sum_sq = 0.0;
  const std::size_t count = w.rows() * w.cols();
  for (std::size_t i = 0; i < w.rows(); ++i)
    for (std::size_t j = 0; j < w.cols(); ++j) {
      sum += w(i, j);
      sum_sq += w(i, j) * w(i, j);
    }
  double mean = sum / static_cast<double>(count);
  double std_dev = std::sqrt(sum_sq / static_cast<double>(count) - mean * mean);
  double expected = std::sqrt(2.0 / 64.0);
  CHECK(std::fabs(std_dev - expected) < 0.2 * expected);
}

TEST_CASE("biases start at zero, batchnorm scale at one") {
  EncoderPair pair = init_encoder_pair(small_arch(), 4);
  for (std::size_t s = 0; s < pair.online.num_slices(); ++s) {
    const auto& spec = pair.online.spec(s);
    Matrix m = pair.online.slice(s);
    if (spec.name.find("bias") != std::string::npos) CHECK(max_abs(m) == 0.0);
    if (spec.name.find("bn_gamma") != std::string::npos) {
      for (std::size_t j = 0; j < m.cols(); ++j) CHECK(m(0, j) == 1.0);
    }
    if (spec.name.find("bn_shift") != std::string::npos) CHECK(max_abs(m) == 0.0);
  }
}

TEST_CASE("embeddings have unit-norm rows") {
  auto arch = small_arch();
  EncoderPair pair = init_encoder_pair(arch, 11);
  auto rng = make_rng(12);
  Matrix x = random_matrix(10, arch.input_dim, rng);
  Matrix z = embed_numeric(pair.online, arch, x);
  REQUIRE(z.rows() == 10);
  REQUIRE(z.cols() == arch.embed_dim);
  for (std::size_t i = 0; i < z.rows(); ++i) {
    double norm = 0.0;
    for (std::size_t j = 0; j < z.cols(); ++j) norm += z(i, j) * z(i, j);
    CHECK(std::fabs(std::sqrt(norm) - 1.0) < 1e-12);
  }
}

TEST_CASE("tape and numeric forward agree") {
  auto arch = small_arch();
  EncoderPair pair = init_encoder_pair(arch, 21);
  auto rng = make_rng(22);
  Matrix x = random_matrix(6, arch.input_dim, rng);

  Tape tape;
  TapeEmbedding e = embed_on_tape(tape, pair.online, arch, x, true);
  Matrix z_numeric = embed_numeric(pair.online, arch, x);
  CHECK(max_abs(tape.value(e.z) - z_numeric) < 1e-14);
  Matrix repr_numeric = forward_numeric(pair.online, arch, x);
  CHECK(max_abs(tape.value(e.repr) - repr_numeric) < 1e-14);
}

TEST_CASE("identical parameters give identical embeddings on both branches") {
  auto arch = small_arch();
  EncoderPair pair = init_encoder_pair(arch, 30);
  auto rng = make_rng(31);
  Matrix x = random_matrix(5, arch.input_dim, rng);
  Matrix z_theta = embed_numeric(pair.online, arch, x);
  Matrix z_xi = embed_numeric(pair.momentum, arch, x);
  CHECK(max_abs(z_theta - z_xi) == 0.0);
}

TEST_CASE("single-row batch is rejected by batch normalization") {
  auto arch = small_arch();
  EncoderPair pair = init_encoder_pair(arch, 40);
  Matrix x(1, arch.input_dim, 0.5);
  CHECK_THROWS_AS(embed_numeric(pair.online, arch, x), std::invalid_argument);
}

TEST_CASE("embedding is equivariant under row permutation") {
  // batchnorm statistics are permutation invariant, so swapping input rows
  // must swap the output rows and change nothing else
  auto arch = small_arch();
  EncoderPair pair = init_encoder_pair(arch, 50);
  auto rng = make_rng(51);
  Matrix x = random_matrix(6, arch.input_dim, rng);
  Matrix xp = x;
  for (std::size_t j = 0; j < arch.input_dim; ++j) std::swap(xp(0, j), xp(4, j));

  Matrix z = embed_numeric(pair.online, arch, x);
  Matrix zp = embed_numeric(pair.momentum, arch, xp);
  for (std::size_t j = 0; j < arch.embed_dim; ++j) {
    CHECK(z(0, j) == doctest::Approx(zp(4, j)).epsilon(1e-14));
    CHECK(z(4, j) == doctest::Approx(zp(0, j)).epsilon(1e-14));
    CHECK(z(2, j) == doctest::Approx(zp(2, j)).epsilon(1e-14));
  }
}

TEST_CASE("adapted_parameter excludes biases and batchnorm slices") {
  CHECK(adapted_parameter("enc0_w"));
  CHECK(adapted_parameter("proj1_w"));
  CHECK_FALSE(adapted_parameter("enc0_bias"));
  CHECK_FALSE(adapted_parameter("proj_bn_gamma"));
  CHECK_FALSE(adapted_parameter("proj_bn_shift"));
}

TEST_CASE("config validation") {
  ArchitectureConfig bad = small_arch();
  bad.embed_dim = 1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  CHECK_NOTHROW(small_arch().validate());
}

TEST_CASE("checkpoint round-trips bit-exactly") {
  auto arch = small_arch();
  EncoderPair pair = init_encoder_pair(arch, 60);
  Checkpoint ckpt;
  ckpt.arch = arch;
  ckpt.online = pair.online;
  ckpt.momentum = pair.momentum;
  ckpt.cov = make_covariance_state(arch.embed_dim, 0.9);
  auto rng = make_rng(61);
  update_covariance(ckpt.cov, random_unit_rows(4, arch.embed_dim, rng));

  std::string path = "ckpt_roundtrip_test.bin";
  save_checkpoint(path, ckpt);
  Checkpoint back = load_checkpoint(path);
  std::remove(path.c_str());

  CHECK(back.arch.input_dim == arch.input_dim);
  CHECK(back.arch.encoder_hidden_dims == arch.encoder_hidden_dims);
  CHECK(back.arch.embed_dim == arch.embed_dim);
  CHECK(back.online.flat() == ckpt.online.flat());
  CHECK(back.momentum.flat() == ckpt.momentum.flat());
  CHECK(back.cov.beta == ckpt.cov.beta);
  CHECK(back.cov.step == ckpt.cov.step);
  CHECK(max_abs(back.cov.c - ckpt.cov.c) == 0.0);
  for (std::size_t s = 0; s < ckpt.online.num_slices(); ++s)
    CHECK(back.online.spec(s).name == ckpt.online.spec(s).name);
}
