#include "tico/checkpoint.hpp"

#include <cstdint>
#include <fstream>
#include <stdexcept>

namespace tico {

namespace {

constexpr char kMagic[8] = {'T', 'I', 'C', 'O', 'C', 'K', 'P', '1'};

void write_u64(std::ostream& os, std::uint64_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint64_t read_u64(std::istream& is) {
  std::uint64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

void write_f64(std::ostream& os, double v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

double read_f64(std::istream& is) {
  double v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

void write_string(std::ostream& os, const std::string& s) {
  write_u64(os, s.size());
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& is) {
  std::string s(read_u64(is), '\0');
  is.read(s.data(), static_cast<std::streamsize>(s.size()));
  return s;
}

void write_params(std::ostream& os, const Parameters& p) {
  write_u64(os, p.num_slices());
  for (std::size_t i = 0; i < p.num_slices(); ++i) {
    const SliceSpec& s = p.spec(i);
    write_string(os, s.name);
    write_u64(os, s.rows);
    write_u64(os, s.cols);
  }
  os.write(reinterpret_cast<const char*>(p.flat().data()),
           static_cast<std::streamsize>(p.flat().size() * sizeof(double)));
}

Parameters read_params(std::istream& is) {
  Parameters p;
  std::uint64_t count = read_u64(is);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::string name = read_string(is);
    std::uint64_t rows = read_u64(is);
    std::uint64_t cols = read_u64(is);
    p.add_slice(name, rows, cols);
  }
  is.read(reinterpret_cast<char*>(p.flat().data()),
          static_cast<std::streamsize>(p.flat().size() * sizeof(double)));
  return p;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os.write(kMagic, sizeof(kMagic));

  write_u64(os, ckpt.arch.input_dim);
  write_u64(os, ckpt.arch.encoder_hidden_dims.size());
  for (std::size_t h : ckpt.arch.encoder_hidden_dims) write_u64(os, h);
  write_u64(os, ckpt.arch.repr_dim);
  write_u64(os, ckpt.arch.projector_hidden_dim);
  write_u64(os, ckpt.arch.embed_dim);

  write_params(os, ckpt.online);
  write_params(os, ckpt.momentum);

  write_f64(os, ckpt.cov.beta);
  write_u64(os, ckpt.cov.step);
  write_u64(os, ckpt.cov.c.rows());
  for (double v : ckpt.cov.c.data()) write_f64(os, v);

  if (!os) throw std::runtime_error("write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || !std::equal(magic, magic + 8, kMagic))
    throw std::runtime_error(path + ": not a tico checkpoint");

  Checkpoint ckpt;
  ckpt.arch.input_dim = read_u64(is);
  std::uint64_t hidden = read_u64(is);
  ckpt.arch.encoder_hidden_dims.resize(hidden);
  for (auto& h : ckpt.arch.encoder_hidden_dims) h = read_u64(is);
  ckpt.arch.repr_dim = read_u64(is);
  ckpt.arch.projector_hidden_dim = read_u64(is);
  ckpt.arch.embed_dim = read_u64(is);

  ckpt.online = read_params(is);
  ckpt.momentum = read_params(is);

  ckpt.cov.beta = read_f64(is);
  ckpt.cov.step = read_u64(is);
  std::uint64_t dim = read_u64(is);
  ckpt.cov.c = Matrix(dim, dim);
  for (double& v : ckpt.cov.c.data()) v = read_f64(is);

  if (!is) throw std::runtime_error(path + ": truncated checkpoint");
  return ckpt;
}

}  // namespace tico
