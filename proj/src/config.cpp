#include "tico/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace tico {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument("config: " + key + " must be true/false, got '" + v + "'");
}

std::size_t parse_size(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    std::size_t out = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return out;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: " + key + " must be a non-negative integer, got '" +
                                v + "'");
  }
}

double parse_real(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    double out = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return out;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: " + key + " must be a number, got '" + v + "'");
  }
}

std::vector<std::size_t> parse_size_list(const std::string& v) {
  std::vector<std::size_t> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!trim(item).empty()) out.push_back(parse_size(trim(item), "arch.encoder_hidden_dims"));
  return out;
}

// stable shortest round-trip formatting for doubles
std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

KeyValues read_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config file " + path);
  KeyValues kv;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    std::string s = trim(line);
    auto hash = s.find('#');
    if (hash != std::string::npos) s = trim(s.substr(0, hash));
    if (s.empty()) continue;
    auto eq = s.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected key=value, got '" + s + "'");
    kv[trim(s.substr(0, eq))] = trim(s.substr(eq + 1));
  }
  return kv;
}

void apply_override(KeyValues& kv, const std::string& assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw std::invalid_argument("--set expects key=value, got '" + assignment + "'");
  kv[trim(assignment.substr(0, eq))] = trim(assignment.substr(eq + 1));
}

RunConfig parse_config(const KeyValues& kv) {
  RunConfig cfg;
  bool base_lr_set = false, final_lr_set = false, input_dim_set = false;

  for (const auto& [key, value] : kv) {
    if (key == "dataset.num_classes") cfg.dataset.num_classes = parse_size(value, key);
    else if (key == "dataset.dim") cfg.dataset.dim = parse_size(value, key);
    else if (key == "dataset.samples_per_class") cfg.dataset.samples_per_class = parse_size(value, key);
    else if (key == "dataset.centroid_scale") cfg.dataset.centroid_scale = parse_real(value, key);
    else if (key == "dataset.within_class_noise") cfg.dataset.within_class_noise = parse_real(value, key);
    else if (key == "dataset.seed") cfg.dataset.seed = parse_size(value, key);
    else if (key == "arch.input_dim") { cfg.arch.input_dim = parse_size(value, key); input_dim_set = true; }
    else if (key == "arch.encoder_hidden_dims") cfg.arch.encoder_hidden_dims = parse_size_list(value);
    else if (key == "arch.repr_dim") cfg.arch.repr_dim = parse_size(value, key);
    else if (key == "arch.projector_hidden_dim") cfg.arch.projector_hidden_dim = parse_size(value, key);
    else if (key == "arch.embed_dim") cfg.arch.embed_dim = parse_size(value, key);
    else if (key == "train.epochs") cfg.train.epochs = parse_size(value, key);
    else if (key == "train.batch_size") cfg.train.batch_size = parse_size(value, key);
    else if (key == "train.base_lr") { cfg.train.base_lr = parse_real(value, key); base_lr_set = true; }
    else if (key == "train.final_lr") { cfg.train.final_lr = parse_real(value, key); final_lr_set = true; }
    else if (key == "train.warmup_epochs") cfg.train.warmup_epochs = parse_size(value, key);
    else if (key == "train.weight_decay") cfg.train.weight_decay = parse_real(value, key);
    else if (key == "train.rho") cfg.train.rho = parse_real(value, key);
    else if (key == "train.beta") cfg.train.beta = parse_real(value, key);
    else if (key == "train.alpha_start") cfg.train.alpha_start = parse_real(value, key);
    else if (key == "train.alpha_end") cfg.train.alpha_end = parse_real(value, key);
    else if (key == "train.seed") cfg.train.seed = parse_size(value, key);
    else if (key == "train.covariance_source") {
      if (value == "online") cfg.train.covariance_source = CovarianceSource::kOnline;
      else if (value == "momentum") cfg.train.covariance_source = CovarianceSource::kMomentum;
      else throw std::invalid_argument("config: covariance_source must be online|momentum");
    }
    else if (key == "train.grad_through_covariance")
      cfg.train.grad_through_covariance = parse_bool(value, key);
    else if (key == "train.symmetrize") cfg.train.symmetrize = parse_bool(value, key);
    else if (key == "train.disable_augmentations")
      cfg.train.disable_augmentations = parse_bool(value, key);
    else if (key == "train.loss_kind") cfg.train.loss_kind = loss_kind_from_string(value);
    else if (key == "train.tau") cfg.train.loss.tau = parse_real(value, key);
    else if (key == "train.barlow_lambda") cfg.train.loss.barlow_lambda = parse_real(value, key);
    else if (key == "probe.epochs") cfg.probe.epochs = parse_size(value, key);
    else if (key == "probe.lr") cfg.probe.lr = parse_real(value, key);
    else if (key == "probe.momentum") cfg.probe.momentum = parse_real(value, key);
    else if (key == "probe.batch_size") cfg.probe.batch_size = parse_size(value, key);
    else if (key == "probe.seed") cfg.probe.seed = parse_size(value, key);
    else throw std::invalid_argument("config: unknown key '" + key + "'");
  }

  if (!input_dim_set) cfg.arch.input_dim = cfg.dataset.dim;
  if (!base_lr_set)
    cfg.train.base_lr = 0.2 * static_cast<double>(cfg.train.batch_size) / 256.0;
  if (!final_lr_set)
    cfg.train.final_lr = 0.002 * static_cast<double>(cfg.train.batch_size) / 256.0;
  cfg.train.loss.rho = cfg.train.rho;
  return cfg;
}

KeyValues config_snapshot(const RunConfig& cfg) {
  KeyValues kv;
  kv["dataset.num_classes"] = std::to_string(cfg.dataset.num_classes);
  kv["dataset.dim"] = std::to_string(cfg.dataset.dim);
  kv["dataset.samples_per_class"] = std::to_string(cfg.dataset.samples_per_class);
  kv["dataset.centroid_scale"] = fmt(cfg.dataset.centroid_scale);
  kv["dataset.within_class_noise"] = fmt(cfg.dataset.within_class_noise);
  kv["dataset.seed"] = std::to_string(cfg.dataset.seed);
  kv["arch.input_dim"] = std::to_string(cfg.arch.input_dim);
  std::string hidden;
  for (std::size_t h : cfg.arch.encoder_hidden_dims)
    hidden += (hidden.empty() ? "" : ",") + std::to_string(h);
  kv["arch.encoder_hidden_dims"] = hidden;
  kv["arch.repr_dim"] = std::to_string(cfg.arch.repr_dim);
  kv["arch.projector_hidden_dim"] = std::to_string(cfg.arch.projector_hidden_dim);
  kv["arch.embed_dim"] = std::to_string(cfg.arch.embed_dim);
  kv["train.epochs"] = std::to_string(cfg.train.epochs);
  kv["train.batch_size"] = std::to_string(cfg.train.batch_size);
  kv["train.base_lr"] = fmt(cfg.train.base_lr);
  kv["train.final_lr"] = fmt(cfg.train.final_lr);
  kv["train.warmup_epochs"] = std::to_string(cfg.train.warmup_epochs);
  kv["train.weight_decay"] = fmt(cfg.train.weight_decay);
  kv["train.rho"] = fmt(cfg.train.rho);
  kv["train.beta"] = fmt(cfg.train.beta);
  kv["train.alpha_start"] = fmt(cfg.train.alpha_start);
  kv["train.alpha_end"] = fmt(cfg.train.alpha_end);
  kv["train.seed"] = std::to_string(cfg.train.seed);
  kv["train.covariance_source"] =
      cfg.train.covariance_source == CovarianceSource::kOnline ? "online" : "momentum";
  kv["train.grad_through_covariance"] = cfg.train.grad_through_covariance ? "true" : "false";
  kv["train.symmetrize"] = cfg.train.symmetrize ? "true" : "false";
  kv["train.disable_augmentations"] = cfg.train.disable_augmentations ? "true" : "false";
  kv["train.loss_kind"] = to_string(cfg.train.loss_kind);
  kv["train.tau"] = fmt(cfg.train.loss.tau);
  kv["train.barlow_lambda"] = fmt(cfg.train.loss.barlow_lambda);
  kv["probe.epochs"] = std::to_string(cfg.probe.epochs);
  kv["probe.lr"] = fmt(cfg.probe.lr);
  kv["probe.momentum"] = fmt(cfg.probe.momentum);
  kv["probe.batch_size"] = std::to_string(cfg.probe.batch_size);
  kv["probe.seed"] = std::to_string(cfg.probe.seed);
  return kv;
}

void write_metrics(const std::string& dir, const std::vector<EpochMetrics>& log) {
  std::ofstream jsonl(dir + "/metrics.jsonl");
  std::ofstream csv(dir + "/metrics.csv");
  if (!jsonl || !csv) throw std::runtime_error("cannot write metrics under " + dir);
  csv << "epoch,loss,alignment,contrast,effective_rank_c,trace_c,lr,alpha\n";
  for (const auto& m : log) {
    nlohmann::json j;
    j["epoch"] = m.epoch;
    j["loss"] = m.loss;
    j["alignment"] = m.alignment;
    j["contrast"] = m.contrast;
    j["effective_rank_c"] = m.effective_rank_c;
    j["trace_c"] = m.trace_c;
    j["lr"] = m.lr;
    j["alpha"] = m.alpha;
    jsonl << j.dump() << "\n";
    csv << m.epoch << ',' << fmt(m.loss) << ',' << fmt(m.alignment) << ','
        << fmt(m.contrast) << ',' << fmt(m.effective_rank_c) << ',' << fmt(m.trace_c)
        << ',' << fmt(m.lr) << ',' << fmt(m.alpha) << "\n";
  }
}

void write_manifest(const std::string& dir, const KeyValues& snapshot,
                    double wall_seconds) {
  nlohmann::json j;
  j["config"] = snapshot;
  j["artifacts"] = {{"checkpoint", "checkpoint.bin"},
                    {"metrics_jsonl", "metrics.jsonl"},
                    {"metrics_csv", "metrics.csv"},
                    {"reports", "reports.jsonl"}};
  j["wall_seconds"] = wall_seconds;
  auto it = snapshot.find("train.seed");
  j["seed"] = it == snapshot.end() ? "" : it->second;
  std::ofstream f(dir + "/manifest.json");
  if (!f) throw std::runtime_error("cannot write manifest under " + dir);
  f << j.dump(2) << "\n";
}

}  // namespace tico
