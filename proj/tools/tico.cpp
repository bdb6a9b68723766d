#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "tico/checkpoint.hpp"
#include "tico/config.hpp"
#include "tico/data.hpp"
#include "tico/eval.hpp"
#include "tico/trainer.hpp"
#include "tico/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRunFailure = 1;
constexpr int kExitConfigError = 2;

tico::RunConfig load_run_config(const std::string& config_path,
                                const std::vector<std::string>& overrides) {
  tico::KeyValues kv;
  if (!config_path.empty()) kv = tico::read_config_file(config_path);
  for (const auto& o : overrides) tico::apply_override(kv, o);
  return tico::parse_config(kv);
}

double dataset_effective_rank(const tico::TrainedModel& model,
                              const std::vector<tico::Sample>& dataset) {
  tico::Matrix z = tico::embed_numeric(model.pair.online, model.pair.arch,
                                       tico::samples_to_matrix(dataset));
  return tico::effective_rank(tico::covariance(z));
}

int run_train(const tico::RunConfig& cfg, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  auto t0 = std::chrono::steady_clock::now();

  auto dataset = tico::generate_dataset(cfg.dataset);
  tico::TrainedModel model = tico::train(cfg.train, cfg.arch, dataset);

  tico::Checkpoint ckpt{model.pair.arch, model.pair.online, model.pair.momentum,
                        model.cov};
  tico::save_checkpoint(out_dir + "/checkpoint.bin", ckpt);
  tico::write_metrics(out_dir, model.log);

  // every run self-verifies: the algebraic check battery is cheap
  std::ofstream reports(out_dir + "/reports.jsonl");
  bool checks_ok = true;
  for (const auto& r : tico::run_all_checks(cfg.train.seed)) {
    reports << tico::to_json_line(r) << "\n";
    checks_ok = checks_ok && r.pass;
  }

  double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  tico::write_manifest(out_dir, tico::config_snapshot(cfg), wall);

  const auto& last = model.log.back();
  std::cout << "final loss " << last.loss << ", effective rank of C "
            << last.effective_rank_c << "\n";
  if (!checks_ok) {
    std::cerr << "verification checks failed, see reports.jsonl\n";
    return kExitRunFailure;
  }
  return kExitOk;
}

int run_eval(const tico::RunConfig& cfg, const std::string& checkpoint_path,
             const std::string& out_dir) {
  tico::Checkpoint ckpt = tico::load_checkpoint(checkpoint_path);
  auto dataset = tico::generate_dataset(cfg.dataset);
  tico::ReprSet reprs = tico::extract_representations(ckpt.online, ckpt.arch, dataset);
  double acc = tico::linear_probe(reprs, cfg.probe);
  std::cout << "probe accuracy " << acc << "\n";
  if (!out_dir.empty()) {
    std::ofstream f(out_dir + "/metrics.jsonl", std::ios::app);
    f << "{\"probe_accuracy\":" << acc << "}\n";
  }
  return kExitOk;
}

int run_verify(std::uint64_t seed, const std::string& report_path) {
  auto reports = tico::run_all_checks(seed);
  std::ofstream file;
  if (!report_path.empty()) file.open(report_path);
  bool all_pass = true;
  for (const auto& r : reports) {
    std::string line = tico::to_json_line(r);
    std::cout << line << "\n";
    if (file) file << line << "\n";
    all_pass = all_pass && r.pass;
  }
  std::cout << (all_pass ? "all checks passed" : "CHECK FAILURES") << " ("
            << reports.size() << " checks)\n";
  return all_pass ? kExitOk : kExitRunFailure;
}

int run_ablate(const tico::RunConfig& base, const std::string& axis,
               const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::ofstream csv(out_dir + "/ablation.csv");
  csv << "axis,setting,final_loss,effective_rank,probe_accuracy\n";

  auto run_point = [&](const std::string& setting, tico::RunConfig cfg) {
    auto dataset = tico::generate_dataset(cfg.dataset);
    tico::TrainedModel model = tico::train(cfg.train, cfg.arch, dataset);
    double erank = dataset_effective_rank(model, dataset);
    tico::ReprSet reprs =
        tico::extract_representations(model.pair.online, model.pair.arch, dataset);
    double acc = tico::linear_probe(reprs, cfg.probe);
    csv << axis << ',' << setting << ',' << model.log.back().loss << ',' << erank
        << ',' << acc << "\n";
    std::cout << axis << "=" << setting << ": loss " << model.log.back().loss
              << ", effective rank " << erank << ", probe accuracy " << acc << "\n";
  };

  if (axis == "rho") {
    for (double rho : {0.0, 8.0}) {
      tico::RunConfig cfg = base;
      cfg.train.rho = rho;
      cfg.train.loss.rho = rho > 0.0 ? rho : cfg.train.loss.rho;
      run_point(std::to_string(rho), cfg);
    }
  } else if (axis == "batch_size") {
    for (std::size_t n : {std::size_t{8}, std::size_t{32}, std::size_t{128}}) {
      tico::RunConfig cfg = base;
      cfg.train.batch_size = n;
      cfg.train.base_lr = 0.2 * static_cast<double>(n) / 256.0;
      cfg.train.final_lr = 0.002 * static_cast<double>(n) / 256.0;
      run_point(std::to_string(n), cfg);
    }
  } else if (axis == "beta") {
    for (double beta : {0.5, 0.9, 0.99}) {
      tico::RunConfig cfg = base;
      cfg.train.beta = beta;
      run_point(std::to_string(beta), cfg);
    }
  } else if (axis == "augmentations") {
    run_point("baseline", base);
    tico::RunConfig cfg = base;
    cfg.train.disable_augmentations = true;
    run_point("all_off", cfg);
  } else {
    std::cerr << "unknown ablation axis '" << axis
              << "' (expected rho|batch_size|beta|augmentations)\n";
    return kExitConfigError;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TiCo self-supervised training, evaluation and verification"};
  app.require_subcommand(1);

  std::string config_path, out_dir, checkpoint_path, axis, report_path;
  std::vector<std::string> overrides;
  std::uint64_t seed = 1;

  auto* train_cmd = app.add_subcommand("train", "pretrain an encoder pair");
  train_cmd->add_option("--config", config_path, "key=value config file");
  train_cmd->add_option("--set", overrides, "override, repeatable: key=value");
  train_cmd->add_option("--out", out_dir, "output directory")->required();

  auto* eval_cmd = app.add_subcommand("eval", "linear-probe a checkpoint");
  eval_cmd->add_option("--config", config_path, "key=value config file");
  eval_cmd->add_option("--set", overrides, "override, repeatable: key=value");
  eval_cmd->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();
  eval_cmd->add_option("--out", out_dir, "run directory to append metrics to");

  auto* verify_cmd = app.add_subcommand("verify", "run the algebraic check suite");
  verify_cmd->add_option("--seed", seed, "seed for all checks");
  verify_cmd->add_option("--report", report_path, "write JSON-lines reports here");

  auto* ablate_cmd = app.add_subcommand("ablate", "sweep one config axis");
  ablate_cmd->add_option("--config", config_path, "key=value config file");
  ablate_cmd->add_option("--set", overrides, "override, repeatable: key=value");
  ablate_cmd->add_option("--axis", axis, "rho|batch_size|beta|augmentations")->required();
  ablate_cmd->add_option("--out", out_dir, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (train_cmd->parsed()) return run_train(load_run_config(config_path, overrides), out_dir);
    if (eval_cmd->parsed())
      return run_eval(load_run_config(config_path, overrides), checkpoint_path, out_dir);
    if (verify_cmd->parsed()) return run_verify(seed, report_path);
    if (ablate_cmd->parsed())
      return run_ablate(load_run_config(config_path, overrides), axis, out_dir);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRunFailure;
  }
  return kExitConfigError;
}
