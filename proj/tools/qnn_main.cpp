#include <CLI11.hpp>
#include <omp.h>

#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>

#include "qnn/checkpoint.hpp"
#include "qnn/gradcheck.hpp"
#include "qnn/train.hpp"
#include "qnn/viz.hpp"

namespace {

std::vector<std::string> activation_names() {
  std::vector<std::string> out;
  for (auto k : qnn::kAllActivations) out.emplace_back(qnn::to_string(k));
  return out;
}

void add_common(CLI::App* cmd, qnn::TrainConfig& cfg) {
  cmd->add_option("--model", cfg.model, "qvgg-s, qvgg11 or qvgg16")->capture_default_str();
  cmd->add_option("--activation", cfg.activation)
      ->check(CLI::IsMember(activation_names()))
      ->capture_default_str();
  cmd->add_option("--angle", cfg.angle)->check(CLI::IsMember({"psi", "theta"}))->capture_default_str();
  cmd->add_option("--dataset", cfg.dataset)->check(CLI::IsMember({"cifar10", "svhn"}))->capture_default_str();
  cmd->add_option("--data-dir", cfg.data_dir, "CIFAR-10 batches or train.qimg/test.qimg");
  cmd->add_option("--dtype", cfg.dtype)->check(CLI::IsMember({"float32", "float64"}))->capture_default_str();
  cmd->add_option("--test-limit", cfg.test_limit, "use the first N test images (0 = all)");
}

int run_train(const qnn::TrainConfig& cfg) {
  qnn::run_training(cfg, &std::cerr);
  std::cerr << "metrics written to " << cfg.out << "\n";
  return 0;
}

template <std::floating_point T>
int run_eval_typed(const qnn::TrainConfig& cfg) {
  const auto data = qnn::load_dataset(cfg);
  qnn::Model<T> model(cfg.model_config(), *qnn::parse_activation(cfg.activation),
                      *qnn::parse_angle(cfg.angle), cfg.seed);
  qnn::load_checkpoint(cfg.checkpoint, model);
  const double acc = qnn::evaluate(model, data.test, cfg.eval_batch_size, cfg.backend);
  std::cout << std::fixed << std::setprecision(3) << acc << "\n";
  return 0;
}

int run_viz(const std::string& activation, const std::string& angle, const std::string& mode,
            const std::array<double, 2>& re, const std::array<double, 2>& im, std::size_t resolution,
            const std::array<double, 3>& direction, const std::string& out) {
  const auto grid_mode = *qnn::parse_grid_mode(mode);
  qnn::MeshSpec spec = grid_mode == qnn::GridMode::Value ? qnn::MeshSpec::value_defaults()
                                                         : qnn::MeshSpec::derivative_defaults();
  if (!std::isnan(re[0])) {
    spec.re_min = re[0];
    spec.re_max = re[1];
  }
  if (!std::isnan(im[0])) {
    spec.im_min = im[0];
    spec.im_max = im[1];
  }
  spec.resolution = resolution;
  spec.direction = direction;
  std::optional<qnn::ActivationKind> kind;
  if (activation != "identity") kind = *qnn::parse_activation(activation);
  const auto rows = qnn::emit_grid(kind, *qnn::parse_angle(angle), spec, grid_mode);
  if (out.empty() || out == "-") {
    qnn::write_grid_csv(std::cout, rows);
  } else {
    std::ofstream os(out);
    if (!os) throw std::runtime_error("cannot open " + out + " for writing");
    qnn::write_grid_csv(os, rows);
  }
  return 0;
}

int run_gradcheck(const std::string& activation, const std::string& angle, std::size_t samples,
                  std::uint64_t seed, double tolerance) {
  std::vector<qnn::ActivationKind> kinds;
  if (activation == "all") {
    kinds.assign(qnn::kAllActivations.begin(), qnn::kAllActivations.end());
  } else {
    kinds.push_back(*qnn::parse_activation(activation));
  }
  std::vector<qnn::AngleConvention> angles;
  if (angle == "all") {
    angles = {qnn::AngleConvention::Psi, qnn::AngleConvention::Theta};
  } else {
    angles.push_back(*qnn::parse_angle(angle));
  }
  bool ok = true;
  for (auto k : kinds) {
    for (auto a : angles) {
      for (const auto& r : {qnn::gradcheck_conv_model(k, a, seed, samples),
                            qnn::gradcheck_linear_model(k, a, seed, samples)}) {
        const bool pass = r.max_rel_error <= tolerance;
        ok = ok && pass;
        std::cout << (pass ? "PASS " : "FAIL ") << r.label << " checked=" << r.checked
                  << " max_rel=" << std::scientific << std::setprecision(3) << r.max_rel_error
                  << " max_abs=" << r.max_abs_error << std::defaultfloat << "\n";
      }
    }
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quaternion neural networks: training, evaluation, visualization, gradient checks"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "OpenMP threads (0 = runtime default)");

  qnn::TrainConfig train_cfg;
  std::size_t epochs = 0;
  double clip = 0;
  bool serial = false;
  auto* train = app.add_subcommand("train", "train a model and write per-epoch metrics");
  add_common(train, train_cfg);
  train->add_option("--epochs", epochs, "default 100 (cifar10) or 50 (svhn)");
  train->add_option("--batch-size", train_cfg.batch_size)->capture_default_str();
  train->add_option("--lr", train_cfg.lr)->capture_default_str();
  train->add_option("--lr-final", train_cfg.lr_final)->capture_default_str();
  auto* clip_opt = train->add_option("--clip-norm", clip, "global gradient-norm clip (default off)");
  train->add_option("--seed", train_cfg.seed)->capture_default_str();
  train->add_option("--runs", train_cfg.runs)->capture_default_str();
  train->add_option("--out", train_cfg.out, "metrics CSV")->capture_default_str();
  train->add_option("--checkpoint", train_cfg.checkpoint, "checkpoint path (default: --out with .qnn)");
  train->add_option("--train-limit", train_cfg.train_limit, "use the first N training images (0 = all)");
  train->add_flag("--serial", serial, "use the single-threaded reference kernels");

  qnn::TrainConfig eval_cfg;
  auto* eval = app.add_subcommand("eval", "report test accuracy of a checkpoint in percent");
  add_common(eval, eval_cfg);
  eval->add_option("--checkpoint", eval_cfg.checkpoint)->required();
  eval->add_option("--batch-size", eval_cfg.eval_batch_size)->capture_default_str();

  std::string viz_activation = "norm", viz_angle = "psi", viz_mode = "value", viz_out;
  std::array<double, 2> re_range{NAN, NAN}, im_range{NAN, NAN};
  std::array<double, 3> direction{1, 1, 1};
  std::size_t resolution = 101;
  auto* viz = app.add_subcommand("viz", "write meshgrid CSV (re, im, norm, phase)");
  auto names = activation_names();
  names.emplace_back("identity");
  viz->add_option("--activation", viz_activation)->check(CLI::IsMember(names))->capture_default_str();
  viz->add_option("--angle", viz_angle)->check(CLI::IsMember({"psi", "theta"}))->capture_default_str();
  viz->add_option("--mode", viz_mode)->check(CLI::IsMember({"value", "derivative"}))->capture_default_str();
  viz->add_option("--re-range", re_range, "min max");
  viz->add_option("--im-range", im_range, "min max (min >= 0)");
  viz->add_option("--resolution", resolution)->capture_default_str();
  viz->add_option("--direction", direction, "imaginary direction x y z");
  viz->add_option("--out", viz_out, "CSV path (default stdout)");

  std::string gc_activation = "all", gc_angle = "all";
  std::size_t gc_samples = 50;
  std::uint64_t gc_seed = 1;
  double gc_tol = 1e-6;
  auto* gradcheck = app.add_subcommand("gradcheck", "central-difference check of micro-model gradients");
  auto gc_names = activation_names();
  gc_names.emplace_back("all");
  gradcheck->add_option("--activation", gc_activation)->check(CLI::IsMember(gc_names))->capture_default_str();
  gradcheck->add_option("--angle", gc_angle)->check(CLI::IsMember({"psi", "theta", "all"}))->capture_default_str();
  gradcheck->add_option("--samples", gc_samples)->capture_default_str();
  gradcheck->add_option("--seed", gc_seed)->capture_default_str();
  gradcheck->add_option("--tolerance", gc_tol)->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  if (threads > 0) omp_set_num_threads(threads);

  try {
    if (*train) {
      if (epochs) train_cfg.epochs = epochs;
      if (*clip_opt) train_cfg.clip_norm = clip;
      if (serial) train_cfg.backend = qnn::Backend::Serial;
      return run_train(train_cfg);
    }
    if (*eval) {
      eval_cfg.validate();
      return eval_cfg.dtype == "float64" ? run_eval_typed<double>(eval_cfg)
                                         : run_eval_typed<float>(eval_cfg);
    }
    if (*viz) {
      return run_viz(viz_activation, viz_angle, viz_mode, re_range, im_range, resolution,
                     direction, viz_out);
    }
    if (*gradcheck) return run_gradcheck(gc_activation, gc_angle, gc_samples, gc_seed, gc_tol);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
