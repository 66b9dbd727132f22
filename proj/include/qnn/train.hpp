#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qnn/dataset.hpp"
#include "qnn/model.hpp"

namespace qnn {

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.99;
inline constexpr double kAdamEpsilon = 1e-8;

struct TrainConfig {
  std::string model = "qvgg-s";
  /// Overrides `model` when set.
  std::optional<ModelConfig> custom_model;
  std::string activation = "phase-sin";
  std::string angle = "psi";
  std::string dataset = "cifar10";
  std::filesystem::path data_dir;
  /// 100 for cifar10 and 50 for svhn when unset.
  std::optional<std::size_t> epochs;
  std::size_t batch_size = 256;
  double lr = 1e-3;
  double lr_final = 1e-4;
  /// Unset: off, except 10 for qvgg11 / qvgg16 on svhn.
  std::optional<double> clip_norm;
  std::uint64_t seed = 0;
  std::size_t runs = 1;
  std::string dtype = "float32";
  /// Use only the first N train / test records (0 = all).
  std::size_t train_limit = 0;
  std::size_t test_limit = 0;
  std::size_t eval_batch_size = 256;
  std::filesystem::path out = "metrics.csv";
  /// Defaults to `out` with extension .qnn.
  std::filesystem::path checkpoint;
  Backend backend = Backend::Parallel;

  ModelConfig model_config() const;
  std::size_t resolved_epochs() const;
  std::optional<double> resolved_clip_norm() const;
  std::filesystem::path checkpoint_path(std::size_t run) const;
  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
};

struct EpochMetrics {
  std::size_t run = 0;
  std::size_t epoch = 0;
  double train_loss = 0;
  double train_acc = 0;
  double test_acc = 0;
  double lr = 0;
  double wall_seconds = 0;
};

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Learning rate used during 0-based epoch e: lr * r^e, r = (lr_final / lr)^(1 / epochs).
double scheduled_lr(double lr, double lr_final, std::size_t epochs, std::size_t epoch);

/// Seeded permutation of 0..n-1 for one epoch of one run.
std::vector<std::size_t> epoch_permutation(std::size_t n, std::uint64_t seed, std::size_t run,
                                           std::size_t epoch);

/// Scales all gradients by max_norm / norm when the global L2 norm exceeds
/// max_norm. Returns the norm before clipping.
template <std::floating_point T>
double clip_global_norm(const std::vector<Tensor<T>*>& grads, double max_norm);

template <std::floating_point T>
class Adam {
 public:
  explicit Adam(double lr, double beta1 = kAdamBeta1, double beta2 = kAdamBeta2,
                double eps = kAdamEpsilon)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void set_lr(double lr) { lr_ = lr; }
  double lr() const { return lr_; }
  std::size_t steps() const { return t_; }

  void step(const std::vector<Tensor<T>*>& params, const std::vector<const Tensor<T>*>& grads);

 private:
  double lr_, beta1_, beta2_, eps_;
  std::size_t t_ = 0;
  std::vector<std::vector<T>> m_, v_;
};

/// Top-1 accuracy in percent.
template <std::floating_point T>
double evaluate(const Model<T>& model, const DatasetHandle& data, std::size_t batch_size = 256,
                Backend backend = Backend::Parallel);

/// Trains one run in memory, calling on_epoch after each epoch.
template <std::floating_point T>
std::vector<EpochMetrics> train_model(Model<T>& model, const TrainConfig& config,
                                      const DatasetHandle& train, const DatasetHandle& test,
                                      std::size_t run,
                                      const std::function<void(const EpochMetrics&)>& on_epoch = {});

void write_metrics_header(std::ostream& os, const TrainConfig& config);
void write_metrics_row(std::ostream& os, const EpochMetrics& m);

/// Loads the configured dataset, trains config.runs runs and writes the
/// metrics CSV plus one checkpoint per run. Progress goes to `log` if given.
std::vector<EpochMetrics> run_training(const TrainConfig& config, std::ostream* log = nullptr);

/// Train / test split selected by config.dataset, truncated to the limits.
TrainTestSplit load_dataset(const TrainConfig& config);

}  // namespace qnn
