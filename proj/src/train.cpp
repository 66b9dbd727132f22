#include "qnn/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "qnn/checkpoint.hpp"

namespace qnn {

ModelConfig TrainConfig::model_config() const {
  return custom_model ? *custom_model : ModelConfig::named(model);
}

std::size_t TrainConfig::resolved_epochs() const {
  if (epochs) return *epochs;
  return dataset == "svhn" ? 50 : 100;
}

std::optional<double> TrainConfig::resolved_clip_norm() const {
  if (clip_norm) return clip_norm;
  if (dataset == "svhn" && !custom_model && (model == "qvgg11" || model == "qvgg16")) return 10.0;
  return std::nullopt;
}

std::filesystem::path TrainConfig::checkpoint_path(std::size_t run) const {
  std::filesystem::path base = checkpoint.empty() ? std::filesystem::path(out).replace_extension(".qnn")
                                                  : checkpoint;
  if (runs <= 1) return base;
  const std::string ext = base.extension().string();
  return base.replace_extension().concat("_run" + std::to_string(run) + ext);
}

void TrainConfig::validate() const {
  if (resolved_epochs() < 1) throw std::invalid_argument("epochs must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  if (eval_batch_size < 1) throw std::invalid_argument("eval batch size must be >= 1");
  if (runs < 1) throw std::invalid_argument("runs must be >= 1");
  if (!(lr > 0) || !(lr_final > 0)) throw std::invalid_argument("learning rates must be positive");
  if (lr_final > lr) throw std::invalid_argument("final learning rate must not exceed the initial one");
  if (clip_norm && !(*clip_norm > 0)) throw std::invalid_argument("clip norm must be positive");
  if (dtype != "float32" && dtype != "float64") {
    throw std::invalid_argument("dtype must be float32 or float64, got '" + dtype + "'");
  }
  if (dataset != "cifar10" && dataset != "svhn") {
    throw std::invalid_argument("dataset must be cifar10 or svhn, got '" + dataset + "'");
  }
  if (!parse_activation(activation)) throw std::invalid_argument("unknown activation '" + activation + "'");
  if (!parse_angle(angle)) throw std::invalid_argument("unknown angle convention '" + angle + "'");
  model_config().validate();
}

double scheduled_lr(double lr, double lr_final, std::size_t epochs, std::size_t epoch) {
  const double r = std::pow(lr_final / lr, 1.0 / static_cast<double>(epochs));
  return lr * std::pow(r, static_cast<double>(epoch));
}

std::vector<std::size_t> epoch_permutation(std::size_t n, std::uint64_t seed, std::size_t run,
                                           std::size_t epoch) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(run), static_cast<std::uint32_t>(epoch), 0x5eedu};
  std::mt19937_64 rng(seq);
  std::shuffle(idx.begin(), idx.end(), rng);
  return idx;
}

template <std::floating_point T>
double clip_global_norm(const std::vector<Tensor<T>*>& grads, double max_norm) {
  double sq = 0;
  for (const auto* g : grads) {
    for (T v : g->span()) sq += static_cast<double>(v) * static_cast<double>(v);
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const T s = static_cast<T>(max_norm / norm);
    for (auto* g : grads) {
      for (T& v : g->span()) v *= s;
    }
  }
  return norm;
}

template <std::floating_point T>
void Adam<T>::step(const std::vector<Tensor<T>*>& params, const std::vector<const Tensor<T>*>& grads) {
  if (params.size() != grads.size()) throw std::invalid_argument("Adam: parameter / gradient count mismatch");
  if (m_.empty()) {
    for (const auto* p : params) {
      m_.emplace_back(p->size(), T(0));
      v_.emplace_back(p->size(), T(0));
    }
  }
  if (m_.size() != params.size()) throw std::invalid_argument("Adam: parameter set changed");
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor<T>& p = *params[k];
    const Tensor<T>& g = *grads[k];
    if (g.size() != p.size()) throw std::invalid_argument("Adam: gradient shape mismatch");
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double gi = g[i];
      const double mi = beta1_ * m[i] + (1.0 - beta1_) * gi;
      const double vi = beta2_ * v[i] + (1.0 - beta2_) * gi * gi;
      m[i] = static_cast<T>(mi);
      v[i] = static_cast<T>(vi);
      const double update = lr_ * (mi / c1) / (std::sqrt(vi / c2) + eps_);
      p[i] = static_cast<T>(p[i] - update);
    }
  }
}

namespace {

std::vector<int> batch_labels(const DatasetHandle& data, const std::vector<std::size_t>& idx) {
  std::vector<int> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = data.labels[idx[i]];
  return out;
}

template <std::floating_point T>
std::size_t count_correct(const Tensor<T>& logits, const std::vector<int>& labels) {
  const std::size_t k = logits.dim(1);
  std::size_t hits = 0;
  for (std::size_t r = 0; r < labels.size(); ++r) {
    const T* row = logits.data() + r * k;
    const auto best = static_cast<int>(std::max_element(row, row + k) - row);
    hits += best == labels[r];
  }
  return hits;
}

}  // namespace

template <std::floating_point T>
double evaluate(const Model<T>& model, const DatasetHandle& data, std::size_t batch_size,
                Backend backend) {
  if (data.size() == 0) return 0.0;
  if (batch_size == 0) throw std::invalid_argument("evaluate: batch size must be >= 1");
  std::size_t hits = 0;
  for (std::size_t first = 0; first < data.size(); first += batch_size) {
    const std::size_t last = std::min(data.size(), first + batch_size);
    std::vector<std::size_t> idx(last - first);
    std::iota(idx.begin(), idx.end(), first);
    Tape<T> tape(backend);
    auto fwd = model.forward(tape, encode_batch<T>(data, idx), false);
    hits += count_correct(fwd.logits.value(), batch_labels(data, idx));
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(data.size());
}

template <std::floating_point T>
std::vector<EpochMetrics> train_model(Model<T>& model, const TrainConfig& config,
                                      const DatasetHandle& train, const DatasetHandle& test,
                                      std::size_t run,
                                      const std::function<void(const EpochMetrics&)>& on_epoch) {
  if (train.size() == 0) throw std::invalid_argument("train_model: empty training set");
  const std::size_t epochs = config.resolved_epochs();
  const std::optional<double> clip = config.resolved_clip_norm();
  Adam<T> adam(config.lr);
  std::vector<EpochMetrics> history;
  const auto start = std::chrono::steady_clock::now();

  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    adam.set_lr(scheduled_lr(config.lr, config.lr_final, epochs, epoch));
    const auto order = epoch_permutation(train.size(), config.seed, run, epoch);
    double loss_sum = 0;
    std::size_t hits = 0;
    std::size_t batch_index = 0;
    for (std::size_t first = 0; first < order.size(); first += config.batch_size, ++batch_index) {
      const std::size_t last = std::min(order.size(), first + config.batch_size);
      const std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(first),
                                         order.begin() + static_cast<std::ptrdiff_t>(last));
      const std::vector<int> labels = batch_labels(train, idx);

      Tape<T> tape(config.backend);
      auto fwd = model.forward(tape, encode_batch<T>(train, idx), true);
      auto loss = ad::softmax_cross_entropy(fwd.logits, labels);
      const double loss_value = loss.value()[0];
      if (!std::isfinite(loss_value)) {
        std::ostringstream msg;
        msg << "non-finite loss " << loss_value << " at run " << run << ", epoch " << epoch + 1
            << ", batch " << batch_index + 1;
        throw TrainingDiverged(msg.str());
      }
      loss_sum += loss_value * static_cast<double>(idx.size());
      hits += count_correct(fwd.logits.value(), labels);

      Gradients<T> grads = tape.backward(loss);
      std::vector<Tensor<T>> g;
      g.reserve(fwd.params.size());
      for (const auto& p : fwd.params) g.push_back(grads[p]);
      std::vector<Tensor<T>*> gptr;
      for (auto& t : g) gptr.push_back(&t);
      if (clip) clip_global_norm(gptr, *clip);

      std::vector<Tensor<T>*> params;
      for (auto& p : model.parameters()) params.push_back(&p.value);
      std::vector<const Tensor<T>*> cgrads(gptr.begin(), gptr.end());
      adam.step(params, cgrads);
    }

    EpochMetrics m;
    m.run = run;
    m.epoch = epoch + 1;
    m.train_loss = loss_sum / static_cast<double>(train.size());
    m.train_acc = 100.0 * static_cast<double>(hits) / static_cast<double>(train.size());
    m.test_acc = evaluate(model, test, config.eval_batch_size, config.backend);
    m.lr = scheduled_lr(config.lr, config.lr_final, epochs, epoch + 1);
    m.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    history.push_back(m);
    if (on_epoch) on_epoch(m);
  }
  return history;
}

void write_metrics_header(std::ostream& os, const TrainConfig& config) {
  const auto clip = config.resolved_clip_norm();
  os << "# optimizer=adam beta1=" << kAdamBeta1 << " beta2=" << kAdamBeta2
     << " eps=" << kAdamEpsilon << "\n";
  os << "# model=" << config.model_config().name << " activation=" << config.activation
     << " angle=" << config.angle << " dataset=" << config.dataset
     << " epochs=" << config.resolved_epochs() << " batch_size=" << config.batch_size
     << " lr=" << config.lr << " lr_final=" << config.lr_final
     << " clip_norm=" << (clip ? std::to_string(*clip) : std::string("off"))
     << " seed=" << config.seed << " dtype=" << config.dtype << "\n";
  os << "run,epoch,train_loss,train_acc,test_acc,lr,wall_seconds\n";
}

void write_metrics_row(std::ostream& os, const EpochMetrics& m) {
  std::ostringstream line;
  line << m.run << ',' << m.epoch << ',' << std::fixed << std::setprecision(6) << m.train_loss << ','
       << std::setprecision(3) << m.train_acc << ',' << m.test_acc << ',' << std::scientific
       << std::setprecision(9) << m.lr << ',' << std::fixed << std::setprecision(3)
       << m.wall_seconds << '\n';
  os << line.str();
}

TrainTestSplit load_dataset(const TrainConfig& config) {
  if (config.data_dir.empty()) throw DatasetError("no data directory given for dataset " + config.dataset);
  TrainTestSplit split = config.dataset == "svhn" ? load_svhn_qimg(config.data_dir)
                                                  : load_cifar10(config.data_dir);
  if (config.train_limit) split.train = split.train.head(config.train_limit);
  if (config.test_limit) split.test = split.test.head(config.test_limit);
  return split;
}

namespace {

template <std::floating_point T>
std::vector<EpochMetrics> run_typed(const TrainConfig& config, const TrainTestSplit& data,
                                    std::ostream& csv, std::ostream* log) {
  const ModelConfig mc = config.model_config();
  const ActivationKind kind = *parse_activation(config.activation);
  const AngleConvention angle = *parse_angle(config.angle);
  std::vector<EpochMetrics> all;
  for (std::size_t run = 0; run < config.runs; ++run) {
    Model<T> model(mc, kind, angle, config.seed + 1000003ULL * run);
    if (log) {
      *log << "run " << run << ": " << mc.name << " (" << model.parameter_count()
           << " parameters), " << data.train.size() << " train / " << data.test.size()
           << " test images\n";
    }
    auto history = train_model(model, config, data.train, data.test, run, [&](const EpochMetrics& m) {
      write_metrics_row(csv, m);
      csv.flush();
      if (log) {
        *log << "  epoch " << m.epoch << ": loss " << m.train_loss << ", train " << m.train_acc
             << "%, test " << m.test_acc << "%, " << m.wall_seconds << " s\n";
        log->flush();
      }
    });
    save_checkpoint(config.checkpoint_path(run), model.parameters());
    all.insert(all.end(), history.begin(), history.end());
  }
  return all;
}

}  // namespace

std::vector<EpochMetrics> run_training(const TrainConfig& config, std::ostream* log) {
  config.validate();
  const TrainTestSplit data = load_dataset(config);
  std::ofstream csv(config.out);
  if (!csv) throw std::runtime_error("cannot open " + config.out.string() + " for writing");
  write_metrics_header(csv, config);
  if (config.dtype == "float64") return run_typed<double>(config, data, csv, log);
  return run_typed<float>(config, data, csv, log);
}

#define QNN_INSTANTIATE(T)                                                                        \
  template double clip_global_norm(const std::vector<Tensor<T>*>&, double);                       \
  template class Adam<T>;                                                                         \
  template double evaluate(const Model<T>&, const DatasetHandle&, std::size_t, Backend);          \
  template std::vector<EpochMetrics> train_model(Model<T>&, const TrainConfig&,                   \
                                                 const DatasetHandle&, const DatasetHandle&,      \
                                                 std::size_t,                                     \
                                                 const std::function<void(const EpochMetrics&)>&);
QNN_INSTANTIATE(float)
QNN_INSTANTIATE(double)
#undef QNN_INSTANTIATE

}  // namespace qnn
