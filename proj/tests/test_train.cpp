#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "qnn/train.hpp"
#include "support/synthetic.hpp"

using namespace qnn;
namespace fs = std::filesystem;

namespace {

ModelConfig tiny(std::size_t size) {
  ModelConfig c;
  c.name = "tiny";
  c.input_size = size;
  c.layers = {LayerSpec::conv(4), LayerSpec::pool(), LayerSpec::conv(4), LayerSpec::pool()};
  return c;
}

template <class T>
double mean_loss(const Model<T>& model, const DatasetHandle& data) {
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::vector<int> labels(data.labels.begin(), data.labels.end());
  Tape<T> tape;
  auto out = model.forward(tape, encode_batch<T>(data, idx), false);
  return ad::softmax_cross_entropy(out.logits, labels).value()[0];
}

std::vector<std::string> csv_without_wall(const fs::path& p) {
  std::ifstream is(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(is, line);) {
    if (!line.empty() && line[0] != '#' && line.find(',') != std::string::npos)
      line = line.substr(0, line.rfind(','));
    out.push_back(line);
  }
  return out;
}

}  // namespace

TEST(Schedule, FinalLearningRate) {
  EXPECT_DOUBLE_EQ(scheduled_lr(1e-3, 1e-4, 100, 0), 1e-3);
  for (std::size_t epochs : {1u, 5u, 50u, 100u}) {
    EXPECT_NEAR(scheduled_lr(1e-3, 1e-4, epochs, epochs) / 1e-4, 1.0, 1e-9);
  }
  const double r = std::pow(0.1, 1.0 / 100);
  EXPECT_NEAR(scheduled_lr(1e-3, 1e-4, 100, 37), 1e-3 * std::pow(r, 37), 1e-18);
}

TEST(Adam, ZeroGradientLeavesParameters) {
  Tensor<double> p(Shape{3}, std::vector<double>{1.5, -2, 0.25});
  const Tensor<double> before = p;
  const Tensor<double> g(Shape{3}, 0.0);
  Adam<double> adam(1e-3);
  for (int i = 0; i < 5; ++i) adam.step({&p}, {&g});
  EXPECT_EQ(p, before);
  EXPECT_EQ(adam.steps(), 5u);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  Tensor<double> p(Shape{2}, std::vector<double>{1, 1});
  const Tensor<double> g(Shape{2}, std::vector<double>{0.3, -4});
  Adam<double> adam(1e-2);
  adam.step({&p}, {&g});
  EXPECT_NEAR(p[0], 1 - 1e-2, 1e-9);
  EXPECT_NEAR(p[1], 1 + 1e-2, 1e-9);
}

TEST(Clip, GlobalNorm) {
  Tensor<double> a(Shape{2}, std::vector<double>{30, 40});
  Tensor<double> b(Shape{1}, std::vector<double>{120});
  const double before = clip_global_norm<double>({&a, &b}, 10);
  EXPECT_DOUBLE_EQ(before, 130);
  EXPECT_LE(std::sqrt(a[0] * a[0] + a[1] * a[1] + b[0] * b[0]), 10 + 1e-6);
  EXPECT_NEAR(a[1] / a[0], 4.0 / 3.0, 1e-12);

  Tensor<double> small(Shape{1}, std::vector<double>{3});
  clip_global_norm<double>({&small}, 10);
  EXPECT_EQ(small[0], 3);
}

TEST(Shuffle, PermutationIsSeeded) {
  const auto p = epoch_permutation(1000, 42, 0, 3);
  EXPECT_EQ(std::set<std::size_t>(p.begin(), p.end()).size(), 1000u);
  EXPECT_EQ(*std::max_element(p.begin(), p.end()), 999u);
  EXPECT_EQ(p, epoch_permutation(1000, 42, 0, 3));
  EXPECT_NE(p, epoch_permutation(1000, 42, 0, 4));
  EXPECT_NE(p, epoch_permutation(1000, 42, 1, 3));
  EXPECT_NE(p, epoch_permutation(1000, 43, 0, 3));
}

TEST(Config, DefaultsAndValidation) {
  TrainConfig c;
  EXPECT_EQ(c.resolved_epochs(), 100u);
  EXPECT_FALSE(c.resolved_clip_norm());
  c.dataset = "svhn";
  EXPECT_EQ(c.resolved_epochs(), 50u);
  EXPECT_FALSE(c.resolved_clip_norm());
  c.model = "qvgg16";
  EXPECT_EQ(c.resolved_clip_norm(), 10.0);
  c.validate();
  c.lr_final = 1e-2;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = TrainConfig{};
  c.activation = "softplus";
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = TrainConfig{};
  c.epochs = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Train, FirstBatchLossNearLogTen) {
  Model<float> m(ModelConfig::named("qvgg-s"), ActivationKind::PhaseSin, AngleConvention::Psi, 0);
  const auto batch = synthetic::noise(64, 32, 1);
  EXPECT_NEAR(mean_loss(m, batch), std::log(10.0), 0.3);
}

TEST(Evaluate, ChanceLevelWhenUntrained) {
  Model<float> m(ModelConfig::named("qvgg-s"), ActivationKind::PhaseSin, AngleConvention::Psi, 5);
  const auto data = synthetic::noise(500, 32, 2);
  EXPECT_NEAR(evaluate(m, data), 10.0, 3.0);
}

TEST(Evaluate, InvariantToBatchSize) {
  Model<float> m(tiny(8), ActivationKind::PhaseSin, AngleConvention::Psi, 6);
  const auto data = synthetic::separable(300, 8, 3, 100);
  const double a = evaluate(m, data, 1);
  EXPECT_EQ(a, evaluate(m, data, 256));
  EXPECT_EQ(a, evaluate(m, data, 7, Backend::Serial));
}

TEST(Train, SeparableSmokeHalvesLoss) {
  const auto data = synthetic::separable(512, 8, 4);
  Model<float> m(tiny(8), ActivationKind::PhaseSin, AngleConvention::Psi, 7);
  const double before = mean_loss(m, data);
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = 16;
  cfg.lr = 1e-2;
  cfg.lr_final = 1e-3;
  const auto hist = train_model(m, cfg, data, data, 0);
  ASSERT_EQ(hist.size(), 1u);
  EXPECT_LE(mean_loss(m, data), 0.5 * before);
}

TEST(Evaluate, MemorizedFixtureIsPerfect) {
  const auto data = synthetic::separable(40, 8, 5, 8);
  Model<double> m(tiny(8), ActivationKind::PhaseSin, AngleConvention::Psi, 8);
  TrainConfig cfg;
  cfg.epochs = 60;
  cfg.batch_size = 8;
  cfg.lr = 2e-2;
  cfg.lr_final = 2e-3;
  train_model(m, cfg, data, data, 0);
  EXPECT_DOUBLE_EQ(evaluate(m, data), 100.0);
}

TEST(Train, NanLossAborts) {
  const auto data = synthetic::separable(20, 8, 6);
  Model<float> m(tiny(8), ActivationKind::PhaseSin, AngleConvention::Psi, 9);
  m.parameters()[0].value[0] = std::numeric_limits<float>::quiet_NaN();
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = 10;
  try {
    train_model(m, cfg, data, data, 0);
    FAIL() << "expected TrainingDiverged";
  } catch (const TrainingDiverged& e) {
    EXPECT_NE(std::string(e.what()).find("epoch 1, batch 1"), std::string::npos) << e.what();
  }
}

TEST(Train, SameSeedGivesSameMetrics) {
  const fs::path dir = fs::temp_directory_path() / "qnn_test_train";
  fs::remove_all(dir);
  synthetic::write_cifar_dir(dir / "data", synthetic::separable(100, 32, 10),
                             synthetic::separable(40, 32, 11));
  TrainConfig cfg;
  ModelConfig mc = tiny(32);
  mc.layers.push_back(LayerSpec::pool());
  cfg.custom_model = mc;
  cfg.data_dir = dir / "data";
  cfg.epochs = 2;
  cfg.batch_size = 25;
  cfg.runs = 2;
  cfg.seed = 99;
  cfg.out = dir / "a.csv";
  const auto hist = run_training(cfg);
  ASSERT_EQ(hist.size(), 4u);
  EXPECT_NEAR(hist.back().lr, 1e-4, 1e-13);
  EXPECT_TRUE(fs::exists(dir / "a_run0.qnn"));
  EXPECT_TRUE(fs::exists(dir / "a_run1.qnn"));
  cfg.out = dir / "b.csv";
  run_training(cfg);
  const auto a = csv_without_wall(dir / "a.csv");
  EXPECT_EQ(a, csv_without_wall(dir / "b.csv"));
  ASSERT_EQ(a.size(), 7u);
  EXPECT_EQ(a[0], "# optimizer=adam beta1=0.9 beta2=0.99 eps=1e-08");
  EXPECT_EQ(a[2], "run,epoch,train_loss,train_acc,test_acc,lr");
  EXPECT_EQ(a[3].substr(0, 4), "0,1,");
  EXPECT_EQ(a[6].substr(0, 4), "1,2,");
  EXPECT_NE(a[3], a[5]);
}

TEST(Metrics, RowFormat) {
  EpochMetrics m{1, 3, 0.5, 12.3456, 78.9, 1e-4, 2.5};
  std::ostringstream os;
  write_metrics_row(os, m);
  EXPECT_EQ(os.str(), "1,3,0.500000,12.346,78.900,1.000000000e-04,2.500\n");
}
