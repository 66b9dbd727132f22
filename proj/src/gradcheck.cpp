#include "qnn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "qnn/model.hpp"

namespace qnn {

namespace {

double evaluate_loss(const LossBuilder& build, const std::vector<Tensor<double>>& params,
                     Backend backend) {
  Tape<double> tape(backend);
  std::vector<Var<double>> leaves;
  for (const auto& p : params) leaves.push_back(tape.constant(p));
  return build(tape, leaves).value()[0];
}

Tensor<double> random_tensor(Shape shape, double scale, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  Tensor<double> t(std::move(shape));
  for (auto& v : t.vec()) v = dist(rng);
  return t;
}

std::string label_for(const char* model, ActivationKind kind, AngleConvention conv) {
  return std::string(model) + "/" + std::string(to_string(kind)) + "/" + std::string(to_string(conv));
}

}  // namespace

GradcheckResult gradcheck(const LossBuilder& build, std::vector<Tensor<double>> params,
                          std::size_t samples, double h, std::uint64_t seed, Backend backend) {
  GradcheckResult result;
  std::vector<Tensor<double>> analytic;
  {
    Tape<double> tape(backend);
    std::vector<Var<double>> leaves;
    for (const auto& p : params) leaves.push_back(tape.parameter(p));
    Var<double> loss = build(tape, leaves);
    Gradients<double> grads = tape.backward(loss);
    for (const auto& l : leaves) analytic.push_back(grads[l]);
  }

  std::vector<std::pair<std::size_t, std::size_t>> positions;
  for (std::size_t t = 0; t < params.size(); ++t) {
    for (std::size_t i = 0; i < params[t].size(); ++i) positions.emplace_back(t, i);
  }
  std::mt19937_64 rng(seed);
  std::shuffle(positions.begin(), positions.end(), rng);
  positions.resize(std::min(samples, positions.size()));

  for (const auto& [t, i] : positions) {
    const double saved = params[t][i];
    params[t][i] = saved + h;
    const double up = evaluate_loss(build, params, backend);
    params[t][i] = saved - h;
    const double down = evaluate_loss(build, params, backend);
    params[t][i] = saved;
    const double numeric = (up - down) / (2 * h);
    const double a = analytic[t][i];
    const double abs_err = std::abs(a - numeric);
    const double denom = std::max({std::abs(a), std::abs(numeric), kGradcheckFloor});
    result.max_abs_error = std::max(result.max_abs_error, abs_err);
    result.max_rel_error = std::max(result.max_rel_error, abs_err / denom);
    ++result.checked;
  }
  return result;
}

GradcheckResult gradcheck_conv_model(ActivationKind kind, AngleConvention conv, std::uint64_t seed,
                                     std::size_t samples, double h, Backend backend) {
  ModelConfig mc;
  mc.name = "micro-conv";
  mc.input_channels = 1;
  mc.input_size = 4;
  mc.num_classes = 3;
  mc.layers = {LayerSpec::conv(2), LayerSpec::conv(2), LayerSpec::pool()};
  Model<double> model(mc, kind, conv, seed);

  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<Tensor<double>> params;
  for (const auto& p : model.parameters()) params.push_back(random_tensor(p.value.shape(), 0.6, rng));
  const Tensor<double> input = random_tensor(Shape{2, 4, 4, 4}, 1.0, rng);
  const std::vector<int> labels{0, 2};

  LossBuilder build = [&](Tape<double>& tape, const std::vector<Var<double>>& p) {
    Var<double> x = tape.constant(input);
    x = ad::qactivation(ad::qconv2d(x, p[0], std::optional<Var<double>>(p[1])), kind, conv);
    x = ad::qactivation(ad::qconv2d(x, p[2], std::optional<Var<double>>(p[3])), kind, conv);
    x = ad::avgpool2d(x, 2);
    x = ad::reshape(x, Shape{2, mc.flatten_size()});
    return ad::softmax_cross_entropy(ad::linear(x, p[4], std::optional<Var<double>>(p[5])), labels);
  };
  GradcheckResult r = gradcheck(build, std::move(params), samples, h, seed, backend);
  r.label = label_for("conv", kind, conv);
  return r;
}

GradcheckResult gradcheck_linear_model(ActivationKind kind, AngleConvention conv,
                                       std::uint64_t seed, std::size_t samples, double h,
                                       Backend backend) {
  std::mt19937_64 rng(seed);
  std::vector<Tensor<double>> params{
      random_tensor(Shape{4, 3, 5}, 0.6, rng), random_tensor(Shape{4, 3}, 0.6, rng),
      random_tensor(Shape{4, 2, 3}, 0.6, rng), random_tensor(Shape{4, 2}, 0.6, rng),
      random_tensor(Shape{3, 8}, 0.6, rng),    random_tensor(Shape{3}, 0.6, rng)};
  const Tensor<double> input = random_tensor(Shape{2, 4 * 5}, 1.0, rng);
  const std::vector<int> labels{1, 0};

  LossBuilder build = [&](Tape<double>& tape, const std::vector<Var<double>>& p) {
    Var<double> x = tape.constant(input);
    x = ad::qactivation(ad::qlinear(x, p[0], std::optional<Var<double>>(p[1])), kind, conv);
    x = ad::qactivation(ad::qlinear(x, p[2], std::optional<Var<double>>(p[3])), kind, conv);
    return ad::softmax_cross_entropy(ad::linear(x, p[4], std::optional<Var<double>>(p[5])), labels);
  };
  GradcheckResult r = gradcheck(build, std::move(params), samples, h, seed, backend);
  r.label = label_for("linear", kind, conv);
  return r;
}

}  // namespace qnn
