#include "qnn/model.hpp"

#include <cmath>
#include <random>

namespace qnn {

namespace {

std::vector<LayerSpec> from_vgg(std::initializer_list<int> stages) {
  std::vector<LayerSpec> out;
  for (int s : stages) {
    if (s == 0) {
      out.push_back(LayerSpec::pool());
    } else {
      out.push_back(LayerSpec::conv(static_cast<std::size_t>(s) / 4));
    }
  }
  return out;
}

}  // namespace

ModelConfig ModelConfig::qvgg_s() {
  ModelConfig c;
  c.name = "qvgg-s";
  c.layers = {LayerSpec::conv(16), LayerSpec::conv(16), LayerSpec::pool(),
              LayerSpec::conv(32), LayerSpec::conv(32), LayerSpec::pool(),
              LayerSpec::conv(64), LayerSpec::conv(64), LayerSpec::pool()};
  return c;
}

// Standard VGG stacks (0 marks a pool) with quaternion channels = real / 4.
ModelConfig ModelConfig::qvgg11() {
  ModelConfig c;
  c.name = "qvgg11";
  c.layers = from_vgg({64, 0, 128, 0, 256, 256, 0, 512, 512, 0, 512, 512, 0});
  return c;
}

ModelConfig ModelConfig::qvgg16() {
  ModelConfig c;
  c.name = "qvgg16";
  c.layers = from_vgg({64, 64, 0, 128, 128, 0, 256, 256, 256, 0, 512, 512, 512, 0, 512, 512, 512, 0});
  return c;
}

ModelConfig ModelConfig::named(const std::string& name) {
  if (name == "qvgg-s") return qvgg_s();
  if (name == "qvgg11") return qvgg11();
  if (name == "qvgg16") return qvgg16();
  throw std::invalid_argument("unknown model '" + name + "' (expected qvgg-s, qvgg11, qvgg16)");
}

void ModelConfig::validate() const {
  if (input_channels == 0 || input_size == 0 || num_classes == 0) {
    throw ShapeError("model '" + name + "': empty input or class count");
  }
  if (kernel % 2 == 0) throw ShapeError("model '" + name + "': kernel must be odd");
  std::size_t size = input_size;
  for (const auto& l : layers) {
    if (l.type == LayerSpec::Type::Conv) {
      if (l.channels == 0) throw ShapeError("model '" + name + "': conv with zero channels");
    } else {
      if (l.window == 0 || size % l.window != 0) {
        throw ShapeError("model '" + name + "': extent " + std::to_string(size) +
                         " not divisible by pool window " + std::to_string(l.window));
      }
      size /= l.window;
    }
  }
}

std::size_t ModelConfig::final_channels() const {
  std::size_t c = input_channels;
  for (const auto& l : layers) {
    if (l.type == LayerSpec::Type::Conv) c = l.channels;
  }
  return c;
}

std::size_t ModelConfig::final_size() const {
  std::size_t s = input_size;
  for (const auto& l : layers) {
    if (l.type == LayerSpec::Type::Pool && l.window) s /= l.window;
  }
  return s;
}

std::size_t ModelConfig::flatten_size() const {
  return 4 * final_channels() * final_size() * final_size();
}

std::size_t ModelConfig::parameter_count() const {
  std::size_t total = 0;
  std::size_t c = input_channels;
  for (const auto& l : layers) {
    if (l.type != LayerSpec::Type::Conv) continue;
    total += 4 * (l.channels * c * kernel * kernel) + 4 * l.channels;
    c = l.channels;
  }
  return total + flatten_size() * num_classes + num_classes;
}

template <std::floating_point T>
Model<T>::Model(ModelConfig config, ActivationKind activation, AngleConvention angle,
                std::uint64_t seed)
    : config_(std::move(config)), activation_(activation), angle_(angle) {
  config_.validate();
  std::mt19937_64 rng(seed);
  std::size_t c = config_.input_channels;
  const std::size_t k = config_.kernel;
  std::size_t index = 0;
  for (const auto& l : config_.layers) {
    if (l.type != LayerSpec::Type::Conv) continue;
    const double fan_in = static_cast<double>(c * k * k);
    const double a = std::sqrt(3.0 / (4.0 * fan_in));
    std::uniform_real_distribution<double> dist(-a, a);
    Tensor<T> w(Shape{4, l.channels, c, k, k});
    for (auto& v : w.vec()) v = static_cast<T>(dist(rng));
    const std::string prefix = "conv" + std::to_string(index++);
    params_.push_back({prefix + ".weight", std::move(w)});
    params_.push_back({prefix + ".bias", Tensor<T>(Shape{4, l.channels})});
    c = l.channels;
  }
  const std::size_t features = config_.flatten_size();
  const double a = 1.0 / std::sqrt(static_cast<double>(features));
  std::uniform_real_distribution<double> dist(-a, a);
  Tensor<T> w(Shape{config_.num_classes, features});
  for (auto& v : w.vec()) v = static_cast<T>(dist(rng));
  params_.push_back({"fc.weight", std::move(w)});
  params_.push_back({"fc.bias", Tensor<T>(Shape{config_.num_classes})});
}

template <std::floating_point T>
std::size_t Model<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

template <std::floating_point T>
ForwardResult<T> Model<T>::forward(Tape<T>& tape, Tensor<T> input, bool trainable) const {
  const Shape expected{4 * config_.input_channels, config_.input_size, config_.input_size};
  if (input.rank() != 4 || Shape(input.shape().begin() + 1, input.shape().end()) != expected) {
    throw ShapeError("model '" + config_.name + "': expected input [N, " +
                     std::to_string(expected[0]) + ", " + std::to_string(expected[1]) + ", " +
                     std::to_string(expected[2]) + "], got " + shape_string(input.shape()));
  }
  const std::size_t batch = input.dim(0);
  ForwardResult<T> out;
  for (const auto& p : params_) out.params.push_back(tape.leaf(p.value, trainable));

  Var<T> x = tape.constant(std::move(input));
  std::size_t pi = 0;
  for (const auto& l : config_.layers) {
    if (l.type == LayerSpec::Type::Conv) {
      x = ad::qconv2d(x, out.params[pi], std::optional<Var<T>>(out.params[pi + 1]));
      x = ad::qactivation(x, activation_, angle_);
      pi += 2;
    } else {
      x = ad::avgpool2d(x, l.window);
    }
  }
  x = ad::reshape(x, Shape{batch, config_.flatten_size()});
  out.logits = ad::linear(x, out.params[pi], std::optional<Var<T>>(out.params[pi + 1]));
  return out;
}

template class Model<float>;
template class Model<double>;

}  // namespace qnn
